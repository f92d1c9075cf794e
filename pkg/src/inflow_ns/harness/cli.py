"""Command-line entry point.

Subcommands: ``case solve``, ``case generate``, ``waves build --t T``,
``verify <suite|all>``, ``simulate`` and ``report``.  Every configuration
key is also a flag, e.g. ``--grid.N 2048`` or ``--case.strengths.delta_b 0.05``.

Exit status: 0 success, 1 assertion failure, 2 usage or configuration
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from ..errors import ConfigError, DomainError, InsufficientData, NumericalError
from . import csvio
from .config import SUITES, flag_keys, load_config

log = logging.getLogger("inflow_ns")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _add_config_flags(p):
    p.add_argument("--config", help="TOML configuration file")
    p.add_argument("-v", "--verbose", action="store_true")
    grp = p.add_argument_group("configuration overrides")
    for section, key in flag_keys():
        dotted = f"{section}.{key}"
        grp.add_argument(f"--{dotted}", dest=f"ovr:{dotted}", metavar="VALUE", default=None)


def build_parser():
    p = _Parser(prog="inflow-ns", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pc = sub.add_parser("case", help="intermediate states of a case")
    pc.add_argument("action", choices=("solve", "generate"))
    _add_config_flags(pc)

    pw = sub.add_parser("waves", help="sample the superposition wave")
    pw.add_argument("action", choices=("build",))
    pw.add_argument("--t", type=float, required=True, dest="time")
    pw.add_argument("--out", default=None, help="CSV path (default <output_dir>/waves.csv)")
    _add_config_flags(pw)

    pv = sub.add_parser("verify", help="run verification suites")
    pv.add_argument("suite", choices=SUITES + ("all",))
    _add_config_flags(pv)

    ps = sub.add_parser("simulate", help="perturbed-superposition run; writes norms and profiles")
    _add_config_flags(ps)

    pr = sub.add_parser("report", help="print the summary of the last verify run")
    _add_config_flags(pr)
    return p


def _config(args, **extra):
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("ovr:") and v is not None}
    overrides.update(extra)
    return load_config(args.config, overrides)


def cmd_case(args):
    from .suites import build_case

    if args.action == "solve":
        cfg = _config(args)
        if cfg.case["mode"] != "solve":
            raise ConfigError("case solve needs [case] left_state (mode 'solve')")
    else:
        cfg = _config(args)
        if cfg.case["mode"] != "forward":
            raise ConfigError("case generate needs [case] strengths (mode 'forward')")
    g = cfg.gas_params()
    case = build_case(cfg, g)
    print(json.dumps(case.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_waves(args):
    from ..composite import build_parts, eval_composite, eval_sources
    from ..solver import default_length
    from .suites import build_case

    cfg = _config(args)
    g = cfg.gas_params()
    case = build_case(cfg, g)
    parts = build_parts(case, g, int(cfg.run["q"]))
    t = float(args.time)
    if t < 0:
        raise ConfigError("--t must be non-negative")
    L = float(cfg.grid["L"]) or default_length(case, parts, max(t, 1.0))
    xi = np.linspace(0.0, L, int(cfg.grid["N"]) + 1)
    f = eval_composite(t, xi, case, parts)
    G, H = eval_sources(f, g)
    path = args.out or f"{cfg.verify['output_dir']}/waves.csv"
    csvio.write_rows(path, ["t", "xi", "V", "U", "Theta", "dV", "dU", "dTheta", "G", "H"],
                     zip(np.full(xi.size, t), xi, f.V, f.U, f.Theta, f.dV, f.dU, f.dTheta, G, H))
    print(path)
    return EXIT_OK


def _print_summary(rows):
    width = max((len(r[0]) for r in rows), default=10)
    for name, stated, measured, result, kind in rows:
        tag = result.upper() if kind == "gating" else f"{result} (info)"
        print(f"{name:<{width}}  {tag:<11}  measured {measured:<24}  stated {stated}")


def cmd_verify(args):
    from .suites import run_verify

    cfg = _config(args)
    suites = list(SUITES) if args.suite == "all" else [args.suite]
    results = run_verify(cfg, suites)
    _print_summary([a.row() for a in results])
    return EXIT_OK if all(a.passed for a in results if a.gating) else EXIT_FAIL


def cmd_simulate(args):
    from ..composite import build_parts
    from ..solver import run_stability
    from .suites import build_case

    cfg = _config(args)
    g = cfg.gas_params()
    case = build_case(cfg, g)
    parts = build_parts(case, g, int(cfg.run["q"]))
    run = run_stability(case, parts, g, int(cfg.grid["N"]), float(cfg.run["t_final"]),
                        snapshot_times=cfg.snapshot_times(), profile_times=cfg.run["profile_times"],
                        L=float(cfg.grid["L"]) or None, bump_h1=float(cfg.run["bump_h1"]),
                        bump_half_width=float(cfg.run["bump_half_width"]), cfl=float(cfg.grid["cfl"]))
    out = cfg.verify["output_dir"]
    csvio.write_rows(f"{out}/norms.csv", csvio.NORMS_HEADER, [tuple(n) for n in run.norms])
    rows = []
    for state, fld in run.profiles:
        rows.extend(csvio.profile_rows(state, fld))
    csvio.write_rows(f"{out}/profiles.csv", csvio.PROFILES_HEADER, rows)
    last = run.norms[-1]
    print(f"t={last.t:g}  sup=({last.sup_phi:.3e}, {last.sup_psi:.3e}, {last.sup_theta:.3e})  "
          f"h1={last.h1:.3e}  energy={last.energy:.3e}")
    return EXIT_OK


def cmd_report(args):
    import csv

    cfg = _config(args)
    path = f"{cfg.verify['output_dir']}/summary.csv"
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))[1:]
    except OSError as exc:
        raise ConfigError(f"no summary at {path}; run verify first") from exc
    _print_summary(rows)
    ok = all(r[3] == "pass" for r in rows if r[4] == "gating")
    n_fail = sum(1 for r in rows if r[4] == "gating" and r[3] != "pass")
    print(f"{len(rows)} assertions, {n_fail} gating failures")
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"case": cmd_case, "waves": cmd_waves, "verify": cmd_verify,
            "simulate": cmd_simulate, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, InsufficientData) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
