"""Run configuration: TOML file + command-line overrides on a fixed key schema."""

from __future__ import annotations

import copy
import sys
from dataclasses import dataclass, field

from ..errors import ConfigError
from ..gas import GasParams, ThermoState

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SUITES = ("bl", "contact", "rarefaction", "interactions", "sources", "stability")

# Normative defaults.  ``None`` marks keys that are absent unless given.
DEFAULTS: dict = {
    "gas": {"R": 1.0, "gamma": 1.4, "mu": 1.0, "kappa": 1.0, "A": 1.0},
    "case": {
        "mode": "forward",
        "right_state": [1.0, 0.0, 1.0],
        "strengths": {"delta_b": 0.02, "delta_r1": 0.05, "delta_d": 0.02, "delta_r3": 0.05},
        "left_state": None,
    },
    "grid": {"N": 4096, "L": 0.0, "cfl": 0.4},
    "run": {"t_final": 200.0, "snapshot_times": [], "snapshot_every": 10.0,
            "profile_times": [0.0, 200.0], "deterministic": True, "bump_h1": 0.01,
            "bump_half_width": 10.0, "q": 14},
    "verify": {
        "suites": list(SUITES),
        "power_window": [10.0, 1000.0],
        "exp_window": [20.0, 200.0],
        "n_times": 24,
        "output_dir": "out",
        "quad_rtol": 1e-10,
        "bl_deltas": [0.02, 0.05, 0.1],
        "stability_C": 1.0,
        "mms_N": [100, 200, 400],
    },
}

_TYPES = {"mode": str, "output_dir": str, "deterministic": bool}


@dataclass
class RunConfig:
    gas: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["gas"]))
    case: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["case"]))
    grid: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["grid"]))
    run: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["run"]))
    verify: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS["verify"]))

    # -- derived objects --------------------------------------------------
    def gas_params(self) -> GasParams:
        try:
            return GasParams(**{k: float(self.gas[k]) for k in DEFAULTS["gas"]})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad [gas] section: {exc}") from exc

    def right_state(self) -> ThermoState:
        return _state(self.case["right_state"], "right_state")

    def left_state(self) -> ThermoState:
        return _state(self.case["left_state"], "left_state")

    def snapshot_times(self) -> list[float]:
        t_final = float(self.run["t_final"])
        times = [float(x) for x in self.run.get("snapshot_times") or []]
        every = float(self.run.get("snapshot_every") or 0.0)
        if every > 0:
            n = int(round(t_final / every))
            times += [every * k for k in range(1, n + 1) if every * k <= t_final * (1 + 1e-12)]
        return sorted({t for t in times if 0 < t <= t_final} | {t_final})

    def to_dict(self) -> dict:
        return {k: copy.deepcopy(getattr(self, k)) for k in DEFAULTS}

    def validate(self) -> "RunConfig":
        mode = self.case.get("mode")
        has_s = self.case.get("strengths") is not None
        has_l = self.case.get("left_state") is not None
        if mode == "forward":
            if not has_s or has_l:
                raise ConfigError("mode 'forward' needs [case] strengths and no left_state")
        elif mode == "solve":
            if not has_l or has_s:
                raise ConfigError("mode 'solve' needs [case] left_state and no strengths")
        else:
            raise ConfigError(f"[case] mode must be 'forward' or 'solve', got {mode!r}")
        self.gas_params()
        self.right_state()
        if has_l:
            self.left_state()
        if int(self.grid["N"]) < 4:
            raise ConfigError("[grid] N must be >= 4")
        if float(self.grid["L"]) < 0:
            raise ConfigError("[grid] L must be >= 0 (0 selects the automatic length)")
        if not 0 < float(self.grid["cfl"]) <= 1:
            raise ConfigError("[grid] cfl must lie in (0, 1]")
        if not float(self.run["t_final"]) > 0:
            raise ConfigError("[run] t_final must be positive")
        bad = [s for s in self.verify["suites"] if s not in SUITES]
        if bad:
            raise ConfigError(f"unknown suites {bad}; choose from {SUITES}")
        for key in ("power_window", "exp_window"):
            w = self.verify[key]
            if len(w) != 2 or not 0 < float(w[0]) < float(w[1]):
                raise ConfigError(f"[verify] {key} must be [t_lo, t_hi] with 0 < t_lo < t_hi")
        return self


def _state(seq, name) -> ThermoState:
    try:
        vals = [float(x) for x in seq]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be three numbers") from exc
    if len(vals) != 3:
        raise ConfigError(f"{name} must be three numbers (v, u, theta)")
    if not (vals[0] > 0 and vals[2] > 0):
        raise ConfigError(f"{name} needs v > 0 and theta > 0")
    return ThermoState(*vals)


def _merge(base: dict, new: dict, where: str) -> None:
    for key, val in new.items():
        if key not in base:
            raise ConfigError(f"unknown key {where}.{key}")
        if isinstance(base[key], dict) and isinstance(val, dict) and key != "strengths":
            _merge(base[key], val, f"{where}.{key}")
        else:
            base[key] = val


def from_dict(data: dict) -> RunConfig:
    cfg = RunConfig()
    for section, body in data.items():
        if section not in DEFAULTS:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(body, dict):
            raise ConfigError(f"[{section}] must be a table")
        target = getattr(cfg, section)
        if section == "case":
            # giving one of strengths / left_state removes the other default
            if "left_state" in body and "strengths" not in body:
                target["strengths"] = None
                target.setdefault("mode", "solve")
                if "mode" not in body:
                    body = {**body, "mode": "solve"}
        _merge(target, body, section)
    return cfg


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    data: dict = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    cfg = from_dict(data)
    for dotted, val in (overrides or {}).items():
        apply_override(cfg, dotted, val)
    return cfg.validate()


def flag_keys():
    """(section, key) pairs exposed as command-line flags."""
    for section, body in DEFAULTS.items():
        for key in body:
            if section == "case" and key == "strengths":
                for sk in body[key]:
                    yield section, f"strengths.{sk}"
            else:
                yield section, key


def parse_value(text: str, default):
    """Parse a flag value to the type of its default."""
    if isinstance(default, bool):
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {text!r}")
    if isinstance(default, list) or default is None:
        items = [x for x in text.replace(";", ",").split(",") if x.strip()]
        out = []
        for x in items:
            x = x.strip()
            try:
                out.append(float(x))
            except ValueError:
                out.append(x)
        return out
    if isinstance(default, int) and not isinstance(default, bool):
        try:
            return int(text)
        except ValueError as exc:
            raise ConfigError(f"expected an integer, got {text!r}") from exc
    if isinstance(default, float):
        try:
            return float(text)
        except ValueError as exc:
            raise ConfigError(f"expected a number, got {text!r}") from exc
    return text


def apply_override(cfg: RunConfig, dotted: str, value) -> None:
    parts = dotted.split(".")
    section = parts[0]
    if section not in DEFAULTS:
        raise ConfigError(f"unknown section in override {dotted!r}")
    target = getattr(cfg, section)
    default = DEFAULTS[section]
    for p in parts[1:-1]:
        if p not in default:
            raise ConfigError(f"unknown key in override {dotted!r}")
        if target.get(p) is None:
            target[p] = copy.deepcopy(default[p])
        target, default = target[p], default[p]
    key = parts[-1]
    if key not in default:
        raise ConfigError(f"unknown key in override {dotted!r}")
    if isinstance(value, str):
        value = parse_value(value, default[key])
    if section == "case" and key == "left_state" and value is not None:
        cfg.case["strengths"] = None
        cfg.case["mode"] = "solve"
    target[key] = value
