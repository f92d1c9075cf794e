import csv
import json
import subprocess
import sys

import pytest

from inflow_ns.harness import csvio
from inflow_ns.harness.cli import main

ZERO = ["--case.strengths.delta_b", "0", "--case.strengths.delta_r1", "0",
        "--case.strengths.delta_d", "0", "--case.strengths.delta_r3", "0"]


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_case_generate(capsys):
    assert main(["case", "generate"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert set(data) >= {"left", "right", "star", "mid", "star_up"}


def test_case_solve_round_trip(capsys):
    assert main(["case", "generate"]) == 0
    data = json.loads(capsys.readouterr().out)
    left = data["left"]
    right = data["right"]
    arg = f"{left['v']!r},{left['u']!r},{left['theta']!r}"
    rarg = f"{right['v']!r},{right['u']!r},{right['theta']!r}"
    assert main(["case", "solve", "--case.left_state", arg, "--case.right_state", rarg]) == 0
    back = json.loads(capsys.readouterr().out)
    for k in ("star", "mid", "star_up"):
        for q in ("v", "u", "theta"):
            assert back[k][q] == pytest.approx(data[k][q], abs=1e-8)


def test_waves_build(tmp_path, capsys):
    out = tmp_path / "w.csv"
    assert main(["waves", "build", "--t", "5", "--out", str(out), "--grid.N", "200"]) == 0
    rows = _read(out)
    assert rows[0] == ["t", "xi", "V", "U", "Theta", "dV", "dU", "dTheta", "G", "H"]
    assert len(rows) == 202
    # shortest round-trip formatting
    assert all(repr(float(x)) == x for x in rows[1][:5])


@pytest.mark.parametrize("argv", [[], ["verify", "nonsense"], ["waves", "build"],
                                  ["case", "generate", "--grid.bogus", "1"]])
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_config_errors(tmp_path, capsys):
    assert main(["case", "solve"]) == 2
    assert main(["case", "generate", "--config", str(tmp_path / "none.toml")]) == 2
    assert main(["waves", "build", "--t", "-1"]) == 2
    assert main(["case", "generate", "--grid.N", "abc"]) == 2


def test_numerical_failure(capsys):
    # a compressive jump between the states: no rarefaction/contact solution
    rc = main(["case", "solve", "--case.left_state", "1.0,3.0,1.0", "--case.right_state", "1.0,0.5,1.0"])
    assert rc == 3


def test_verify_and_report(tmp_path, capsys):
    d = str(tmp_path / "o")
    assert main(["verify", "bl", "--verify.output_dir", d]) == 0
    summary = _read(f"{d}/summary.csv")
    assert summary[0] == ["name", "stated", "measured", "result", "kind"]
    names = [r[0] for r in summary[1:]]
    assert len(names) == len(set(names)) == 8
    assert main(["report", "--verify.output_dir", d]) == 0
    assert "0 gating failures" in capsys.readouterr().out
    assert main(["report", "--verify.output_dir", str(tmp_path / "empty")]) == 2


def test_trivial_stability(tmp_path, capsys):
    d = str(tmp_path / "s")
    rc = main(["verify", "stability", *ZERO, "--run.bump_h1", "0", "--grid.N", "64",
               "--run.t_final", "5", "--verify.output_dir", d])
    rows = {r[0]: r for r in _read(f"{d}/summary.csv")[1:]}
    for k in ("stability.sup_ratio", "stability.h1_bound", "stability.energy_decrease"):
        assert rows[k][3] == "pass"
    norms = _read(f"{d}/norms.csv")
    assert norms[0] == csvio.NORMS_HEADER
    assert all(float(x) < 1e-12 for r in norms[1:] for x in r[1:])
    # exit status follows the gating rows, which include the solver order check
    assert rc == (0 if rows["solver.mms_order"][3] == "pass" else 1)


def test_simulate(tmp_path, capsys):
    d = str(tmp_path / "sim")
    assert main(["simulate", "--grid.N", "256", "--run.t_final", "2", "--run.snapshot_every", "1",
                 "--run.profile_times", "0,2", "--verify.output_dir", d]) == 0
    norms = _read(f"{d}/norms.csv")
    assert [float(r[0]) for r in norms[1:]] == [0.0, 1.0, 2.0]
    prof = _read(f"{d}/profiles.csv")
    assert prof[0] == csvio.PROFILES_HEADER
    assert len(prof) == 1 + 2 * 257


def test_verify_is_deterministic(tmp_path, capsys):
    d = str(tmp_path / "run")
    names = ("contact.csv", "summary.csv", "run_config.json", "waves.csv")
    seen = []
    for _ in range(2):
        main(["verify", "contact", "--verify.output_dir", d])
        main(["waves", "build", "--t", "3", "--grid.N", "100", "--verify.output_dir", d])
        seen.append({n: (tmp_path / "run" / n).read_bytes() for n in names})
    assert seen[0] == seen[1]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "inflow_ns", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "verify" in r.stdout
