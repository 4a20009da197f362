import json
import math
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from qatchain import EvolutionReport, read_snapshot
from qatchain.cli import main
from qatchain.runspec import load_runspec

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def _spec(tmp_path, name, **changes):
    data = json.loads((SCENARIOS / name).read_text())
    for key, value in changes.items():
        data[key] = value
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def test_run_capture_release(tmp_path, capsys):
    spec = _spec(tmp_path, "capture_release.json")
    assert main(["run", str(spec), "--snapshot-dir", str(tmp_path / "snaps")]) == 0
    rep = EvolutionReport.from_csv(tmp_path / "capture_release_report.csv")
    # vacuum released for one unit of time, then recaptured at the same omega
    assert rep.row_at(2.0).squeeze_r == pytest.approx(-0.5 * math.log(2), abs=1e-3)
    assert rep.footer["max_path_discrepancy"] < 1e-8
    assert not rep.has_fidelity
    assert rep.column("time")[-1] == pytest.approx(4.0)
    assert np.all(np.abs(rep.column("norm") - 1) < 1e-6)
    assert np.all(rep.column("var_x") * rep.column("var_p") >= 0.25 * (1 - 1e-9))
    snap = read_snapshot(tmp_path / "snaps" / "snapshot_t2.csv")
    assert snap.time == 2.0
    assert "max_path_discrepancy" in capsys.readouterr().out


def test_run_with_verify_adds_fidelity(tmp_path):
    spec = _spec(tmp_path, "capture_release.json")
    assert main(["run", str(spec), "--verify"]) == 0
    rep = EvolutionReport.from_csv(tmp_path / "capture_release_report.csv")
    assert rep.has_fidelity
    assert min(rep.column("fidelity")) >= 1 - 1e-6


def test_report_override(tmp_path):
    spec = _spec(tmp_path, "capture_release.json")
    target = tmp_path / "out" / "r.csv"
    assert main(["run", str(spec), "--report", str(target)]) == 0
    assert target.exists()


def test_zero_segments(tmp_path):
    spec = _spec(tmp_path, "capture_release.json", segments=[])
    data = json.loads(spec.read_text())
    data["outputs"]["snapshot_times"] = []
    spec.write_text(json.dumps(data))
    assert main(["run", str(spec)]) == 0
    rep = EvolutionReport.from_csv(tmp_path / "capture_release_report.csv")
    assert len(rep.rows) == 1 and rep.rows[0].time == 0.0


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"grid": {"x_min": -10, "x_max": 10, "n_points": 512,}}')
    assert main(["run", str(bad)]) == 2
    assert "line 1" in capsys.readouterr().err


@pytest.mark.parametrize("mutate,needle", [
    (lambda d: d["segments"][1].update(omgea=1.0), "segments.1.omgea"),
    (lambda d: d["segments"][0].pop("omega"), "segments.0"),
    (lambda d: d["grid"].update(n_points=1000), "grid"),
    (lambda d: d.update(hbar=-1.0), "hbar"),
    (lambda d: d["outputs"].update(method="fastest"), "outputs.method"),
    (lambda d: d["outputs"].update(snapshot_times=[9.0]), "outputs.snapshot_times"),
])
def test_schema_errors_name_field(tmp_path, capsys, mutate, needle):
    data = json.loads((SCENARIOS / "capture_release.json").read_text())
    mutate(data)
    path = tmp_path / "s.json"
    path.write_text(json.dumps(data))
    assert main(["run", str(path)]) == 2
    assert needle in capsys.readouterr().err


def test_missing_file(tmp_path):
    assert main(["run", str(tmp_path / "nope.json")]) == 2


def test_physics_error_exit(tmp_path, capsys):
    spec = _spec(tmp_path, "free_dispersion.json",
                 grid={"x_min": -6.0, "x_max": 6.0, "n_points": 256})
    assert main(["run", str(spec)]) == 3
    assert "TruncationError" in capsys.readouterr().err


def test_verify_bundled(tmp_path, capsys):
    assert main(["verify", str(_spec(tmp_path, "capture_release.json"))]) == 0
    assert capsys.readouterr().out.startswith("ok")


def test_verify_coarse_oracle_fails(tmp_path):
    spec = _spec(tmp_path, "capture_release.json")
    assert main(["verify", str(spec), "--oracle-dt", "0.5"]) == 4


def test_verify_free_only_tight(tmp_path):
    spec = _spec(tmp_path, "free_dispersion.json")
    assert main(["verify", str(spec), "--tol", "1e-8"]) == 0


def test_bench_single_period(tmp_path, capsys):
    assert main(["bench", str(_spec(tmp_path, "ho_period.json"))]) == 0
    out = capsys.readouterr().out.splitlines()
    rows = {l.split()[0]: l.split() for l in out[1:4]}
    assert set(rows) == {"direct", "qat_chain", "oracle"}
    for method in rows:
        assert float(rows[method][2]) < 1e-6


def test_bench_empty_schedule(tmp_path, capsys):
    spec = _spec(tmp_path, "ho_period.json", segments=[])
    assert main(["bench", str(spec)]) == 0
    assert "oracle" in capsys.readouterr().out


def test_determinism(tmp_path):
    spec = _spec(tmp_path, "capture_release.json")
    main(["run", str(spec), "--report", str(tmp_path / "a.csv"),
          "--snapshot-dir", str(tmp_path / "a")])
    main(["run", str(spec), "--report", str(tmp_path / "b.csv"),
          "--snapshot-dir", str(tmp_path / "b")])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert ((tmp_path / "a" / "snapshot_t4.csv").read_bytes()
            == (tmp_path / "b" / "snapshot_t4.csv").read_bytes())


def test_snapshot_restart_round_trip(tmp_path):
    data = json.loads((SCENARIOS / "capture_release.json").read_text())
    data["outputs"].update(method="direct", snapshot_times=[2.0, 4.0])
    full = tmp_path / "full.json"
    full.write_text(json.dumps(data))
    assert main(["run", str(full), "--snapshot-dir", str(tmp_path / "snaps")]) == 0
    rest = dict(data, t_start=2.0, segments=data["segments"][2:],
                initial_state={"kind": "file", "path": "snaps/snapshot_t2.csv"})
    rest["outputs"] = dict(data["outputs"], snapshot_times=[4.0], report="rest.csv")
    path = tmp_path / "rest.json"
    path.write_text(json.dumps(rest))
    assert main(["run", str(path), "--snapshot-dir", str(tmp_path / "rest")]) == 0
    a = read_snapshot(tmp_path / "snaps" / "snapshot_t4.csv")
    b = read_snapshot(tmp_path / "rest" / "snapshot_t4.csv")
    assert np.max(np.abs(a.amplitudes - b.amplitudes)) < 1e-12


def test_loader_resolves_relative_paths(tmp_path):
    spec, base = load_runspec(_spec(tmp_path, "capture_release.json"))
    assert base == tmp_path
    assert spec.schedule().t_end == pytest.approx(4.0)


def test_console_script_entry(tmp_path):
    exe = shutil.which("qatchain")
    cmd = [exe] if exe else [sys.executable, "-m", "qatchain.cli"]
    out = subprocess.run(cmd + ["run", str(_spec(tmp_path, "capture_release.json"))],
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
