import json
import subprocess
import sys

import pytest

from corpus import index_pair_sources
from morseflow import cli, pipeline
from morseflow.errors import BoundarySquareNonzero
from morseflow.isolate import assemble_ball


@pytest.fixture
def fields(tmp_path):
    def write(name, expr, dim):
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps({"dim": dim, "expr": expr, "label": name}))
        return str(p)

    out = {}
    for n in (2, 3):
        f, g = index_pair_sources(n)
        out[f"f{n}"] = write(f"f{n}", f, n)
        out[f"g{n}"] = write(f"g{n}", g, n)
    out["well"] = write("well", "(x1^2 - 1)^2 + x2^2", 2)
    out["zero"] = write("zero", "0", 2)
    out["flat"] = write("flat", "x1^4 + x2^2", 2)
    return out


def _run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_critical_points(capsys, fields):
    code, out, _ = _run(capsys, "critical-points", fields["f2"])
    doc = json.loads(out)
    assert code == 0
    assert [c["x"] for c in doc["critical_points"]] == [[0.0, 0.0]]
    assert doc["critical_points"][0]["index"] == 0 and doc["degree"] == 1

    code, out, _ = _run(capsys, "critical-points", fields["well"], "--format", "text")
    assert code == 0
    rows = [line for line in out.splitlines()[2:] if line.strip()]
    assert len(rows) == 3
    assert "(0, 0)" in out and "(1, 0)" in out and "(-1, 0)" in out


def test_zero_field_exit_3(capsys, fields):
    code, _, err = _run(capsys, "critical-points", fields["zero"])
    assert code == 3 and "R1NotFound" in err


def test_degenerate_exit_2(capsys, fields):
    code, _, err = _run(capsys, "critical-points", fields["flat"])
    assert code == 2 and "DegenerateCriticalPoint" in err


def test_isolation_violation_exit_4(capsys, fields, monkeypatch):
    monkeypatch.setattr(pipeline, "compute_ball", lambda target, settings: assemble_ball(0.2, 0.2))
    code, _, err = _run(capsys, "morse", fields["well"])
    assert code == 4 and "IsolationViolation" in err


def test_boundary_square_exit_5(capsys, fields, monkeypatch):
    def boom(*args, **kwargs):
        raise BoundarySquareNonzero("forced", chain=[])
    monkeypatch.setattr(pipeline.morse, "build_complex", boom)
    code, _, _ = _run(capsys, "morse", fields["well"])
    assert code == 5


def test_io_errors_exit_1(capsys, fields, tmp_path):
    assert _run(capsys, "morse", tmp_path / "missing.json")[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(capsys, "morse", bad)[0] == 1
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"newton_tol": 1e-9, "colour": 1}))
    assert _run(capsys, "morse", fields["f2"], "--config", cfg)[0] == 1
    assert _run(capsys, "morse", fields["f2"], "--tol-newton", "-1")[0] == 1


@pytest.mark.parametrize("name, betti", [("g3", [0, 0, 1, 0]), ("f3", [1, 0, 0, 0]), ("well", [1, 0, 0])])
def test_morse(capsys, fields, name, betti):
    code, out, _ = _run(capsys, "morse", fields[name])
    doc = json.loads(out)
    assert code == 0 and doc["betti"] == betti and doc["degree"] == 1 == doc["euler"]


def test_compare_verdicts(capsys, fields):
    doc = json.loads(_run(capsys, "compare", fields["f2"], fields["g2"])[1])
    assert (doc["proper_homotopic"], doc["gradient_obstruction"]) == (True, True)
    code, out, _ = _run(capsys, "compare", fields["f2"], fields["f2"])
    doc = json.loads(out)
    assert code == 0
    assert (doc["proper_homotopic"], doc["gradient_obstruction"], doc["conclusion"]) == (True, False, "inconclusive")
    doc = json.loads(_run(capsys, "compare", fields["f2"], fields["well"])[1])
    assert (doc["proper_homotopic"], doc["gradient_obstruction"], doc["conclusion"]) == (True, False, "inconclusive")
    code, out, _ = _run(capsys, "compare", fields["f2"], fields["g2"], "--format", "text")
    assert "gradient_obstruction = true" in out


def test_compare_dimension_mismatch(capsys, fields):
    assert _run(capsys, "compare", fields["f2"], fields["g3"])[0] == 1


def test_trace(capsys, fields, tmp_path):
    code, out, _ = _run(capsys, "trace", fields["f2"], "--x0", "1,0", "--sign", "-1")
    assert code == 0 and out.splitlines()[0] == "t,x1,x2" and out.splitlines()[-1] == "# terminal=converged(0)"
    code, out, _ = _run(capsys, "trace", fields["f2"], "--x0", "1,0", "--sign", "1")
    assert out.splitlines()[-1] == "# terminal=escaped"
    code, out, _ = _run(capsys, "trace", fields["well"], "--x0", "0.01,0.5", "--out", tmp_path / "o")
    last = [float(v) for v in out.splitlines()[-2].split(",")]
    assert abs(last[1] - 1.0) < 1e-4 and abs(last[2]) < 1e-4
    assert (tmp_path / "o" / "well.trace.csv").read_text() == out
    assert _run(capsys, "trace", fields["f2"], "--x0", "1,0,0")[0] == 1


def test_screen(capsys, fields):
    doc = json.loads(_run(capsys, "screen", fields["f2"], "--radii", "1,2,4,8")[1])
    assert doc["verdict"] == "pass" and doc["minima"] == pytest.approx([2, 4, 8, 16])
    assert json.loads(_run(capsys, "screen", fields["zero"])[1])["verdict"] == "warn"


def test_radius(capsys, fields):
    doc = json.loads(_run(capsys, "radius", fields["f2"])[1])
    assert (doc["r1"], doc["verdict"]) == (0.5, "pass")
    assert doc["R"] == 2 * (doc["r1"] + doc["r2"])
    assert _run(capsys, "radius", fields["f3"], fields["g3"])[0] == 3  # the family degenerates at 1/2


def test_reports_byte_identical(capsys, fields, tmp_path):
    for run in ("a", "b"):
        assert _run(capsys, "morse", fields["well"], "--out", tmp_path / run)[0] == 0
        assert _run(capsys, "compare", fields["f2"], fields["g2"], "--out", tmp_path / run)[0] == 0
    for name in ("well.morse.json", "well.morse.txt", "f2__g2.compare.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert not list((tmp_path / "a").glob(".*tmp"))


def test_overrides_round_trip(capsys, fields, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"degeneracy_tol": 1e-7}))
    _, out, _ = _run(capsys, "morse", fields["well"], "--tol-newton", "1e-11", "--tol-step", "5e-10",
                     "--capture", "5e-5", "--resolution", "32", "--grid-density", "41", "--sphere-samples", "100",
                     "--seed", "7", "--config", cfg)
    s = json.loads(out)["provenance"]["settings"]
    assert s == {**s, "newton_tol": 1e-11, "degeneracy_tol": 1e-7, "step_tol": 5e-10, "capture_radius": 5e-5,
                 "resolution": 32, "grid_density": 41, "samples_per_sphere": 100, "seed": 7}


def test_default_seed_in_provenance(capsys, fields):
    assert json.loads(_run(capsys, "morse", fields["f2"])[1])["provenance"]["settings"]["seed"] == 42


def test_run_config_validation():
    with pytest.raises(ValueError):
        cli.RunConfig("morse", ["x.json"], {"newton_tol": 0.0})
    with pytest.raises(ValueError):
        cli.RunConfig("morse", ["x.json"], {"bogus": 1})
    with pytest.raises(ValueError):
        cli.RunConfig.from_mapping({"command": "morse", "inputs": [], "typo": 1})
    cfg = cli.RunConfig.from_mapping({"command": "morse", "inputs": ["x.json"], "step_tol": 1e-8})
    assert cfg.settings().step_tol == 1e-8 and cfg.settings().seed == 42


def test_help_documents_defaults(capsys):
    with pytest.raises(SystemExit):
        cli.main(["morse", "--help"])
    out = " ".join(capsys.readouterr().out.split())
    for fragment in ("default 1e-10", "default 1e-08", "default 1e-09", "default 0.0001", "default 64", "default 42",
                     "64*dim^2", "default json"):
        assert fragment in out


def test_module_entry_point(fields):
    proc = subprocess.run([sys.executable, "-m", "morseflow", "critical-points", fields["zero"]],
                          capture_output=True, text=True)
    assert proc.returncode == 3
