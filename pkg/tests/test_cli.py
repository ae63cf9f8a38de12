import csv
import json
import subprocess
import sys

import pytest

from pdmho.cli import DEFAULT_TOLERANCES, REPORT_SCHEMA, RunConfig, limit_slopes, main
from pdmho.model import DomainError, Radial
from pdmho.repalg import constant_mass_limit


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


def data_rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def test_spectrum_reference(capsys):
    code, out = run(["spectrum", "--nmax", "2"], capsys)
    assert code == 0
    rows = data_rows(out)
    assert [float(r["E_closed"]) for r in rows] == [15.0, 55.0, 119.0]
    assert out.startswith("# ")


def test_spectrum_line_merged(capsys):
    code, out = run(["spectrum", "--alpha", "1", "--omega", str(8**0.5), "--sector", "line", "--nmax", "3"], capsys)
    assert code == 0
    assert [float(r["E_closed"]) for r in data_rows(out)] == pytest.approx([2, 7, 14, 23], rel=1e-14)


def test_spectrum_with_oracle(capsys):
    code, out = run(["spectrum", "--nmax", "1", "--oracle"], capsys)
    rows = data_rows(out)
    assert code == 0 and "E_oracle" in rows[0]
    for r in rows:
        assert float(r["E_oracle"]) == pytest.approx(float(r["E_closed"]), rel=1e-6)


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--alpha", "0"],
        ["spectrum", "--omega", "-1"],
        ["spectrum", "--sector", "radial:1,0"],
        ["verify", "--sector", "line"],
        ["verify", "--tol", "bogus=1e-3"],
        ["verify", "--tol", "eigen"],
        [],
    ],
)
def test_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"params": {"alpha": 3, "omega": 4, "sector": "radial:3,0"}, "colour": "red"}))
    with pytest.raises(SystemExit):
        main(["spectrum", "--config", str(cfg)])
    assert "colour" in capsys.readouterr().err


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "model.json"
    cfg.write_text(json.dumps({"alpha": 1.0, "omega": 8**0.5, "sector": "line:odd"}))
    code, out = run(["spectrum", "--config", str(cfg), "--nmax", "1"], capsys)
    assert [float(r["E_closed"]) for r in data_rows(out)] == pytest.approx([7.0, 23.0])


def test_runconfig_validation():
    with pytest.raises(DomainError):
        RunConfig(tolerances={"eigen": -1.0})
    with pytest.raises(DomainError):
        RunConfig.from_dict({"grid": {"n": 100, "spacing": 2}})
    cfg = RunConfig.from_dict({"params": {"alpha": 2, "omega": 1, "sector": "line:even"}, "grid": {"n": 501}})
    assert cfg.grid_n == 501 and cfg.alpha == 2.0


def test_verify_default_passes(tmp_path):
    out = tmp_path / "report.json"
    assert main(["verify", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["schema"] == REPORT_SCHEMA
    assert doc["passed"] and doc["failed_suites"] == []
    assert set(doc["tolerances"]) == set(DEFAULT_TOLERANCES)
    suites = {e["suite"] for e in doc["entries"]}
    assert {"commutators", "casimir_eigen", "tower", "oracle", "deformed_closed"} <= suites
    assert all("relative" in e and "identity" in e for e in doc["entries"])


def test_verify_line_passes(tmp_path):
    out = tmp_path / "report.json"
    argv = ["verify", "--alpha", "1", "--omega", str(8**0.5), "--sector", "line:odd", "--out", str(out)]
    assert main(argv) == 0


@pytest.mark.filterwarnings("ignore::pdmho.ladder.LadderAccuracyWarning")
def test_verify_coarse_grid_fails(tmp_path):
    out = tmp_path / "report.json"
    assert main(["verify", "--grid-n", "101", "--out", str(out)]) == 1
    doc = json.loads(out.read_text())
    assert not doc["passed"]
    assert "commutators" in doc["failed_suites"]
    failed = [e for e in doc["entries"] if not e["passed"]]
    assert all(e["relative"] > e["tolerance"] for e in failed)


def test_limit_csv(capsys):
    code, out = run(["limit", "--omega", "1.5", "--sector", "radial:3,1", "--nmax", "2"], capsys)
    assert code == 0
    header = json.loads(out.splitlines()[0][2:])["params"]
    assert header["omega"] == 1.5 and header["n_max"] == 2
    assert header["sector"] == {"d": 3, "l": 1, "type": "radial"}
    assert len(header["alphas"]) == 11
    rows = data_rows(out)
    assert list(rows[0]) == ["alpha", "n", "E", "E_limit", "dE", "Kp", "Kp_limit", "dKp"]
    assert len(rows) == 11 * 3


def test_limit_slopes():
    rows = constant_mass_limit(1.0, Radial(3, 0), [10.0 ** (-j / 2) for j in range(2, 11)], 3)
    slopes = limit_slopes(rows)
    for key in ("E", "K+"):
        assert all(abs(s - 1.0) <= 0.05 for s in slopes[key])


def test_limit_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["limit", "--out", str(a)])
    main(["limit", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_wavefunction(capsys):
    code, out = run(["wavefunction", "--nmax", "1", "--grid-n", "201"], capsys)
    assert code == 0
    rows = data_rows(out)
    assert len(rows[0]) == 2 + 2
    psi0 = [float(r["psi_0"]) for r in rows]
    psi1 = [float(r["psi_1"]) for r in rows]
    assert all(v > 0 for v in psi0)
    signs = [v > 0 for v in psi1 if abs(v) > 1e-300]
    assert sum(x != y for x, y in zip(signs, signs[1:])) == 1


def test_irrep_json(capsys):
    code, out = run(["irrep", "--nmax", "4"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["qj3"]["C2"] == pytest.approx(80.0)
    assert doc["deformed_casimir"] == pytest.approx(-3 / 64)


def test_oracle_compare_flagged(capsys):
    code = main(["oracle-compare", "--sector", "radial:2,0"])
    captured = capsys.readouterr()
    assert code == 0
    assert "not certified" in captured.err
    assert captured.out.splitlines()[1] == "n,E_closed,E_h,E_h2,E_extrap,rel_err,overlap"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pdmho", "spectrum", "--nmax", "0"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[-1].startswith("0,15")
    proc = subprocess.run([sys.executable, "-m", "pdmho"], capture_output=True, text=True)
    assert proc.returncode == 2
