import json
import math

import pytest

from qcalc.cli import main, parse_unit
from qcalc.quaternion import E1, E2


def strip_ms(report: dict) -> dict:
    out = json.loads(json.dumps(report))
    for check in out["checks"]:
        check["ms"] = 0.0
    return out


class TestGenerate:
    def test_deterministic_files(self, tmp_path, capsys):
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        assert main(["generate", "--dim", "8", "--seed", "42",
                     "--out", str(a)]) == 0
        assert main(["generate", "--dim", "8", "--seed", "42",
                     "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_stdout_and_annulus(self, capsys):
        assert main(["generate", "--dim", "2", "--seed", "1",
                     "--annulus", "1,1"]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "2"

    def test_infeasible_spec(self, capsys):
        assert main(["generate", "--dim", "2", "--omega", "3.5"]) == 2
        assert main(["generate", "--dim", "2", "--annulus", "0,1"]) == 2


class TestRun:
    def test_identities_suite_passes(self, tmp_path, capsys):
        code = main(["run", "identities", "--dim", "3", "--seed", "5",
                     "--pairs", "10", "--report", str(tmp_path)])
        assert code == 0
        data = json.loads((tmp_path / "identities_report.json").read_text())
        assert data["version"] == "1"
        assert data["suite"] == "identities"
        assert data["operator"]["dim"] == 3
        assert {"tag", "residual", "tol", "pass", "ms"} <= set(data["checks"][0])
        assert all(c["pass"] for c in data["checks"])
        csv_text = (tmp_path / "identities_report.csv").read_text()
        assert csv_text.splitlines()[0] == "suite,tag,residual,tol,pass"
        assert len(csv_text.splitlines()) == len(data["checks"]) + 1

    def test_report_deterministic_modulo_timing(self, tmp_path):
        d1, d2 = tmp_path / "r1", tmp_path / "r2"
        for d in (d1, d2):
            assert main(["run", "kernels", "--dim", "3", "--seed", "5",
                         "--report", str(d)]) == 0
        a = strip_ms(json.loads((d1 / "kernels_report.json").read_text()))
        b = strip_ms(json.loads((d2 / "kernels_report.json").read_text()))
        assert a == b

    def test_operator_file_roundtrip(self, tmp_path):
        op_file = tmp_path / "op.txt"
        assert main(["generate", "--dim", "3", "--seed", "5",
                     "--out", str(op_file)]) == 0
        assert main(["run", "kernels", "--dim", "3", "--seed", "5",
                     "--operator", str(op_file)]) == 0

    def test_malformed_operator_file(self, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("not an operator")
        assert main(["run", "kernels", "--operator", str(bad)]) == 2

    def test_parallel_matches_serial(self, tmp_path):
        d1, d2 = tmp_path / "serial", tmp_path / "par"
        assert main(["run", "identities", "--dim", "3", "--seed", "5",
                     "--pairs", "8", "--report", str(d1)]) == 0
        assert main(["run", "identities", "--dim", "3", "--seed", "5",
                     "--pairs", "8", "--report", str(d2), "--parallel"]) == 0
        a = strip_ms(json.loads((d1 / "identities_report.json").read_text()))
        b = strip_ms(json.loads((d2 / "identities_report.json").read_text()))
        a["env"]["parallel"] = b["env"]["parallel"] = None
        assert a == b


class TestConfig:
    def test_config_sections_and_override(self, tmp_path):
        cfg = tmp_path / "qcalc.ini"
        cfg.write_text("""[operator]
dim = 3
seed = 9
annulus = 0.6, 1.8
omega = 0.7853981633974483

[quadrature]
tol = 1e-8
units = e1, e2

[suites]
pairs = 6
""")
        report_dir = tmp_path / "rep"
        assert main(["run", "identities", "--config", str(cfg),
                     "--report", str(report_dir)]) == 0
        data = json.loads((report_dir / "identities_report.json").read_text())
        assert data["operator"]["dim"] == 3
        assert data["operator"]["seed"] == 9
        assert data["env"]["pairs"] == 6
        assert data["env"]["tol"] == 1e-8
        # flag overrides file
        assert main(["run", "identities", "--config", str(cfg), "--dim", "2",
                     "--report", str(report_dir)]) == 0
        data = json.loads((report_dir / "identities_report.json").read_text())
        assert data["operator"]["dim"] == 2

    def test_missing_config(self):
        assert main(["run", "identities", "--config", "/nonexistent.ini"]) == 2


class TestUnits:
    def test_named_units(self):
        assert parse_unit("e1").isclose(E1)
        assert parse_unit("e2").isclose(E2)
        v = parse_unit("e12")
        assert math.isclose(v.norm(), 1.0, rel_tol=1e-12)
        assert math.isclose(v.s1, 1.0 / math.sqrt(2.0), rel_tol=1e-12)

    def test_component_units(self):
        v = parse_unit("1:1:0")
        assert math.isclose(v.norm(), 1.0, rel_tol=1e-12)

    def test_bad_units(self):
        with pytest.raises(ValueError):
            parse_unit("q7")
        with pytest.raises(ValueError):
            parse_unit("0:0:0")
