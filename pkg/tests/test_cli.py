import json
import math

import numpy as np
import pytest

from pam1d.cli import main


ATOM_SPEC = ('{"gamma":0.0,"upper":{"atom_p":0.5},"mix_q":0.2,'
             '"lower":{"pareto_zeta":1.0}}')


@pytest.fixture
def spec_file(tmp_path):
    p = tmp_path / "spec.json"
    p.write_text(ATOM_SPEC)
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestExitCodes:
    def test_unknown_subcommand(self, capsys):
        code, _, err = run(capsys, "bogus")
        assert code == 2

    def test_missing_spec_names_flag(self, capsys):
        code, _, err = run(capsys, "solve", "--t", "5")
        assert code == 2
        assert "--spec" in err

    def test_bad_spec_json(self, capsys, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"gamma": 0.0}')
        code, _, err = run(capsys, "solve", "--spec", str(p), "--t", "5")
        assert code == 2

    def test_bad_grid(self, capsys, spec_file):
        code, _, err = run(capsys, "scales", "--spec", spec_file,
                           "--t-grid", "nope")
        assert code == 2

    def test_numerical_failure(self, capsys, spec_file):
        # force the adaptive solver cap with an out-of-reach horizon
        code, _, err = run(capsys, "solve", "--spec", spec_file,
                           "--t", "500", "--r-cap", "8")
        assert code == 3
        assert "numerical" in err

    def test_success(self, capsys, spec_file):
        code, _, _ = run(capsys, "h", "--spec", spec_file,
                         "--l-grid", "1:10:geometric:2", "--deterministic")
        assert code == 0


class TestScales:
    def test_header_and_row_count(self, capsys, spec_file):
        code, out, _ = run(capsys, "scales", "--spec", spec_file,
                           "--t-grid", "1e3:1e9:geometric:8",
                           "--deterministic")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].strip() == "t,G,alpha_bt_sq,b_t,b_star,r_t,gamma_t"
        assert len(lines) == 9

    def test_timestamp_header_suppression(self, capsys, spec_file):
        _, with_ts, _ = run(capsys, "scales", "--spec", spec_file,
                            "--t-grid", "1e3:1e6:geometric:2")
        assert with_ts.startswith("# generated ")
        _, without, _ = run(capsys, "scales", "--spec", spec_file,
                            "--t-grid", "1e3:1e6:geometric:2",
                            "--deterministic")
        assert without.startswith("t,")


class TestSolve:
    def test_json_schema(self, capsys, spec_file):
        code, out, _ = run(capsys, "solve", "--spec", spec_file, "--seed", "1",
                           "--t", "5", "--deterministic")
        assert code == 0
        obj = json.loads(out)
        assert list(obj) == ["u", "log_u", "R", "lambda", "clamped_sites"]
        assert obj["u"] == pytest.approx(math.exp(obj["log_u"]))
        assert obj["log_u"] <= 0.0


class TestFkAndLbound:
    def test_fk_schema(self, capsys, spec_file):
        code, out, _ = run(capsys, "fk", "--spec", spec_file, "--seed", "1",
                           "--t", "2", "--samples", "2000", "--box", "25",
                           "--deterministic")
        assert code == 0
        obj = json.loads(out)
        assert list(obj) == ["mean", "stderr", "exit_fraction"]
        assert 0.0 < obj["mean"] <= 1.0

    def test_lbound_schema(self, capsys, spec_file):
        code, out, _ = run(capsys, "lbound", "--spec", spec_file,
                           "--t", "5", "--radius", "5", "--deterministic")
        assert code == 0
        obj = json.loads(out)
        assert list(obj) == ["log_lb", "y_star"]
        assert obj["log_lb"] <= 0.0


class TestChiAndLegendre:
    def test_chi_gamma0_closed_form(self, capsys):
        code, out, _ = run(capsys, "chi", "--gamma", "0",
                           "--A", "0.693147", "--kappa", "1",
                           "--deterministic")
        assert code == 0
        obj = json.loads(out)
        target = math.pi ** 2 * math.log(2.0) ** 2
        assert abs(obj["chi_tilde"] - target) < 0.01 * target
        assert list(obj) == ["chi_tilde", "R_star", "psi_grid",
                             "constraint_value", "flags"]

    def test_legendre_constant_profile(self, capsys):
        code, out, _ = run(capsys, "legendre", "--gamma", "0", "--A", "2.0",
                           "--R", "1.0", "--depth", "0.5", "--deterministic")
        assert code == 0
        obj = json.loads(out)
        # gamma = 0 budget: A * measure of the support (interior nodes)
        assert obj["legendre_l"] == pytest.approx(2.0 * 2.0 * 101 / 102)


class TestDeterminism:
    def test_byte_identical_outputs(self, capsys, spec_file, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            code = main(["scales", "--spec", spec_file,
                         "--t-grid", "1e3:1e6:geometric:4",
                         "--deterministic", "--out", str(path)])
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_fk_deterministic(self, capsys, spec_file, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for path in (a, b):
            code = main(["fk", "--spec", spec_file, "--seed", "3", "--t", "2",
                         "--samples", "1000", "--box", "20",
                         "--deterministic", "--out", str(path)])
            assert code == 0
        assert a.read_bytes() == b.read_bytes()


class TestTables:
    def test_json_format_table(self, capsys, spec_file):
        code, out, _ = run(capsys, "g", "--spec", spec_file,
                           "--l-grid", "1:100:geometric:3",
                           "--format", "json", "--deterministic")
        assert code == 0
        obj = json.loads(out)
        assert list(obj) == ["l", "G"]
        assert len(obj["l"]) == 3

    def test_field_csv(self, capsys, spec_file):
        code, out, _ = run(capsys, "field", "--spec", spec_file,
                           "--lo", "-2", "--hi", "2", "--deterministic")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].strip() == "x,heavy,value"
        assert len(lines) == 6

    def test_verify_lln_csv(self, capsys, spec_file):
        code, out, _ = run(capsys, "verify-lln", "--spec", spec_file,
                           "--n-grid", "100:1000:geometric:2",
                           "--seeds", "5", "--deterministic")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].strip() == "n,median,frac_gt_1,frac_gt_10"
        assert len(lines) == 3
