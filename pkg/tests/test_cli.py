"""Tests for the command-line entry point: parsing, outputs, exit codes."""

import io
import json
import re

import pytest

from pillowcase.cli import (EXIT_INTERNAL, EXIT_OK, EXIT_USAGE, main)


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def strip_stamp(text):
    return re.sub(r"(generated[:\"]+\s*)[0-9TZ:.-]+", r"\1", text)


class TestUsage:
    def test_no_subcommand(self):
        code, _, err = run_cli([])
        assert code == EXIT_USAGE
        assert "usage error" in err

    def test_unknown_curve(self):
        code, _, err = run_cli(["intersections", "--curves", "gamma9"])
        assert code == EXIT_USAGE
        assert "gamma9" in err

    def test_non_dyadic_shear(self):
        code, _, err = run_cli(["density-field", "--s", "1/3"])
        assert code == EXIT_USAGE
        assert "dyadic" in err

    def test_level_out_of_range(self):
        code, _, err = run_cli(["density-field", "--level", "9"])
        assert code == EXIT_USAGE
        assert "[2, 8]" in err

    def test_certificate_needs_nu_witness(self):
        code, _, err = run_cli(["certificate", "--s-pair", "0,1",
                                "--witness", "eta"])
        assert code == EXIT_USAGE
        assert "nu" in err


class TestIntersections:
    def test_table_values(self):
        code, out, _ = run_cli(["intersections"])
        assert code == EXIT_OK
        lines = [l for l in out.splitlines() if not l.startswith("#")]
        assert lines[0] == "gamma,delta,i"
        table = {tuple(l.split(",")[:2]): l.split(",")[2] for l in lines[1:]}
        assert table[("eta", "alpha")] == "2"
        assert table[("nu", "beta")] == "2"
        assert table[("alpha", "beta")] == "0"

    def test_twist_sandwich_columns(self):
        code, out, _ = run_cli(["intersections", "--twist", "5"])
        assert code == EXIT_OK
        lines = [l for l in out.splitlines() if not l.startswith("#")]
        assert lines[0] == "gamma,delta,n,lower,actual,upper"
        for line in lines[1:]:
            _, _, n, lo, actual, hi = line.split(",")
            assert int(lo) <= int(actual) <= int(hi)
            assert n == "5"

    def test_twist_zero_brackets_plain_intersection(self):
        code, out, _ = run_cli(["intersections", "--twist", "0",
                                "--curves", "eta,alpha"])
        assert code == EXIT_OK
        lines = [l for l in out.splitlines() if not l.startswith("#")]
        row = dict(zip(lines[0].split(","), lines[1].split(",")))
        assert row["actual"] == "0" or int(row["lower"]) <= \
            int(row["actual"]) <= int(row["upper"])

    def test_determinism_modulo_timestamp(self):
        _, out1, _ = run_cli(["intersections"])
        _, out2, _ = run_cli(["intersections"])
        assert strip_stamp(out1) == strip_stamp(out2)


class TestConfigFile:
    def test_file_sets_values_and_flags_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("curves=eta,alpha\ntwist=2  # comment\n")
        code, out, _ = run_cli(["intersections", "--config", str(cfg)])
        assert code == EXIT_OK
        assert "config twist=2" in out
        code, out, _ = run_cli(["intersections", "--config", str(cfg),
                                "--twist", "3"])
        assert "config twist=3" in out

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("frobnicate=1\n")
        code, _, err = run_cli(["intersections", "--config", str(cfg)])
        assert code == EXIT_USAGE
        assert "frobnicate" in err

    def test_malformed_line_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("just a line\n")
        code, _, err = run_cli(["intersections", "--config", str(cfg)])
        assert code == EXIT_USAGE


class TestOutputs:
    def test_config_and_version_echoed(self):
        from pillowcase import __version__
        _, out, _ = run_cli(["intersections", "--curves", "alpha,beta"])
        assert f"# config version={__version__}" in out
        assert "# config curves=alpha,beta" in out
        assert "# config command=intersections" in out

    def test_output_file(self, tmp_path):
        path = tmp_path / "table.csv"
        code, out, _ = run_cli(["intersections", "--output", str(path)])
        assert code == EXIT_OK
        assert out == ""
        text = path.read_text()
        assert "gamma,delta,i" in text

    def test_density_field_rectangle_like_header(self):
        code, out, _ = run_cli(["density-field", "--level", "2",
                                "--s", "0", "--target", "alpha"])
        assert code == EXIT_OK
        lines = [l for l in out.splitlines() if not l.startswith("#")]
        assert lines[0] == "x,y,rho"
        cells = lines[1].split(",")
        assert len(cells) == 3
        float(cells[0]), float(cells[1]), float(cells[2])

    def test_density_field_sorted_rows_deterministic(self):
        _, out1, _ = run_cli(["density-field", "--level", "2"])
        _, out2, _ = run_cli(["density-field", "--level", "2"])
        assert strip_stamp(out1) == strip_stamp(out2)


class TestStubbedSolverCommands:
    """Plumbing checks for solver-backed subcommands with stub backends."""

    def test_horosphere_exit_codes(self, monkeypatch):
        def fake(s_values, tolerance, evaluator):
            return {"values": {}, "max_deviation": 0.001,
                    "tolerance": tolerance, "passed": True}
        monkeypatch.setattr("pillowcase.cli.horosphere_check", fake)
        code, out, _ = run_cli(["horosphere", "--s-values", "0,1/4"])
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["horosphere"]["passed"] is True

        def fail(s_values, tolerance, evaluator):
            return {"values": {}, "max_deviation": 0.5,
                    "tolerance": tolerance, "passed": False}
        monkeypatch.setattr("pillowcase.cli.horosphere_check", fail)
        code, _, _ = run_cli(["horosphere"])
        assert code == EXIT_INTERNAL

    def test_twist_table_json(self, monkeypatch):
        def fake(gamma, s, n_max, evaluator):
            return [{"n": n} for n in range(1, n_max + 1)]
        monkeypatch.setattr("pillowcase.cli.twist_convergence_table", fake)
        code, out, _ = run_cli(["twist-table", "--gamma", "eta",
                                "--n-max", "3"])
        assert code == EXIT_OK
        doc = json.loads(out)
        assert [r["n"] for r in doc["table"]] == [1, 2, 3]
        assert doc["gamma"] == "eta"

    def test_twist_table_n_max_bounds(self):
        code, _, err = run_cli(["twist-table", "--n-max", "9"])
        assert code == EXIT_USAGE

    def test_kerckhoff_json(self, monkeypatch):
        monkeypatch.setattr("pillowcase.cli.kerckhoff_lower_bound",
                            lambda s1, s2, witness, ev: 0.25)
        code, out, _ = run_cli(["kerckhoff", "--s-pair", "0,1/2"])
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["distance_lower_bound"] == 0.25
        assert doc["s_pair"] == ["0", "1/2"]

    def test_ext_alpha_failure_row_preserved(self, monkeypatch):
        from pillowcase.errors import IterationBudgetExceeded

        def fake(s, target, opts):
            if s != 0:
                raise IterationBudgetExceeded("boom")

            class R:
                value, error = 0.8, 0.001
                levels = [2, 3]

                @property
                def interval(self):
                    return (0.799, 0.801)
            return R()

        monkeypatch.setattr("pillowcase.cli.extremal_length", fake)
        code, out, _ = run_cli(["ext-alpha", "--s-values", "0,1/8"])
        assert code == EXIT_INTERNAL
        lines = [l for l in out.splitlines() if not l.startswith("#")]
        assert any("FAILED" in l for l in lines)
        assert any(l.startswith("0,") and "0.8" in l for l in lines)


class TestCertificateJson:
    def test_periodic_pair_is_indistinguishable(self):
        # s and s+1 give the same marked surface, so no budget can
        # separate them; exercised at the cheapest levels.
        code, out, _ = run_cli(["certificate", "--s-pair", "0,1",
                                "--level-min", "2", "--level-max", "2"])
        assert code == 2
        doc = json.loads(out)
        assert doc["certificate"]["verdict"] == "indistinguishable"
        assert doc["config"]["command"] == "certificate"
        assert list(doc) == sorted(doc)
