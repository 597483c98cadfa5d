import csv
import json
import math

import numpy as np
import pytest

from rice_delta import cli
from rice_delta.distributions import RiceParams, rice_pdf

UNIT = RiceParams(1.0, 1.0)


def run_cli(tmp_path, name, *argv):
    out = tmp_path / name
    code = cli.main([*argv, "-o", str(out)])
    return code, out


def table(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith(cli.CONFIG_PREFIX)
    rows = list(csv.reader(lines[1:]))
    return rows[0], rows[1:]


def column(path, name):
    header, rows = table(path)
    i = header.index(name)
    return [float(r[i]) if r[i] else None for r in rows]


class TestCommands:
    def test_pdf_grid_layout(self, tmp_path):
        code, out = run_cli(tmp_path, "g.csv", "pdf-grid", "--rho", "0.5", "--x", "0:6:16", "--y", "0:3:8")
        assert code == 0
        header, rows = table(out)
        assert len(header) == 9 and len(rows) == 16
        assert float(header[1]) == 0.0 and float(header[-1]) == 3.0
        assert float(rows[0][0]) == 0.0 and float(rows[-1][0]) == 6.0

    @pytest.mark.xfail(strict=True, reason="trapezoid endpoint error at x=0 is about 1.1e-3 on a 64-point grid")
    def test_pdf_grid_trapezoid_mass(self, tmp_path):
        code, out = run_cli(tmp_path, "g.csv", "pdf-grid", "--K", "1", "--beta", "1", "--rho", "0.5",
                            "--x", "0:6:64", "--y", "0:6:64")
        assert code == 0
        header, rows = table(out)
        y = np.array([float(v) for v in header[1:]])
        x = np.array([float(r[0]) for r in rows])
        f = np.array([[float(v) for v in r[1:]] for r in rows])
        assert abs(np.trapezoid(np.trapezoid(f, y, axis=1), x) - 1) < 1e-4

    def test_pdf_grid_trapezoid_deficit_is_endpoint_term(self, tmp_path):
        code, out = run_cli(tmp_path, "g.csv", "pdf-grid", "--rho", "0.5")
        header, rows = table(out)
        y = np.array([float(v) for v in header[1:]])
        x = np.array([float(r[0]) for r in rows])
        f = np.array([[float(v) for v in r[1:]] for r in rows])
        mass = np.trapezoid(np.trapezoid(f, y, axis=1), x)
        h = x[1] - x[0]
        # leading Euler-Maclaurin term from both axes, f_X'(0) = 2/e for K = beta = 1
        predicted = 1 - 2 * h * h / 12 * (2 / math.e)
        assert mass == pytest.approx(predicted, abs=2e-5)

    def test_pdf_grid_rejects_unity(self, tmp_path, capsys):
        code, out = run_cli(tmp_path, "g.csv", "pdf-grid", "--rho", "1")
        assert code == cli.EXIT_CONFIG
        assert "limit-scan" in capsys.readouterr().err
        assert not out.exists()

    def test_marginal(self, tmp_path):
        code, out = run_cli(tmp_path, "m.csv", "marginal", "--x", "0:4:9")
        assert code == 0
        pdf = column(out, "pdf")
        assert pdf[2] == pytest.approx(rice_pdf(UNIT, 1.0), rel=1e-14)
        cdf = column(out, "cdf")
        assert cdf[0] == 0.0 and all(a < b for a, b in zip(cdf, cdf[1:]))

    def test_limit_scan(self, tmp_path):
        code, out = run_cli(tmp_path, "l.csv", "limit-scan", "--x0", "1")
        assert code == 0
        mass = column(out, "mass_in_window")
        assert all(a < b for a, b in zip(mass, mass[1:])) and mass[-1] > 0.999
        assert abs(column(out, "peak_rel_error")[-1]) < 0.01

    def test_delta_demo(self, tmp_path):
        code, out = run_cli(tmp_path, "d.csv", "delta-demo", "--eps", "1,0.1,0.01")
        assert code == 0
        header, rows = table(out)
        integrals = [float(r[header.index("integral")]) for r in rows if r[0] == "nascent"]
        assert len(integrals) == 3
        assert all(abs(v - 1) < 1e-10 for v in integrals)
        limit = [r for r in rows if r[0] == "limit"][0]
        assert float(limit[header.index("weight")]) == pytest.approx(float(limit[header.index("reference")]), rel=1e-12)

    def test_sample(self, tmp_path):
        code, out = run_cli(tmp_path, "s.csv", "sample", "--rho", "1", "--n", "200", "--seed", "3")
        assert code == 0
        header, rows = table(out)
        assert header == ["x", "y"] and len(rows) == 200
        assert all(a == b for a, b in rows)

    def test_estimate(self, tmp_path):
        code, out = run_cli(tmp_path, "e.csv", "estimate", "--rho", "1", "--n", "1000")
        assert code == 0
        values = dict(table(out)[1])
        assert float(values["rho"]) == 1.0 and float(values["rho_c"]) == 1.0
        assert values["k"] == "+1"
        code, out = run_cli(tmp_path, "e2.csv", "estimate", "--rho", "0.5", "--n", "1000")
        assert dict(table(out)[1])["k"] == "n/a"

    def test_diversity(self, tmp_path):
        code, out = run_cli(tmp_path, "v.csv", "diversity", "--K", "1", "--beta", "1", "--rho", "0,0.5,0.9,1",
                            "--threshold-quantile", "0.5", "--n", "1000000")
        assert code == 0
        outage = column(out, "outage")
        assert outage[-1] == pytest.approx(0.5, abs=0.002)
        assert outage[0] == pytest.approx(0.25, abs=0.002)
        assert all(a <= b for a, b in zip(outage, outage[1:]))

    def test_stdout(self, capsys):
        assert cli.main(["marginal", "--x", "1:1:1"]) == 0
        assert capsys.readouterr().out.startswith(cli.CONFIG_PREFIX)


class TestErrors:
    @pytest.mark.parametrize("argv", [
        ["limit-scan", "--rho", "0.99,0.9"],
        ["diversity", "--rho", "0.5,1.5"],
        ["sample", "--rho", "0.2,0.3"],
        ["sample", "--n", "0"],
        ["marginal", "--tol", "-1"],
        ["marginal", "--K", "-1"],
        ["pdf-grid", "--x", "0:6"],
        ["delta-demo", "--eps", "0"],
    ])
    def test_config_errors(self, tmp_path, argv, capsys):
        code, _ = run_cli(tmp_path, "x.csv", *argv)
        assert code == cli.EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_numeric_failure(self, tmp_path, capsys):
        code, _ = run_cli(tmp_path, "x.csv", "pdf-grid", "--rho", "0.9", "--tol", "1e-300", "--x", "0:6:4", "--y", "0:6:4")
        assert code == cli.EXIT_NUMERIC
        assert "numerical failure" in capsys.readouterr().err

    def test_io_failure(self, tmp_path, capsys):
        code = cli.main(["marginal", "-o", str(tmp_path / "missing" / "m.csv")])
        assert code == cli.EXIT_IO
        assert cli.main(["rerun", str(tmp_path / "absent.csv")]) == cli.EXIT_IO

    def test_corrupt_artifact(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("# config: {\"command\": \"marginal\", \"bogus\": 1}\n")
        assert cli.main(["rerun", str(bad)]) == cli.EXIT_CONFIG


RERUN_CASES = [
    ["pdf-grid", "--rho", "0.3", "--x", "0:4:6", "--y", "0:4:5"],
    ["marginal", "--K", "2", "--x", "0:5:11"],
    ["limit-scan", "--rho", "0.9,0.99", "--x0", "0.5"],
    ["delta-demo", "--eps", "0.5,0.05"],
    ["sample", "--n", "500", "--seed", "12"],
    ["estimate", "--n", "2000", "--seed", "4", "--rho", "0.7"],
    ["diversity", "--n", "20000", "--threshold", "0.9"],
]


class TestDeterminism:
    @pytest.mark.parametrize("argv", RERUN_CASES, ids=lambda a: a[0])
    @pytest.mark.parametrize("fmt", ["csv", "json"])
    def test_rerun_byte_identical(self, tmp_path, argv, fmt):
        code, first = run_cli(tmp_path, "a", *argv, "--format", fmt)
        assert code == 0
        again = tmp_path / "b"
        assert cli.main(["rerun", str(first), "-o", str(again)]) == 0
        assert again.read_bytes() == first.read_bytes()
        _, third = run_cli(tmp_path, "c", *argv, "--format", fmt)
        assert cli.data_section(third.read_text()) == cli.data_section(first.read_text())

    def test_csv_and_json_agree(self, tmp_path):
        _, c = run_cli(tmp_path, "a.csv", "marginal", "--x", "0:3:7")
        _, j = run_cli(tmp_path, "a.json", "marginal", "--x", "0:3:7", "--format", "json")
        header, rows = table(c)
        doc = json.loads(j.read_text())
        assert doc["columns"] == header
        # non-finite values are stored as strings to keep the document strict JSON
        assert [[float(v) for v in r] for r in rows] == [[float(v) for v in r] for r in doc["rows"]]
        assert doc["rows"][0][2] == "-inf"
        assert cli.read_config(str(c)).embedded() == {**doc["config"], "format": "csv"}

    def test_floats_round_trip(self, tmp_path):
        _, out = run_cli(tmp_path, "m.csv", "marginal", "--x", "0.1:2.9:5")
        xs = column(out, "x")
        assert xs == np.linspace(0.1, 2.9, 5).tolist()
