import json
import shutil
from pathlib import Path

import pytest

from gapdecomp.cli import main
from gapdecomp.fixtures import fixture_path

GOLDEN = Path(__file__).parent / "golden" / "oaxaca_fixture_seed42.json"


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    for name in ("fixture.csv", "fixture_roles.ini", "experiment.csv", "experiment_roles.ini"):
        shutil.copy(fixture_path(name), tmp_path / name)
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run_cli(capsys, *args):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


DECOMP = ("--data", "fixture.csv", "--roles", "fixture_roles.ini")
EXPERIMENT = ("--data", "experiment.csv", "--roles", "experiment_roles.ini")


class TestDecomposition:

    def test_golden_report(self, workdir, capsys):
        code, out, _ = run_cli(capsys, *DECOMP, "--analysis", "oaxaca", "--mediators", "all",
                               "--seed", "42", "--format", "json")
        assert code == 0
        assert out == GOLDEN.read_text()
        assert json.loads(out)["result"]["adding_up_error"] <= 1e-10

    def test_identical_config_identical_bytes(self, workdir, capsys):
        args = (*DECOMP, "--analysis", "ipw", "--bootstrap", "20", "--seed", "3")
        assert run_cli(capsys, *args)[1] == run_cli(capsys, *args)[1]

    def test_stricter_trim_trims_more(self, workdir, capsys):
        counts = []
        for level in ("0.02", "0.04"):
            _, out, _ = run_cli(capsys, *DECOMP, "--analysis", "ipw", "--trim", level,
                                "--bootstrap", "20")
            counts.append(json.loads(out)["result"]["n_trimmed"])
        assert counts[1] >= counts[0]

    def test_reference_subset(self, workdir, capsys):
        _, out, _ = run_cli(capsys, *DECOMP, "--reference", "female", "--bootstrap", "10")
        comps = json.loads(out)["result"]["components"]
        assert list(comps) == ["total", "indirect_ref_female", "direct_ref_female"]

    def test_text_table(self, workdir, capsys):
        code, out, _ = run_cli(capsys, *DECOMP, "--analysis", "ipw", "--bootstrap", "10",
                               "--format", "text")
        assert code == 0
        assert "total m-f" in out and "dir.m" in out and "missings / trimmed" in out

    def test_out_file(self, workdir, capsys):
        code, out, _ = run_cli(capsys, *DECOMP, "--bootstrap", "10", "--format", "csv",
                               "--out", "r.csv")
        assert code == 0 and out == ""
        assert (workdir / "r.csv").read_text().startswith("component,")


class TestOtherAnalyses:

    def test_ate_experiment(self, workdir, capsys):
        code, out, _ = run_cli(capsys, *EXPERIMENT, "--analysis", "ate_experiment")
        assert code == 0
        rows = json.loads(out)["result"]["subsamples"]["all"]["estimates"]
        assert [r["estimator"] for r in rows] == ["mean_difference", "ols_controls",
                                                  "double_lasso"]
        for r in rows:
            assert abs(r["est"] - 0.6) <= 3 * r["se"]

    def test_balance(self, workdir, capsys):
        code, out, _ = run_cli(capsys, *DECOMP, "--analysis", "balance")
        res = json.loads(out)["result"]
        assert code == 0
        assert res["original"]["columns"][0] == "name"
        assert len(res["reweighted"]["rows"]) == 6  # three controls, three M1 mediators

    def test_support(self, workdir, capsys):
        code, out, _ = run_cli(capsys, *DECOMP, "--analysis", "support", "--bins", "10")
        res = json.loads(out)["result"]
        assert code == 0 and len(res["rows"]) == 10
        assert 0.0 <= res["overlap"] <= 1.0

    def test_generate_then_decompose(self, workdir, capsys):
        (workdir / "dgp.ini").write_text(
            "[dgp]\nn = 300\ndim_w = 1\ngamma = 0.2\nalpha = 0.5\ndelta = 0.0\ntheta = 1\n"
            "beta = 2\nkappa = 0\nseed = 3\n")
        code, _, _ = run_cli(capsys, "--analysis", "generate", "--dgp", "dgp.ini",
                             "--out", "gen.csv", "--roles", "gen_roles.ini")
        assert code == 0
        code, out, _ = run_cli(capsys, "--data", "gen.csv", "--roles", "gen_roles.ini",
                               "--bootstrap", "10")
        assert code == 0 and json.loads(out)["result"]["n_used"] == 300

    def test_synth_mc(self, workdir, capsys):
        code, out, _ = run_cli(capsys, "--analysis", "synth_mc", "--estimator",
                               "mean_difference", "--replications", "5")
        assert code == 0
        assert json.loads(out)["result"]["components"]["ate"]["truth"] == 2.0


class TestErrors:

    def test_missing_file(self, workdir, capsys):
        code, out, err = run_cli(capsys, "--data", "nope.csv", "--roles", "fixture_roles.ini")
        assert code == 2 and out == ""
        assert json.loads(err)["error"] == "FileNotFoundError"

    def test_schema_error(self, workdir, capsys):
        (workdir / "bad.csv").write_text("g,y\n1,2\n")
        code, _, err = run_cli(capsys, "--data", "bad.csv", "--roles", "fixture_roles.ini")
        assert code == 2 and json.loads(err)["error"] == "schema_error"

    def test_parse_error_location(self, workdir, capsys):
        text = (workdir / "fixture.csv").read_text().splitlines()
        cells = text[5].split(",")
        cells[2] = "oops"
        text[5] = ",".join(cells)
        (workdir / "fixture.csv").write_text("\n".join(text) + "\n")
        code, _, err = run_cli(capsys, *DECOMP)
        rec = json.loads(err)
        assert code == 2 and rec["error"] == "parse_error" and rec["row"] == 6

    def test_separation_exit_code(self, workdir, capsys):
        rows = ["g,y,w,x"] + [f"{int(i >= 10)},{i % 3},{i},{(i * 7) % 5}" for i in range(20)]
        (workdir / "sep.csv").write_text("\n".join(rows) + "\n")
        (workdir / "sep.ini").write_text(
            "[group]\ncolumns = g\n[outcome]\ncolumns = y\n[controls]\ncolumns = w\n"
            "[mediators_m1]\ncolumns = x\n")
        code, _, err = run_cli(capsys, "--data", "sep.csv", "--roles", "sep.ini",
                               "--analysis", "ipw")
        assert code == 3 and json.loads(err)["error"] == "separation"

    def test_bad_trim(self, workdir, capsys):
        code, _, err = run_cli(capsys, *DECOMP, "--trim", "0.6")
        assert code == 2 and json.loads(err)["error"] == "domain_error"
