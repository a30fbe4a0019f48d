import json
import os

import numpy as np
import pytest

from krslab.cli import main, profile_csv_header, read_solution, write_solution

CONFIG = os.path.join(os.path.dirname(__file__), os.pardir, "configs",
                      "koiso_cao.json")


def run(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """One full pin -> solve run shared by the read-back tests."""
    root = tmp_path_factory.mktemp("cli")
    constants = str(root / "constants.json")
    out = str(root / "out")
    assert run("pin-constants", "--out", constants) == 0
    config = str(root / "run.json")
    with open(CONFIG) as fh:
        raw = json.load(fh)
    raw["grid"]["nodes"] = 256
    with open(config, "w") as fh:
        json.dump(raw, fh)
    assert run("solve", "--config", config, "--constants", constants,
               "--out", out) == 0
    return {"root": root, "constants": constants, "out": out,
            "config": config}


class TestPinConstants:
    def test_writes_valid_json(self, tmp_path):
        out = str(tmp_path / "c.json")
        assert run("pin-constants", "--out", out) == 0
        data = json.loads(open(out).read())
        assert data["A"] == "1/4" and data["B"] == "1/2"
        assert data["max_rel_err"] < 1e-6

    def test_deterministic(self, tmp_path):
        a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        run("pin-constants", "--out", a, "--seed", "1")
        run("pin-constants", "--out", b, "--seed", "1")
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_coarse_step_exits_2_with_diagnostics(self, tmp_path):
        out = str(tmp_path / "c.json")
        assert run("pin-constants", "--out", out, "--fd-step", "0.3",
                   "--fd-tol", "1e-12") == 2
        assert "error" in json.loads(open(out).read())


class TestSolve:
    def test_outputs_present_and_schema_valid(self, pipeline):
        out = pipeline["out"]
        for method in ("momentum", "shooting"):
            meta = json.loads(
                open(os.path.join(out, f"solution_{method}.json")).read())
            assert meta["method"] == method
            assert meta["residuals"]["cross_method"] < 1e-6
            with open(os.path.join(out, f"profile_{method}.csv")) as fh:
                header = fh.readline().strip()
            assert header == profile_csv_header(1)
            assert header == "t,f,df,ddf,l1,dl1,ddl1,u,du,ddu"

    def test_invalid_twist_exits_1(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({
            "factors": [{"dim": 2, "einstein_constant": 2.0, "twist": 0}],
        }))
        assert run("solve", "--config", str(cfg),
                   "--out", str(tmp_path / "o")) == 1

    def test_inadmissible_geometry_exits_3(self, tmp_path, pipeline):
        cfg = tmp_path / "deg.json"
        cfg.write_text(json.dumps({
            "factors": [{"dim": 2, "einstein_constant": 1.0, "twist": 1}],
            "method": "momentum",
        }))
        out = str(tmp_path / "o")
        assert run("solve", "--config", str(cfg), "--constants",
                   pipeline["constants"], "--out", out) == 3
        diag = json.loads(open(os.path.join(out, "diagnostics.json")).read())
        assert "error" in diag

    def test_round_trip_read_back(self, pipeline):
        sol = read_solution(pipeline["out"], "momentum")
        assert sol.residuals.max_equation_residual() < 1e-10

    def test_deterministic_solve(self, pipeline, tmp_path):
        out2 = str(tmp_path / "out2")
        assert run("solve", "--config", pipeline["config"], "--constants",
                   pipeline["constants"], "--out", out2) == 0
        for name in ("profile_momentum.csv", "solution_momentum.json"):
            a = open(os.path.join(pipeline["out"], name), "rb").read()
            b = open(os.path.join(out2, name), "rb").read()
            assert a == b


class TestVerify:
    def test_identities_pass(self, pipeline, tmp_path):
        out = str(tmp_path / "v")
        assert run("verify", "--solution", pipeline["out"],
                   "--out", out) == 0
        report = json.loads(
            open(os.path.join(out, "verify_momentum.json")).read())
        assert all(report["passed"].values())

    def test_shooting_solution_verifies(self, pipeline, tmp_path):
        assert run("verify", "--solution", pipeline["out"], "--method",
                   "shooting", "--out", str(tmp_path / "v")) == 0

    def test_corrupted_profile_exits_4(self, pipeline, tmp_path):
        import shutil

        bad = tmp_path / "bad"
        shutil.copytree(pipeline["out"], bad)
        data = np.loadtxt(bad / "profile_momentum.csv", delimiter=",",
                          skiprows=1)
        data[:, 7] += 0.2  # corrupt u
        with open(bad / "profile_momentum.csv", "w") as fh:
            fh.write(profile_csv_header(1) + "\n")
            np.savetxt(fh, data, delimiter=",", fmt="%.17g")
        assert run("verify", "--solution", str(bad),
                   "--out", str(tmp_path / "v")) == 4


class TestStability:
    def test_table_has_all_signs(self, pipeline, tmp_path):
        out = str(tmp_path / "s")
        assert run("stability", "--solution", pipeline["out"], "--config",
                   pipeline["config"], "--out", out) == 0
        rows = open(os.path.join(out, "stability_momentum.csv")).read()
        lines = rows.strip().split("\n")
        assert lines[0] == "profile,value,sign,C_hg,v_h_norm"
        signs = {line.split(",")[2] for line in lines[1:]}
        assert {"zero", "positive", "negative"} <= signs

    def test_default_family_without_config(self, pipeline, tmp_path):
        assert run("stability", "--solution", pipeline["out"],
                   "--out", str(tmp_path / "s")) == 0

    def test_unknown_profile_kind_exits_1(self, pipeline, tmp_path):
        cfg = tmp_path / "s.json"
        raw = json.loads(open(pipeline["config"]).read())
        raw["stability"] = {"profiles": [{"kind": "mystery"}]}
        cfg.write_text(json.dumps(raw))
        assert run("stability", "--solution", pipeline["out"], "--config",
                   str(cfg), "--out", str(tmp_path / "s")) == 1


class TestFuzzAlgebra:
    def test_runs_and_reports(self, tmp_path):
        out = str(tmp_path / "fuzz.json")
        assert run("fuzz-algebra", "--trials", "100", "--out", out) == 0
        report = json.loads(open(out).read())
        assert report["trials"] == 100
        assert report["max_residual"] < 1e-12

    def test_deterministic(self, tmp_path):
        a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        run("fuzz-algebra", "--trials", "50", "--seed", "9", "--out", a)
        run("fuzz-algebra", "--trials", "50", "--seed", "9", "--out", b)
        assert open(a, "rb").read() == open(b, "rb").read()


class TestSerialization:
    def test_write_read_round_trip(self, kc_momentum, tmp_path):
        write_solution(str(tmp_path), kc_momentum)
        back = read_solution(str(tmp_path), "momentum")
        assert back.c_slope == kc_momentum.c_slope
        assert np.abs(back.grid.f - kc_momentum.grid.f).max() == 0.0
        assert back.grid.validate()
