import json
import math

import pytest

from tomoq.cli import main
from tomoq.quantum import DensityMatrix, product_state, random_density
from tomoq.sweep import CATALOG

LN2 = math.log(2.0)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def bell_file(tmp_path, capsys):
    path = tmp_path / "bell.json"
    assert run(capsys, "gen-state", "--preset", "bell", "--out", path)[0] == 0
    return path


class TestGenState:
    def test_pure_state(self, tmp_path, capsys):
        path = tmp_path / "s.json"
        code, _, _ = run(capsys, "gen-state", "--dims", "2,2", "--rank", "1", "--seed", "7", "--out", path)
        assert code == 0
        rho = DensityMatrix.from_json(path.read_text())
        assert rho.dims == (2, 2)
        assert abs(float((rho.mat @ rho.mat).trace().real) - 1) < 1e-12

    def test_deterministic(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for p in (a, b):
            run(capsys, "gen-state", "--dims", "2,2", "--rank", "1", "--seed", "7", "--out", p)
        assert a.read_bytes() == b.read_bytes()

    def test_rank_too_large(self, capsys):
        code, _, err = run(capsys, "gen-state", "--dims", "2,2", "--rank", "5")
        assert code == 1 and "rank" in err

    def test_stdout(self, capsys):
        code, out, _ = run(capsys, "gen-state", "--preset", "ghz")
        assert code == 0 and json.loads(out)["dims"] == [2, 2, 2]


class TestCheck:
    def test_bell_discord(self, bell_file, capsys):
        code, out, _ = run(capsys, "check", bell_file, "discord-G")
        rep = json.loads(out)
        assert code == 0 and rep["pass"] and rep["degenerate_flag"]
        assert rep["margin"] == pytest.approx(LN2, abs=1e-9)

    def test_product_discord(self, tmp_path, capsys):
        path = tmp_path / "prod.json"
        path.write_text(product_state(random_density(2, seed=1), random_density(2, seed=2)).to_json())
        code, out, _ = run(capsys, "check", path, "discord-G")
        assert code == 0 and abs(json.loads(out)["margin"]) <= 1e-9

    def test_unknown_id(self, bell_file, capsys):
        code, out, err = run(capsys, "check", bell_file, "made-up")
        assert code == 1
        assert json.loads(out)["catalog"] == list(CATALOG)
        assert "subadd-23" in err

    @pytest.mark.parametrize("name", ["subadd-23", "sandwich-E", "chain-A2", "tsallis-A5", "tsallis-A6",
                                      "vn-27", "grid-M1", "cube-M18", "tsallis-joint", "group-min"])
    def test_bipartite_ids(self, bell_file, capsys, name):
        code, out, _ = run(capsys, "check", bell_file, name, "--u", "haar:3")
        rep = json.loads(out)
        assert code == 0 and rep["inequality_id"] == name

    def test_unitary_sources(self, bell_file, capsys):
        for src in ("identity", "haar:1", "local-min"):
            code, out, _ = run(capsys, "check", bell_file, "subadd-23", "--u", src)
            assert code == 0 and json.loads(out)["witness"]["unitary"] == src
        code, out, _ = run(capsys, "check", bell_file, "subadd-23", "--u", "haar:x")
        assert code == 1 and "error" in json.loads(out)

    def test_wrong_arity(self, bell_file, capsys):
        code, out, _ = run(capsys, "check", bell_file, "ssa-31")
        assert code == 1 and "error" in json.loads(out)

    def test_tripartite(self, tmp_path, capsys):
        path = tmp_path / "ghz.json"
        run(capsys, "gen-state", "--preset", "ghz", "--out", path)
        for name in ("ssa-31", "vn-36", "vn-27"):
            code, out, _ = run(capsys, "check", path, name)
            assert code == 0, out

    def test_violation_exit_code(self, bell_file, capsys):
        # a strict negative tolerance turns an equality into a reported violation
        code, out, _ = run(capsys, "check", bell_file, "vn-27", "--tol", "-10")
        assert code == 2 and json.loads(out)["pass"] is False

    def test_probability_file(self, tmp_path, capsys):
        path = tmp_path / "p.json"
        path.write_text(json.dumps([0.1, 0.2, 0.3, 0.4]))
        code, out, _ = run(capsys, "check", path, "grid-M1", "--shape", "2,2")
        assert code == 0 and json.loads(out)["witness"]["shape"] == [2, 2]
        grid = tmp_path / "g.json"
        grid.write_text(json.dumps({"shape": [2, 2, 1], "entries": [[[0.25], [0.25]], [[0.25], [0.25]]]}))
        code, out, _ = run(capsys, "check", grid, "cube-M18")
        assert code == 0 and abs(json.loads(out)["margin"]) < 1e-15

    @pytest.mark.parametrize("content", ["[0.7, 0.6, -0.3]", "[0.5, 0.6]", "not json", '{"shape": [2], "entries": []}'])
    def test_corrupted_probability_file(self, tmp_path, capsys, content):
        path = tmp_path / "bad.json"
        path.write_text(content)
        code, out, _ = run(capsys, "check", path, "grid-M1")
        assert code == 1 and "error" in json.loads(out)

    def test_missing_file(self, tmp_path, capsys):
        code, out, _ = run(capsys, "check", tmp_path / "nope.json", "vn-27")
        assert code == 1 and "error" in json.loads(out)


class TestOtherCommands:
    def test_tomogram(self, bell_file, capsys):
        code, out, _ = run(capsys, "tomogram", bell_file)
        data = json.loads(out)
        assert code == 0 and data["probs"] == pytest.approx([0.5, 0, 0, 0.5], abs=1e-15)
        assert data["labels"][1] == [0.5, -0.5]

    def test_entropy_probs(self, tmp_path, capsys):
        path = tmp_path / "p.json"
        path.write_text("[0.5, 0.5]")
        code, out, _ = run(capsys, "entropy", path)
        data = json.loads(out)
        assert code == 0 and data["q"] == 2.0
        assert data["shannon"] == pytest.approx(LN2) and data["tsallis"] == pytest.approx(0.5)
        code, out, _ = run(capsys, "entropy", path, "--q", "0.5")
        assert json.loads(out)["renyi"] == pytest.approx(LN2)

    def test_entropy_state(self, bell_file, capsys):
        code, out, _ = run(capsys, "entropy", bell_file)
        assert code == 0 and json.loads(out)["shannon"] == pytest.approx(LN2)

    def test_usage_error(self, capsys):
        assert run(capsys, "frobnicate")[0] == 1
        assert run(capsys, "check")[0] == 1


class TestSweep:
    def test_missing_dims(self, tmp_path, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("sample_count = 2\n")
        code, _, err = run(capsys, "sweep", cfg, "--out", tmp_path / "m.json")
        assert code == 1 and "'dims'" in err

    def test_parse_error_line(self, tmp_path, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("dims = 2,2\nsampel_count = 2\n")
        code, _, err = run(capsys, "sweep", cfg)
        assert code == 1 and "line 2" in err

    def test_manifest(self, tmp_path, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("dims = 2,2\nsample_count = 1\nmaster_seed = 5\n")
        out_a, out_b = tmp_path / "a.json", tmp_path / "b.json"
        code, table, _ = run(capsys, "sweep", cfg, "--out", out_a)
        assert code == 0
        assert table.splitlines()[0].split() == ["inequality_id", "samples", "failures", "min_margin", "conjectural_failures"]
        run(capsys, "sweep", cfg, "--out", out_b)
        a, b = json.loads(out_a.read_text()), json.loads(out_b.read_text())
        assert set(a) == {"command", "config", "tool_version", "master_seed", "timestamp", "summary", "results"}
        a.pop("timestamp"), b.pop("timestamp")
        assert a == b and a["master_seed"] == 5

    def test_seed_override(self, tmp_path, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("dims = 2\nsample_count = 1\n")
        run(capsys, "sweep", cfg, "--out", tmp_path / "m.json", "--seed", "11")
        assert json.loads((tmp_path / "m.json").read_text())["config"]["master_seed"] == 11

    def test_violation(self, tmp_path, capsys):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("dims = 2,2\nsample_count = 1\ninequalities = vn-27\n")
        code, _, _ = run(capsys, "sweep", cfg, "--out", tmp_path / "m.json", "--tol", "-10")
        assert code == 2
