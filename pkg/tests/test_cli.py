"""CLI tests: subcommand round trips, config-file merging, exit codes, and
byte-identical reruns."""

import json

import pytest

from stable_selection.cli import main


def run_cli(*argv):
    return main([str(a) for a in argv])


class TestSimulateSizes:
    def test_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "sizes.csv"
        code = run_cli(
            "simulate-sizes", "--L", "2", "5", "--draws", "200", "--seed", "1", "--out", out
        )
        assert code == 0
        assert out.read_text().startswith("L,mean_inflated")
        assert "ratio" in capsys.readouterr().out

    def test_writes_json(self, tmp_path):
        out = tmp_path / "sizes.json"
        run_cli(
            "simulate-sizes", "--L", "3", "--draws", "100", "--seed", "2",
            "--out", out, "--format", "json",
        )
        assert json.loads(out.read_text())["rows"][0]["L"] == 3


class TestRegionMap:
    def test_round_trip(self, tmp_path):
        out = tmp_path / "map.csv"
        assert run_cli("region-map", "--eps", "0.1", "--grid-resolution", "8", "--out", out) == 0
        assert len(out.read_text().splitlines()) == 1 + 45


class TestLooStability:
    def test_flags_only(self, tmp_path, capsys):
        out = tmp_path / "reports"
        code = run_cli(
            "loo-stability", "--seed", "4", "--n", "40", "--d", "3", "--L", "3",
            "--m", "20", "--B", "6", "--K", "5", "--n-test", "10", "--out", out,
        )
        assert code == 0
        assert (out / "subbag_inflated.json").exists()
        assert "beta_prec" in capsys.readouterr().out

    def test_config_file_with_flag_override(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"seed": 5, "n": 40, "d": 3, "L": 3, "m": 20,
                                      "B": 6, "K": 5, "n_test": 10}))
        out = tmp_path / "reports"
        run_cli("loo-stability", "--config", config, "--n", "30", "--out", out)
        echoed = json.loads((out / "base_argmax.json").read_text())["config"]
        assert echoed["n"] == 30  # flag wins
        assert echoed["B"] == 6  # file value survives

    def test_unknown_config_key_rejected(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"seed": 1, "bogus": 2}))
        with pytest.raises(SystemExit):
            run_cli("loo-stability", "--config", config, "--out", tmp_path / "r")

    def test_seed_required(self, tmp_path):
        with pytest.raises(SystemExit):
            run_cli("loo-stability", "--n", "40", "--out", tmp_path / "r")


class TestVerify:
    def test_passing_run_exits_zero(self, capsys):
        assert run_cli("verify", "--seed", "6", "--trials", "300") == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 13
        assert "FAIL" not in out

    def test_failing_run_serializes_counterexample(self, tmp_path, monkeypatch, capsys):
        from stable_selection import cli
        from stable_selection.verify import CheckResult

        broken = CheckResult("demo suite", cases=5, failures=1,
                             counterexample={"w": [0.5, 0.5], "eps": 0.1})
        monkeypatch.setattr(cli, "run_all", lambda seed, trials: [broken])
        out = tmp_path / "counterexample.json"
        assert run_cli("verify", "--seed", "1", "--trials", "5", "--out", out) == 1
        assert json.loads(out.read_text())["eps"] == 0.1
        assert "FAIL" in capsys.readouterr().out


def _read_tree(root):
    return {p.name: p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


class TestDeterminism:
    def test_simulate_sizes_byte_identical(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / f"{name}.csv"
            run_cli("simulate-sizes", "--L", "2", "7", "--draws", "150",
                    "--seed", "9", "--out", out)
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_region_map_byte_identical(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / f"{name}.csv"
            run_cli("region-map", "--grid-resolution", "9", "--out", out)
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_loo_stability_byte_identical(self, tmp_path):
        trees = []
        for name in ("a", "b"):
            out = tmp_path / name
            run_cli("loo-stability", "--seed", "10", "--n", "40", "--d", "3", "--L", "3",
                    "--m", "20", "--B", "6", "--K", "4", "--n-test", "8", "--out", out)
            trees.append(_read_tree(out))
        assert trees[0] == trees[1]
