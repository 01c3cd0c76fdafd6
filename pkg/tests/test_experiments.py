"""Experiment-driver tests: size simulation, region map, and the LOO run."""

import json

import numpy as np
import pytest

from stable_selection.experiments import (
    LooConfig,
    region_map_rows,
    run_loo_experiment,
    simulate_set_sizes,
    write_loo_reports,
    write_region_map_csv,
    write_size_table_csv,
    write_size_table_json,
)
from stable_selection.learners import make_gaussian_mixture


class TestSimulateSizes:
    def test_two_class_rules_coincide_exactly(self):
        for seed in (0, 1, 2):
            row = simulate_set_sizes([2], eps=0.1, draws=500, seed=seed)[0]
            assert row.ratio == 1.0
            assert row.mean_inflated == row.mean_margin

    def test_inflated_never_larger(self):
        for row in simulate_set_sizes([3, 10, 40], eps=0.1, draws=400, seed=3):
            assert row.mean_inflated <= row.mean_margin

    def test_reruns_agree_within_three_ses(self):
        a = simulate_set_sizes([25], eps=0.1, draws=1000, seed=10)[0]
        b = simulate_set_sizes([25], eps=0.1, draws=1000, seed=11)[0]
        for mean_a, se_a, mean_b, se_b in [
            (a.mean_inflated, a.se_inflated, b.mean_inflated, b.se_inflated),
            (a.mean_margin, a.se_margin, b.mean_margin, b.se_margin),
        ]:
            assert abs(mean_a - mean_b) <= 3.0 * np.hypot(se_a, se_b)

    def test_draws_floor(self):
        with pytest.raises(ValueError):
            simulate_set_sizes([3], draws=1, seed=0)

    def test_writers(self, tmp_path):
        rows = simulate_set_sizes([2, 5], draws=50, seed=0)
        csv_path = tmp_path / "sizes.csv"
        json_path = tmp_path / "sizes.json"
        write_size_table_csv(rows, csv_path)
        write_size_table_json(rows, json_path)
        assert csv_path.read_text().splitlines()[0].startswith("L,mean_inflated")
        payload = json.loads(json_path.read_text())
        assert [r["L"] for r in payload["rows"]] == [2, 5]


class TestRegionMap:
    def test_center_gets_full_set(self):
        rows = {(w1, w2, w3): code for w1, w2, w3, code in region_map_rows(0.1, 3)}
        assert rows[(1 / 3, 1 / 3, 1 / 3)] == 0b111

    def test_corner_is_singleton(self):
        rows = {(w1, w2, w3): code for w1, w2, w3, code in region_map_rows(0.1, 10)}
        assert rows[(1.0, 0.0, 0.0)] == 0b001

    def test_near_tie_pair(self):
        # closed-form check: at (0.45, 0.45, 0.10) with eps=0.1 the threshold
        # is ~0.3982, so classes 1 and 2 are selected and class 3 is not
        rows = {(w1, w2, w3): code for w1, w2, w3, code in region_map_rows(0.1, 20)}
        assert rows[(0.45, 0.45, 0.10)] == 0b011

    def test_grid_size(self):
        g = 12
        assert len(region_map_rows(0.1, g)) == (g + 1) * (g + 2) // 2

    def test_resolution_floor(self):
        with pytest.raises(ValueError):
            region_map_rows(0.1, 1)

    def test_writer(self, tmp_path):
        path = tmp_path / "map.csv"
        write_region_map_csv(region_map_rows(0.1, 4), path)
        lines = path.read_text().splitlines()
        assert lines[0] == "w1,w2,w3,selection_mask"
        assert len(lines) == 1 + 15


class TestLooExperiment:
    def test_three_reports_share_config(self):
        config = LooConfig(seed=1, n=40, d=3, L=3, m=20, B=8, K=6, n_test=15)
        reports = run_loo_experiment(config)
        assert set(reports) == {"base_argmax", "subbag_argmax", "subbag_inflated"}
        for r in reports.values():
            assert r.config == config.to_dict()
            assert r.delta_j.shape == (15,)
            assert 0.0 <= r.delta_hat <= 1.0
            assert r.beta_size >= 1.0
        assert reports["subbag_inflated"].bound_finite_b is not None
        assert reports["base_argmax"].bound_finite_b is None

    def test_separable_data_is_accurate_and_tight(self):
        config = LooConfig(seed=2, n=60, d=4, L=4, overlap=0.0, m=30, B=10, K=8, n_test=30)
        reports = run_loo_experiment(config)
        for r in reports.values():
            assert r.beta_prec > 0.9
            assert r.beta_size < 1.1

    def test_deterministic_reports(self):
        config = LooConfig(seed=3, n=40, d=3, L=3, m=20, B=8, K=6, n_test=10)
        first = run_loo_experiment(config)
        second = run_loo_experiment(config)
        for method in first:
            assert first[method].to_json() == second[method].to_json()

    def test_seed_changes_output(self):
        base = LooConfig(seed=4, n=40, d=3, L=3, m=20, B=8, K=6, n_test=10)
        other = LooConfig(seed=5, n=40, d=3, L=3, m=20, B=8, K=6, n_test=10)
        assert (
            run_loo_experiment(base)["subbag_inflated"].to_json()
            != run_loo_experiment(other)["subbag_inflated"].to_json()
        )

    def test_csv_data_source(self, tmp_path):
        data = make_gaussian_mixture(50, 3, 3, overlap=0.3, seed=6)
        path = tmp_path / "points.csv"
        header = ["label"] + [f"x{i}" for i in range(3)]
        lines = [",".join(header)]
        for row, label in zip(data.features, data.labels):
            lines.append(",".join([str(int(label))] + [repr(float(v)) for v in row]))
        path.write_text("\n".join(lines) + "\n")
        config = LooConfig(
            seed=7, m=15, B=6, K=5, n_test=20, csv_path=str(path), label_column="label"
        )
        reports = run_loo_experiment(config)
        assert reports["base_argmax"].delta_j.shape == (20,)

    def test_report_writer(self, tmp_path):
        config = LooConfig(seed=8, n=30, d=3, L=3, m=15, B=6, K=4, n_test=8)
        written = write_loo_reports(run_loo_experiment(config), tmp_path / "out")
        names = sorted(p.name for p in written)
        assert names == [
            "base_argmax.json",
            "base_argmax_delta_j.csv",
            "subbag_argmax.json",
            "subbag_argmax_delta_j.csv",
            "subbag_inflated.json",
            "subbag_inflated_delta_j.csv",
        ]

    def test_unknown_learner_rejected(self):
        with pytest.raises(ValueError):
            run_loo_experiment(LooConfig(seed=0, learner="forest"))

    def test_config_fields_validated(self):
        with pytest.raises(ValueError, match="'n'"):
            LooConfig(seed=0, n=0)
        with pytest.raises(ValueError, match="eps"):
            LooConfig(seed=0, eps=-0.1)
        with pytest.raises(ValueError, match="overlap"):
            LooConfig(seed=0, overlap=1.5)
