"""Tests of the invariant suites themselves: they pass on the real rules,
count cases as requested, and catch deliberately broken rules."""

import numpy as np

from stable_selection.selection import SQRT2
from stable_selection.verify import (
    check_compatibility,
    check_oracle_equivalence,
    run_all,
)


def test_all_suites_pass_at_moderate_trials():
    results = run_all(seed=101, trials=1500)
    assert len(results) == 13
    for r in results:
        assert r.ok, f"{r.name} failed: {r.counterexample}"
        assert r.cases > 0


def test_single_trial_runs_one_case_per_suite():
    for r in run_all(seed=7, trials=1):
        assert r.cases == 1
        assert r.ok


def shrunken_margin(W, eps):
    # margin far below eps/sqrt(2): not eps-compatible
    W = np.atleast_2d(np.asarray(W, dtype=float))
    return W > W.max(axis=-1, keepdims=True) - eps / 4.0


def reversed_inequality(W, eps):
    # selects everything *outside* the margin band; can return empty rows
    W = np.atleast_2d(np.asarray(W, dtype=float))
    return W < W.max(axis=-1, keepdims=True) - eps / SQRT2


class TestMutationSmoke:
    def test_shrunken_margin_caught_with_counterexample(self):
        result = check_compatibility(
            trials=4000, seed=11, rule_mask=shrunken_margin, name="mutant"
        )
        assert result.failures > 0
        example = result.counterexample
        assert example is not None
        w = np.asarray(example["w"])
        v = np.asarray(example["v"])
        eps = example["eps"]
        # the counterexample replays: vectors are close, mutant sets disjoint
        assert np.linalg.norm(w - v) < eps
        mw = shrunken_margin(w, eps)[0]
        mv = shrunken_margin(v, eps)[0]
        assert not np.any(mw & mv)
        assert set(example["set_w"]) == set((np.flatnonzero(mw) + 1).tolist())

    def test_reversed_inequality_caught(self):
        result = check_compatibility(
            trials=4000, seed=12, rule_mask=reversed_inequality, name="mutant"
        )
        assert result.failures > 0
        assert result.counterexample is not None


def test_oracle_equivalence_suite_counts_quarantine():
    result = check_oracle_equivalence(trials=2000, seed=13)
    assert result.ok
    assert result.cases <= 2000  # boundary band may drop a few cases
