"""Randomized invariant suites for the selection rules and their oracle.

Each check draws seeded random score vectors (a mix of raw Gaussians,
softmax-of-Gaussian simplex points, and vectors with engineered near-ties so
that decision boundaries are probed as well as bulk regions), evaluates one
invariant, and reports the number of cases, failures, and the first
counterexample in replayable form.  The checks accept the rule under test as
a callable so a deliberately broken rule can be injected to confirm the
suite has teeth.

Inputs within 1e-7 of a membership boundary are quarantined in the checks
whose truth value is discontinuous there (singleton characterization, oracle
equivalence, L=2 coincidence); the rules themselves always evaluate their
comparisons exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .region import region_distances
from .selection import (
    SQRT2,
    argmax_mask,
    c_epsilon,
    fixed_margin_mask,
    inflated_argmax_mask,
    t_epsilon,
)

__all__ = ["CheckResult", "run_all", "DEFAULT_EPS_VALUES", "DEFAULT_L_VALUES"]

DEFAULT_L_VALUES = (2, 3, 5, 10, 50)
DEFAULT_EPS_VALUES = (0.01, 0.1, 0.5, 1.0)
BOUNDARY_TOL = 1e-7

MaskRule = Callable[[np.ndarray, float], np.ndarray]


@dataclass
class CheckResult:
    """Outcome of one invariant suite."""

    name: str
    cases: int = 0
    failures: int = 0
    counterexample: dict | None = None

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def record(self, cases: int, bad_mask: np.ndarray, make_example: Callable[[int], dict]) -> None:
        self.cases += int(cases)
        bad = np.flatnonzero(np.asarray(bad_mask, dtype=bool))
        self.failures += int(bad.size)
        if bad.size and self.counterexample is None:
            self.counterexample = make_example(int(bad[0]))


def _split(trials: int, cells: int) -> list[int]:
    base, extra = divmod(int(trials), cells)
    return [base + (1 if i < extra else 0) for i in range(cells)]


def _mixed_scores(rng: np.random.Generator, count: int, L: int, eps: float) -> np.ndarray:
    """Random score batch: raw Gaussian, simplex, and near-tie rows mixed."""
    W = rng.standard_normal((count, L))
    kind = rng.integers(0, 3, size=count)
    simplex = kind == 1
    if simplex.any():
        Z = W[simplex]
        E = np.exp(Z - Z.max(axis=1, keepdims=True))
        W[simplex] = E / E.sum(axis=1, keepdims=True)
    tied = np.flatnonzero(kind == 2)
    for i in tied:
        k = int(rng.integers(2, L + 1)) if L > 1 else 1
        top = np.argsort(W[i])[-k:]
        W[i, top] = W[i].max() + eps * rng.uniform(-0.3, 0.3, size=k)
    return W


def _pairs_within(
    rng: np.random.Generator, count: int, L: int, eps: float
) -> tuple[np.ndarray, np.ndarray]:
    """Pairs (w, v) with ||v - w|| < eps: random nudges plus near-tie swaps
    (the swap of two coordinates that differ by under eps/sqrt(2) lands each
    vector on the far side of the other's decision boundary)."""
    W = _mixed_scores(rng, count, L, eps)
    V = W.copy()
    nudge = rng.random(count) < 0.5
    if nudge.any():
        U = rng.standard_normal((int(nudge.sum()), L))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        radii = rng.uniform(0.0, 1.0, int(nudge.sum())) * eps * (1.0 - 1e-9)
        V[nudge] = W[nudge] + U * radii[:, None]
    swap = np.flatnonzero(~nudge)
    if L >= 2:
        for i in swap:
            order = np.argsort(W[i])
            a, b = int(order[-1]), int(order[-2])
            gap = rng.uniform(0.0, eps / SQRT2 * 0.999)
            W[i, b] = W[i, a] - gap
            V[i] = W[i]
            V[i, a], V[i, b] = V[i, b], V[i, a]
    return W, V


def check_compatibility(
    trials: int,
    seed: int,
    rule_mask: MaskRule = inflated_argmax_mask,
    name: str = "compatibility (inflated argmax)",
    L_values: Sequence[int] = DEFAULT_L_VALUES,
    eps_values: Sequence[float] = DEFAULT_EPS_VALUES,
) -> CheckResult:
    """Vectors closer than eps must get intersecting selection sets."""
    rng = np.random.default_rng(seed)
    result = CheckResult(name)
    cells = [(L, eps) for L in L_values for eps in eps_values]
    for (L, eps), count in zip(cells, _split(trials, len(cells))):
        if count == 0:
            continue
        W, V = _pairs_within(rng, count, L, eps)
        close = np.linalg.norm(W - V, axis=1) < eps
        W, V = W[close], V[close]
        mw = np.asarray(rule_mask(W, eps), dtype=bool)
        mv = np.asarray(rule_mask(V, eps), dtype=bool)
        disjoint = ~np.any(mw & mv, axis=1)
        result.record(
            W.shape[0],
            disjoint,
            lambda i: {
                "suite": name,
                "L": L,
                "eps": eps,
                "w": W[i].tolist(),
                "v": V[i].tolist(),
                "set_w": (np.flatnonzero(mw[i]) + 1).tolist(),
                "set_v": (np.flatnonzero(mv[i]) + 1).tolist(),
            },
        )
    return result


def check_argmax_inclusion(trials: int, seed: int) -> CheckResult:
    result = CheckResult("argmax inclusion")
    rng = np.random.default_rng(seed)
    cells = [(L, eps) for L in DEFAULT_L_VALUES for eps in DEFAULT_EPS_VALUES]
    for (L, eps), count in zip(cells, _split(trials, len(cells))):
        if count == 0:
            continue
        W = _mixed_scores(rng, count, L, eps)
        inflated = inflated_argmax_mask(W, eps)
        missing = np.any(argmax_mask(W) & ~inflated, axis=1)
        result.record(
            count,
            missing,
            lambda i: {"suite": result.name, "L": L, "eps": eps, "w": W[i].tolist()},
        )
    return result


def check_eps_monotonicity(trials: int, seed: int) -> CheckResult:
    result = CheckResult("monotonicity in eps")
    rng = np.random.default_rng(seed)
    for L, count in zip(DEFAULT_L_VALUES, _split(trials, len(DEFAULT_L_VALUES))):
        if count == 0:
            continue
        eps_lo = float(rng.uniform(0.01, 0.5))
        eps_hi = eps_lo * float(rng.uniform(1.0, 5.0))
        W = _mixed_scores(rng, count, L, eps_lo)
        small = inflated_argmax_mask(W, eps_lo)
        big = inflated_argmax_mask(W, eps_hi)
        escaped = np.any(small & ~big, axis=1)
        result.record(
            count,
            escaped,
            lambda i: {
                "suite": result.name,
                "L": L,
                "eps_lo": eps_lo,
                "eps_hi": eps_hi,
                "w": W[i].tolist(),
            },
        )
    return result


def check_w_monotonicity(trials: int, seed: int) -> CheckResult:
    """Membership is upward closed in the score: selecting j while excluding a
    class with a score >= w_j is a violation."""
    result = CheckResult("monotonicity in w")
    rng = np.random.default_rng(seed)
    cells = [(L, eps) for L in DEFAULT_L_VALUES for eps in DEFAULT_EPS_VALUES]
    for (L, eps), count in zip(cells, _split(trials, len(cells))):
        if count == 0:
            continue
        W = _mixed_scores(rng, count, L, eps)
        mask = inflated_argmax_mask(W, eps)
        sel_min = np.where(mask, W, np.inf).min(axis=1)
        unsel_max = np.where(mask, -np.inf, W).max(axis=1)
        bad = sel_min <= unsel_max
        result.record(
            count,
            bad,
            lambda i: {"suite": result.name, "L": L, "eps": eps, "w": W[i].tolist()},
        )
    return result


def check_permutation_invariance(trials: int, seed: int) -> CheckResult:
    result = CheckResult("permutation invariance")
    rng = np.random.default_rng(seed)
    cells = [(L, eps) for L in DEFAULT_L_VALUES for eps in DEFAULT_EPS_VALUES]
    for (L, eps), count in zip(cells, _split(trials, len(cells))):
        if count == 0:
            continue
        W = _mixed_scores(rng, count, L, eps)
        mask = inflated_argmax_mask(W, eps)
        perm = rng.permutation(L)
        permuted_mask = inflated_argmax_mask(W[:, perm], eps)
        bad = np.any(permuted_mask != mask[:, perm], axis=1)
        result.record(
            count,
            bad,
            lambda i: {
                "suite": result.name,
                "L": L,
                "eps": eps,
                "w": W[i].tolist(),
                "perm": perm.tolist(),
            },
        )
    return result


def check_singleton_region(trials: int, seed: int) -> CheckResult:
    """Selected set is the singleton {j} iff w lies in region j (closed margin
    test).  Cases within 1e-7 of the region boundary are quarantined."""
    result = CheckResult("singleton iff region membership")
    rng = np.random.default_rng(seed)
    cells = [(L, eps) for L in DEFAULT_L_VALUES for eps in DEFAULT_EPS_VALUES]
    for (L, eps), count in zip(cells, _split(trials, len(cells))):
        if count == 0 or L < 2:
            continue
        W = _mixed_scores(rng, count, L, eps)
        # push the top score to straddle the singleton boundary half the time
        straddle = rng.random(count) < 0.5
        for i in np.flatnonzero(straddle):
            j = int(np.argmax(W[i]))
            others = np.delete(W[i], j)
            W[i, j] = others.max() + eps / SQRT2 + eps * rng.uniform(-0.5, 0.5)
        top = np.argmax(W, axis=1)
        other_max = np.where(
            np.arange(L)[None, :] == top[:, None], -np.inf, W
        ).max(axis=1)
        margin_gap = W[np.arange(W.shape[0]), top] - (other_max + eps / SQRT2)
        keep = np.abs(margin_gap) >= BOUNDARY_TOL
        W, top, margin_gap = W[keep], top[keep], margin_gap[keep]
        in_reg = margin_gap >= 0.0
        mask = inflated_argmax_mask(W, eps)
        is_singleton = (mask.sum(axis=1) == 1) & mask[np.arange(W.shape[0]), top]
        bad = is_singleton != in_reg
        result.record(
            W.shape[0],
            bad,
            lambda i: {
                "suite": result.name,
                "L": L,
                "eps": eps,
                "w": W[i].tolist(),
                "in_region": bool(in_reg[i]),
                "set": (np.flatnonzero(mask[i]) + 1).tolist(),
            },
        )
    return result


def check_margin_superset(trials: int, seed: int) -> CheckResult:
    result = CheckResult("inflated subset of fixed margin")
    rng = np.random.default_rng(seed)
    cells = [(L, eps) for L in DEFAULT_L_VALUES for eps in DEFAULT_EPS_VALUES]
    for (L, eps), count in zip(cells, _split(trials, len(cells))):
        if count == 0:
            continue
        W = _mixed_scores(rng, count, L, eps)
        bad = np.any(inflated_argmax_mask(W, eps) & ~fixed_margin_mask(W, eps), axis=1)
        result.record(
            count,
            bad,
            lambda i: {"suite": result.name, "L": L, "eps": eps, "w": W[i].tolist()},
        )
    return result


def check_l2_coincidence(trials: int, seed: int) -> CheckResult:
    """For L = 2 the inflated argmax and the fixed-margin rule agree."""
    result = CheckResult("L=2 coincidence with fixed margin")
    rng = np.random.default_rng(seed)
    for eps, count in zip(DEFAULT_EPS_VALUES, _split(trials, len(DEFAULT_EPS_VALUES))):
        if count == 0:
            continue
        W = _mixed_scores(rng, count, 2, eps)
        gap = np.abs(W[:, 0] - W[:, 1])
        W = W[np.abs(gap - eps / SQRT2) >= 1e-9]
        bad = np.any(inflated_argmax_mask(W, eps) != fixed_margin_mask(W, eps), axis=1)
        result.record(
            W.shape[0],
            bad,
            lambda i: {"suite": result.name, "eps": eps, "w": W[i].tolist()},
        )
    return result


def check_threshold_ordering(trials: int, seed: int) -> CheckResult:
    """t <= c everywhere (up to one ulp of float slack at the singleton
    boundary, where the two coincide)."""
    result = CheckResult("threshold ordering t <= c")
    rng = np.random.default_rng(seed)
    cells = [(L, eps) for L in DEFAULT_L_VALUES for eps in DEFAULT_EPS_VALUES]
    for (L, eps), count in zip(cells, _split(trials, len(cells))):
        if count == 0:
            continue
        W = _mixed_scores(rng, count, L, eps)
        c = np.atleast_1d(c_epsilon(W, eps))
        t = np.atleast_1d(t_epsilon(W, eps))
        slack = 1e-12 * np.maximum(1.0, np.abs(c))
        bad = t > c + slack
        result.record(
            count,
            bad,
            lambda i: {
                "suite": result.name,
                "L": L,
                "eps": eps,
                "w": W[i].tolist(),
                "t": float(t[i]),
                "c": float(c[i]),
            },
        )
    return result


def check_shrink_to_argmax(trials: int, seed: int) -> CheckResult:
    """With a unique maximizer at gap g, any eps < sqrt(2) g excludes the
    runner-up (tested at eps = sqrt(2) g / 2, where the set is the argmax
    singleton)."""
    result = CheckResult("shrink to argmax below sqrt(2) x gap")
    rng = np.random.default_rng(seed)
    for L, count in zip(DEFAULT_L_VALUES, _split(trials, len(DEFAULT_L_VALUES))):
        if count == 0 or L < 2:
            continue
        W = rng.standard_normal((count, L))
        order = np.argsort(W, axis=1)
        top = order[:, -1]
        second = order[:, -2]
        rows = np.arange(count)
        gap = W[rows, top] - W[rows, second]
        ok_rows = gap > 1e-12
        W, top, second, gap = W[ok_rows], top[ok_rows], second[ok_rows], gap[ok_rows]
        bad = np.zeros(W.shape[0], dtype=bool)
        sets = []
        for i in range(W.shape[0]):
            mask = inflated_argmax_mask(W[i], SQRT2 * gap[i] / 2.0)
            sets.append(mask)
            bad[i] = mask[second[i]] or mask.sum() != 1 or not mask[top[i]]
        result.record(
            W.shape[0],
            bad,
            lambda i: {
                "suite": result.name,
                "L": L,
                "w": W[i].tolist(),
                "eps": float(SQRT2 * gap[i] / 2.0),
                "set": (np.flatnonzero(sets[i]) + 1).tolist(),
            },
        )
    return result


def check_c_residual(trials: int, seed: int) -> CheckResult:
    """The water level satisfies its defining equation to 1e-9 relative."""
    result = CheckResult("water-level residual")
    rng = np.random.default_rng(seed)
    cells = [(L, eps) for L in DEFAULT_L_VALUES for eps in DEFAULT_EPS_VALUES]
    for (L, eps), count in zip(cells, _split(trials, len(cells))):
        if count == 0:
            continue
        W = _mixed_scores(rng, count, L, eps)
        c = np.atleast_1d(c_epsilon(W, eps))
        pos = np.maximum(W - c[:, None], 0.0)
        f = pos.sum(axis=1) ** 2 + (pos * pos).sum(axis=1)
        bad = np.abs(f - eps * eps) >= 1e-9 * eps * eps
        result.record(
            count,
            bad,
            lambda i: {
                "suite": result.name,
                "L": L,
                "eps": eps,
                "w": W[i].tolist(),
                "residual": float(abs(f[i] - eps * eps)),
            },
        )
    return result


def check_oracle_equivalence(
    trials: int,
    seed: int,
    L_values: Sequence[int] = DEFAULT_L_VALUES,
    eps_values: Sequence[float] = DEFAULT_EPS_VALUES,
) -> CheckResult:
    """Closed-form membership equals definition-level membership via projection
    distances, away from the 1e-7 boundary band."""
    result = CheckResult("closed form vs projection oracle")
    rng = np.random.default_rng(seed)
    cells = [(L, eps) for L in L_values for eps in eps_values]
    for (L, eps), count in zip(cells, _split(trials, len(cells))):
        if count == 0:
            continue
        W = _mixed_scores(rng, count, L, eps)
        D = region_distances(W, eps)
        keep = np.abs(D - eps).min(axis=1) >= BOUNDARY_TOL
        W, D = W[keep], D[keep]
        closed = inflated_argmax_mask(W, eps)
        by_def = D < eps
        bad = np.any(closed != by_def, axis=1)
        result.record(
            W.shape[0],
            bad,
            lambda i: {
                "suite": result.name,
                "L": L,
                "eps": eps,
                "w": W[i].tolist(),
                "closed_form": (np.flatnonzero(closed[i]) + 1).tolist(),
                "by_definition": (np.flatnonzero(by_def[i]) + 1).tolist(),
            },
        )
    return result


def run_all(seed: int, trials: int) -> list[CheckResult]:
    """Run every suite at ``trials`` cases each, with a distinct derived seed."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    suites: list[Callable[[int, int], CheckResult]] = [
        check_compatibility,
        lambda t, s: check_compatibility(
            t, s, rule_mask=fixed_margin_mask, name="compatibility (fixed margin)"
        ),
        check_argmax_inclusion,
        check_eps_monotonicity,
        check_w_monotonicity,
        check_permutation_invariance,
        check_singleton_region,
        check_margin_superset,
        check_l2_coincidence,
        check_threshold_ordering,
        check_shrink_to_argmax,
        check_c_residual,
        check_oracle_equivalence,
    ]
    return [suite(trials, seed + 1000 * k) for k, suite in enumerate(suites)]
