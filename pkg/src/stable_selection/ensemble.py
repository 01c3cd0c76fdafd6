"""Bagged scorers and the matching selection-stability bound calculators.

A base learner is any callable ``(LabeledDataset, seed) -> scorer`` whose
scorers map feature vectors to probability vectors on the simplex.  Bagging
fits ``B`` copies of the learner on resampled index bags (with replacement:
bootstrap; without: subbagging) and averages their scores, which provably
stabilizes the score function.  The bound calculators turn the resampling
scheme into the guaranteed selection-stability level of the bagged scorer
composed with the inflated argmax.

Determinism contract: the fitted ensemble is a pure function of
``(learner, data, scheme, seed)``.  Each bag's indices and the seed handed to
its learner are derived from ``(seed, bag_index)`` alone, so results are
identical whether bags are fitted serially or in parallel.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .learners import LabeledDataset, Scorer
from .seeding import spawn_rng, spawn_seed

__all__ = [
    "BagScheme",
    "BagFitError",
    "BaggedScorer",
    "sample_bag",
    "fit_bagged",
    "p_nm",
    "stability_bound",
]

_KINDS = ("bootstrap", "subbag")

BaseLearner = Callable[[LabeledDataset, int], Scorer]


@dataclass(frozen=True)
class BagScheme:
    """Resampling scheme: ``kind`` in {"bootstrap", "subbag"}, bag size ``m``,
    number of Monte Carlo bags ``B``."""

    kind: str
    m: int
    B: int

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if int(self.m) < 1:
            raise ValueError("bag size m must be >= 1")
        if int(self.B) < 1:
            raise ValueError("number of bags B must be >= 1")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "B", int(self.B))


class BagFitError(RuntimeError):
    """A base-learner fit failed on one bag; carries the bag index."""

    def __init__(self, bag_index: int):
        super().__init__(f"base learner failed on bag {bag_index}")
        self.bag_index = bag_index


def sample_bag(n: int, scheme: BagScheme, rng: np.random.Generator) -> np.ndarray:
    """Draw one bag of ``scheme.m`` row indices from ``0..n-1``.

    Bootstrap draws i.i.d. with replacement; subbag draws distinct indices
    uniformly (requires ``m <= n``).  Deterministic given the generator state.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if scheme.kind == "bootstrap":
        return rng.integers(0, n, size=scheme.m)
    if scheme.m > n:
        raise ValueError(f"subbag needs m <= n, got m={scheme.m}, n={n}")
    return rng.permutation(n)[: scheme.m]


@dataclass(frozen=True)
class BaggedScorer:
    """Average of ``B`` fitted base scorers; immutable and thread-safe.

    Output stays on the simplex whenever the base outputs do (the simplex is
    convex).
    """

    scorers: tuple[Scorer, ...]
    scheme: BagScheme
    seed: int

    def __call__(self, x: np.ndarray) -> np.ndarray:
        total = self.scorers[0](x)
        for scorer in self.scorers[1:]:
            total = total + scorer(x)
        return total / len(self.scorers)


def fit_bagged(
    learner: BaseLearner,
    data: LabeledDataset,
    scheme: BagScheme,
    seed: int,
    max_workers: int | None = None,
) -> BaggedScorer:
    """Fit ``scheme.B`` bags of ``learner`` on ``data`` and average the scores.

    ``max_workers`` > 1 fits bags in a thread pool; results are combined in
    bag-index order either way, so the output depends only on the seed.
    Base-learner failures are re-raised as :class:`BagFitError` tagged with
    the bag index.
    """
    if data.n < 1:
        raise ValueError("data must be nonempty")
    if scheme.kind == "subbag" and scheme.m > data.n:
        raise ValueError(f"subbag needs m <= n, got m={scheme.m}, n={data.n}")

    def fit_one(b: int) -> Scorer:
        idx = sample_bag(data.n, scheme, spawn_rng(seed, "bag", b))
        try:
            return learner(data.subset(idx), spawn_seed(seed, "bag-fit", b))
        except Exception as exc:
            raise BagFitError(b) from exc

    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            scorers = tuple(pool.map(fit_one, range(scheme.B)))
    else:
        scorers = tuple(fit_one(b) for b in range(scheme.B))
    return BaggedScorer(scorers=scorers, scheme=scheme, seed=int(seed))


def p_nm(n: int, scheme: BagScheme) -> float:
    """Probability that a fixed training index lands in one bag.

    ``m/n`` for subbagging, ``1 - (1 - 1/n)^m`` for bootstrapping; always in
    (0, 1].  Callers of the stability bound must handle p = 1 (bound blows up).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if scheme.kind == "subbag":
        if scheme.m > n:
            raise ValueError(f"subbag needs m <= n, got m={scheme.m}, n={n}")
        return scheme.m / n
    if n == 1:
        return 1.0
    return float(-np.expm1(scheme.m * np.log1p(-1.0 / n)))


def stability_bound(
    eps: float,
    n: int,
    L: "int | float",
    scheme: BagScheme,
    finite_B: bool = False,
) -> float:
    """Guaranteed selection-stability level of bagging + inflated argmax.

    Infinite-B (derandomized ensemble):

        delta = eps^-2 * (1 - 1/L)/(n - 1) * p/(1 - p)

    with ``p = p_nm(n, scheme)``; the finite-B variant adds ``16 e^2 / B``
    inside the parenthesis:

        delta = eps^-2 * (1 - 1/L) * (p/((n-1)(1-p)) + 16 e^2 / B).

    ``L`` may be ``math.inf`` (countably infinite label space).  The raw
    bound is returned without clipping at 1, so it can be vacuous (> 1).
    Raises for p = 1 (subbag with m = n), where the bound is unbounded.
    """
    eps = float(eps)
    if eps <= 0.0:
        raise ValueError("eps must be > 0")
    if n < 2:
        raise ValueError("n must be >= 2")
    if not L >= 2:
        raise ValueError("L must be >= 2")
    p = p_nm(n, scheme)
    if p >= 1.0:
        raise ValueError(
            "p_nm = 1 (every index lands in every bag): the stability bound is unbounded"
        )
    inner = p / ((n - 1) * (1.0 - p))
    if finite_B:
        inner += 16.0 * math.e**2 / scheme.B
    return (1.0 - 1.0 / L) * inner / eps**2
