"""Empirical stability and accuracy metrics for selection pipelines.

The instability of a fitted pipeline at a test point is the fraction of
leave-one-out refits whose selection set is *disjoint* from the full-data
selection set; two sets that share even one label are counted as consistent.
Score-level (tail) instability is the fraction of refits whose score vector
moves by at least ``eps`` in Euclidean norm.  Accuracy is summarized by the
precision ``beta_prec`` (how often the selection set is exactly the true
label's singleton) and the mean set size ``beta_size``.

Leave-one-out refits reuse the full fit's seed, so the comparison isolates
the effect of the dropped row, and the refits are independent of each other
(safe to parallelize; assembly is a deterministic reduction in index order).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .learners import LabeledDataset, Scorer
from .seeding import spawn_rng
from .selection import SelectionSet

__all__ = [
    "disjoint_fraction",
    "tail_instability",
    "LooScores",
    "compute_loo_scores",
    "delta_j_from_scores",
    "Pipeline",
    "delta_j_curve",
    "precision_and_size",
    "precision_and_size_from_mask",
    "StabilityReport",
    "write_delta_j_csv",
]

SCHEMA_VERSION = 1

FitFunction = Callable[[LabeledDataset, int], Scorer]
MaskRule = Callable[[np.ndarray], np.ndarray]


def disjoint_fraction(full_set: SelectionSet, loo_sets: Sequence[SelectionSet]) -> float:
    """Fraction of leave-one-out selection sets disjoint from the full-data set."""
    if len(loo_sets) == 0:
        raise ValueError("need at least one leave-one-out selection set")
    for s in loo_sets:
        if s.universe_size != full_set.universe_size:
            raise ValueError("all selection sets must share the same universe size")
    return sum(full_set.isdisjoint(s) for s in loo_sets) / len(loo_sets)


def tail_instability(p_full, p_loo: Sequence, eps: float) -> float:
    """Fraction of leave-one-out score vectors at distance >= ``eps`` from the
    full-data score vector (so ``eps = 0`` gives 1)."""
    full = np.asarray(p_full, dtype=float)
    loo = np.asarray(p_loo, dtype=float)
    if loo.ndim != 2 or loo.shape[0] == 0:
        raise ValueError("p_loo must be a nonempty sequence of score vectors")
    if loo.shape[1] != full.shape[0]:
        raise ValueError("score vectors must all have the same length")
    distances = np.linalg.norm(loo - full, axis=1)
    return float(np.mean(distances >= float(eps)))


@dataclass(frozen=True)
class LooScores:
    """Scores of the full fit and of K leave-one-out refits on a test grid.

    ``full`` has shape (T, L); ``loo`` has shape (K, T, L); ``dropped`` holds
    the 0-based training rows removed for each refit.
    """

    full: np.ndarray
    loo: np.ndarray
    dropped: np.ndarray


def compute_loo_scores(
    fit: FitFunction,
    data: LabeledDataset,
    test_points: np.ndarray,
    K: int,
    seed: int,
) -> LooScores:
    """Fit once on all of ``data`` and once per sampled dropped row.

    The K dropped rows are sampled uniformly without replacement (K = n
    exhausts them); every refit receives the same ``seed`` as the full fit so
    that only the dropped row differs.
    """
    if not 1 <= K <= data.n:
        raise ValueError(f"K must lie in 1..n, got K={K}, n={data.n}")
    test_points = np.asarray(test_points, dtype=float)
    full = np.asarray(fit(data, seed)(test_points), dtype=float)
    dropped = np.sort(spawn_rng(seed, "loo-drop").permutation(data.n)[:K])
    loo = np.empty((K,) + full.shape)
    for k, i in enumerate(dropped):
        loo[k] = fit(data.drop(int(i)), seed)(test_points)
    return LooScores(full=full, loo=loo, dropped=dropped)


def delta_j_from_scores(select_mask: MaskRule, scores: LooScores) -> np.ndarray:
    """Per-test-point disjoint fraction of a selection rule over LOO refits."""
    full_mask = np.asarray(select_mask(scores.full), dtype=bool)
    disjoint = np.empty((scores.loo.shape[0], full_mask.shape[0]), dtype=bool)
    for k in range(scores.loo.shape[0]):
        loo_mask = np.asarray(select_mask(scores.loo[k]), dtype=bool)
        disjoint[k] = ~np.any(full_mask & loo_mask, axis=-1)
    return disjoint.mean(axis=0)


@dataclass(frozen=True)
class Pipeline:
    """A classifier: a fit stage plus a batched selection rule.

    ``select_mask`` maps a (T, L) score matrix to a (T, L) boolean membership
    matrix, e.g. ``lambda s: inflated_argmax_mask(s, eps)``.
    """

    name: str
    fit: FitFunction
    select_mask: MaskRule


def delta_j_curve(
    classifier: Pipeline,
    data: LabeledDataset,
    test_points: np.ndarray,
    K: int,
    seed: int,
) -> np.ndarray:
    """Instability delta_j of ``classifier`` at each test point over K refits."""
    scores = compute_loo_scores(classifier.fit, data, test_points, K, seed)
    return delta_j_from_scores(classifier.select_mask, scores)


def precision_and_size(
    sets: Sequence[SelectionSet], labels: Sequence[int]
) -> tuple[float, float]:
    """(beta_prec, beta_size): fraction of sets equal to the true singleton,
    and mean set cardinality."""
    if len(sets) == 0:
        raise ValueError("need at least one selection set")
    if len(sets) != len(labels):
        raise ValueError("sets and labels must have equal length")
    exact = sum(len(s) == 1 and int(y) in s for s, y in zip(sets, labels))
    total = sum(len(s) for s in sets)
    return exact / len(sets), total / len(sets)


def precision_and_size_from_mask(mask: np.ndarray, labels) -> tuple[float, float]:
    """Batched variant of :func:`precision_and_size` on a (T, L) boolean mask."""
    mask = np.asarray(mask, dtype=bool)
    labels = np.asarray(labels, dtype=int)
    if mask.ndim != 2 or mask.shape[0] != labels.shape[0] or mask.shape[0] == 0:
        raise ValueError("mask must be (T, L) with one label per row, T >= 1")
    sizes = mask.sum(axis=1)
    hit = mask[np.arange(mask.shape[0]), labels - 1]
    return float(np.mean((sizes == 1) & hit)), float(sizes.mean())


@dataclass(frozen=True)
class StabilityReport:
    """One pipeline's empirical stability and accuracy on one experiment run.

    Rates are in [0, 1]; ``beta_size >= 1`` because selection sets are never
    empty.  ``bound_finite_b``/``bound_infinite_b`` carry the theoretical
    guarantee when one applies to the pipeline (inflated argmax over a bagged
    scorer), else None.  Standard-error convention throughout: sample standard
    deviation (ddof=1) divided by sqrt(count).
    """

    method: str
    delta_hat: float
    delta_j: np.ndarray
    tail_delta_hat: float
    beta_prec: float
    beta_size: float
    bound_finite_b: float | None
    bound_infinite_b: float | None
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        delta_j = np.asarray(self.delta_j, dtype=float)
        n = delta_j.shape[0]
        se = float(delta_j.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        return {
            "schema_version": SCHEMA_VERSION,
            "method": self.method,
            "delta_hat": float(self.delta_hat),
            "delta_hat_se": se,
            "max_delta_j": float(delta_j.max()),
            "tail_delta_hat": float(self.tail_delta_hat),
            "beta_prec": float(self.beta_prec),
            "beta_size": float(self.beta_size),
            "bound_finite_b": None if self.bound_finite_b is None else float(self.bound_finite_b),
            "bound_infinite_b": (
                None if self.bound_infinite_b is None else float(self.bound_infinite_b)
            ),
            "delta_j": [float(v) for v in delta_j],
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def summary(self) -> str:
        """Aligned human-readable digest (one line per metric)."""
        rows = [
            ("method", self.method),
            ("delta_hat", f"{self.delta_hat:.6f}"),
            ("max delta_j", f"{float(np.max(self.delta_j)):.6f}"),
            ("tail_delta_hat", f"{self.tail_delta_hat:.6f}"),
            ("beta_prec", f"{self.beta_prec:.6f}"),
            ("beta_size", f"{self.beta_size:.6f}"),
        ]
        if self.bound_finite_b is not None:
            rows.append(("bound (finite B)", f"{self.bound_finite_b:.6f}"))
        if self.bound_infinite_b is not None:
            rows.append(("bound (B -> inf)", f"{self.bound_infinite_b:.6f}"))
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def write_delta_j_csv(report: StabilityReport, path: "str | Path") -> None:
    """One row per test point, for external survival-curve plotting."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["test_point", "delta_j"])
        for j, value in enumerate(np.asarray(report.delta_j, dtype=float)):
            writer.writerow([j, repr(float(value))])
