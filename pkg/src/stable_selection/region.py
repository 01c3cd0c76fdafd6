"""Definition-level geometry of the margin regions behind the inflated argmax.

For each class ``j``, the region ``R_j`` is the closed convex set of score
vectors whose j-th entry exceeds every other entry by at least
``eps/sqrt(2)``.  The inflated argmax is, by definition, the set of ``j``
whose distance to ``R_j`` is strictly below ``eps``.  This module computes
those distances from first principles: the projection of ``w`` onto ``R_j``
is characterized by a unique anchor ``a`` solving

    w_j = a + eps/sqrt(2) - sum_{k != j} (w_k - a)_+,

with projected vector ``v_j = a + eps/sqrt(2)`` and ``v_k = min(a, w_k)``
for ``k != j``.  The anchor map is strictly decreasing, so ``a`` is found by
bisection, which is unconditionally safe.

Everything here is deliberately independent of the closed-form threshold in
:mod:`stable_selection.selection`; the two routes are checked against each
other in the test suite and the ``verify`` CLI command, and a substitution of
either side would defeat the point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .selection import SQRT2, SelectionSet, _as_scores_1d, _check_eps, as_scores

__all__ = [
    "ProjectionResult",
    "solve_anchor",
    "project_onto_region",
    "region_distances",
    "inflated_argmax_by_definition",
]

_ANCHOR_TOL = 1e-12
_MAX_ITER = 200


@dataclass(frozen=True)
class ProjectionResult:
    """Projection of a score vector onto one margin region."""

    anchor: float
    projected: np.ndarray
    distance: float


def _anchor_residual(w: np.ndarray, eps: float, j: int, a: float) -> float:
    """f(a) = w_j - a + sum_{k != j}(w_k - a)_+ - eps/sqrt(2); strictly decreasing."""
    pos = np.maximum(w - a, 0.0)
    pos_other = pos.sum() - max(w[j - 1] - a, 0.0)
    return float(w[j - 1] - a + pos_other - eps / SQRT2)


def solve_anchor(w, eps: float, j: int) -> float:
    """Bisect the anchor equation for class ``j`` (1-based).

    The bracket ``[min(w) - eps - spread, max(w) + eps]`` always straddles
    the root; failure to straddle signals a bug, not a user error.
    """
    arr = _as_scores_1d(w)
    eps = _check_eps(eps)
    j = int(j)
    if not 1 <= j <= arr.shape[0]:
        raise ValueError(f"class label j={j} outside 1..{arr.shape[0]}")
    spread = float(arr.max() - arr.min())
    lo = float(arr.min()) - eps - spread
    hi = float(arr.max()) + eps
    if not (_anchor_residual(arr, eps, j, lo) > 0.0 >= _anchor_residual(arr, eps, j, hi)):
        raise RuntimeError("anchor bracket failed to straddle the root")
    for _ in range(_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if hi - lo <= _ANCHOR_TOL:
            break
        if _anchor_residual(arr, eps, j, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def project_onto_region(w, eps: float, j: int) -> ProjectionResult:
    """Project ``w`` onto the region where class ``j`` wins by ``eps/sqrt(2)``.

    If ``w`` is already in the region the projection is ``w`` itself and the
    distance is 0 (up to anchor tolerance).
    """
    arr = _as_scores_1d(w)
    a = solve_anchor(arr, eps, j)
    v = np.minimum(arr, a)
    v[j - 1] = a + _check_eps(eps) / SQRT2
    return ProjectionResult(anchor=a, projected=v, distance=float(np.linalg.norm(arr - v)))


def region_distances(w, eps: float) -> np.ndarray:
    """Distances from each row of ``w`` to every region, shape ``(..., L)``.

    Vectorized bisection of the anchor equation for all (row, class) pairs at
    once; memory is kept bounded by chunking rows.
    """
    arr = as_scores(w)
    eps = _check_eps(eps)
    batch = arr.reshape(-1, arr.shape[-1])
    n, L = batch.shape
    out = np.empty((n, L))
    chunk = max(1, 2_000_000 // (L * L))
    for start in range(0, n, chunk):
        out[start : start + chunk] = _distances_chunk(batch[start : start + chunk], eps)
    return out.reshape(arr.shape)


def _distances_chunk(W: np.ndarray, eps: float) -> np.ndarray:
    n, L = W.shape
    mx = W.max(axis=1)
    mn = W.min(axis=1)
    lo = np.broadcast_to((mn - eps - (mx - mn))[:, None], (n, L)).copy()
    hi = np.broadcast_to((mx + eps)[:, None], (n, L)).copy()
    margin = eps / SQRT2
    for _ in range(_MAX_ITER):
        if float((hi - lo).max()) <= _ANCHOR_TOL:
            break
        mid = 0.5 * (lo + hi)
        # f(a)[i, j] for a = mid[i, j]: own-coordinate term taken out of the sum
        diff = np.maximum(W[:, None, :] - mid[:, :, None], 0.0)
        f = W - mid + diff.sum(axis=2) - np.maximum(W - mid, 0.0) - margin
        pos = f > 0.0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    a = 0.5 * (lo + hi)
    gap = np.maximum(W[:, None, :] - a[:, :, None], 0.0)
    sq = gap * gap
    own = np.maximum(W - a, 0.0)
    d2 = (W - a - margin) ** 2 + sq.sum(axis=2) - own * own
    return np.sqrt(np.maximum(d2, 0.0))


def inflated_argmax_by_definition(w, eps: float) -> SelectionSet:
    """Membership straight from the definition: ``{j : dist(w, R_j) < eps}``."""
    arr = _as_scores_1d(w)
    return SelectionSet.from_mask(region_distances(arr, eps) < _check_eps(eps))
