"""Set-valued selection rules on real score vectors.

The central operator is the inflated argmax: for an inflation radius
``eps > 0``, class ``j`` is selected iff the score vector lies within
Euclidean distance ``eps`` of the region where class ``j`` beats every other
class by a margin of ``eps/sqrt(2)``.  Unlike the plain argmax, the inflated
argmax is eps-compatible: any two score vectors closer than ``eps`` produce
intersecting selection sets, which is what makes it usable as the selection
stage of a stability-guaranteed classification pipeline.

Membership is computed in closed form.  Writing ``w_[1] >= ... >= w_[L]`` for
the order statistics of ``w``, let

    k_hat = max{ k : (sum_{l<=k} (w_[l]-w_[k]))^2
                     + sum_{l<=k} (w_[l]-w_[k])^2  <= eps^2 }

and let ``A1``/``A2`` be the mean and mean square of the top ``k_hat`` scores.
The water level ``c_eps`` solves

    (sum_j (w_j - c)_+)^2 + sum_j (w_j - c)_+^2 = eps^2,

with closed form ``c_eps = A1 - sqrt((A1^2 - A2 + eps^2/k_hat)/(k_hat+1))``,
and the selection threshold is

    t_eps = c_eps + eps/sqrt(2) - sum_j (w_j - c_eps)_+,

with class ``j`` selected iff ``w_j > t_eps`` (strict; the selected set is
open at the boundary).  An independent definition-level implementation via
projection distances lives in :mod:`stable_selection.region` and is used as
the oracle in the test suite.

Conventions: class labels are 1-based (``1..L``); every rule returns a
nonempty :class:`SelectionSet` that contains all exact maximizers.  Scores
are arbitrary finite reals; they are not required to lie on the probability
simplex (use :func:`is_simplex_point` to check when a pipeline needs it).
All functions are pure and thread-safe.
"""

from __future__ import annotations

import warnings
from collections.abc import Iterable, Iterator
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SelectionSet",
    "InflationParams",
    "as_scores",
    "is_simplex_point",
    "argmax_set",
    "argmax_mask",
    "k_hat",
    "c_epsilon",
    "t_epsilon",
    "inflated_argmax",
    "inflated_argmax_mask",
    "fixed_margin",
    "fixed_margin_mask",
    "in_region",
]

SQRT2 = float(np.sqrt(2.0))


def as_scores(w, *, name: str = "w") -> np.ndarray:
    """Validate and coerce a score vector (or a batch of them, rows last axis).

    Entries must be finite; the last axis must have length >= 1.
    """
    arr = np.asarray(w, dtype=float)
    if arr.ndim == 0:
        raise ValueError(f"{name} must be a vector of scores, got a scalar")
    if arr.shape[-1] < 1:
        raise ValueError(f"{name} must contain at least one score")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def _as_scores_1d(w, *, name: str = "w") -> np.ndarray:
    arr = as_scores(w, name=name)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not np.isfinite(eps) or eps <= 0.0:
        raise ValueError(f"eps must be a positive finite real, got {eps!r}")
    return eps


def is_simplex_point(w, tol: float = 1e-9) -> bool:
    """True iff ``w`` has nonnegative entries summing to 1, within ``tol``."""
    arr = _as_scores_1d(w)
    return bool(np.all(arr >= -tol) and abs(arr.sum() - 1.0) <= tol)


@dataclass(frozen=True)
class SelectionSet:
    """A nonempty set of candidate class labels out of ``1..universe_size``."""

    members: frozenset[int]
    universe_size: int

    def __post_init__(self) -> None:
        members = frozenset(int(j) for j in self.members)
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "universe_size", int(self.universe_size))
        if self.universe_size < 1:
            raise ValueError("universe_size must be >= 1")
        if not members:
            raise ValueError("selection sets are never empty")
        if not all(1 <= j <= self.universe_size for j in members):
            raise ValueError("members must be class labels in 1..universe_size")

    @classmethod
    def from_mask(cls, mask) -> "SelectionSet":
        """Build from a boolean membership mask (position ``i`` <-> label ``i+1``)."""
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim != 1:
            raise ValueError("mask must be one-dimensional")
        return cls(frozenset(int(i) + 1 for i in np.flatnonzero(mask)), mask.shape[0])

    @classmethod
    def of(cls, labels: Iterable[int], universe_size: int) -> "SelectionSet":
        return cls(frozenset(labels), universe_size)

    def to_mask(self) -> np.ndarray:
        mask = np.zeros(self.universe_size, dtype=bool)
        mask[self.indices() - 1] = True
        return mask

    def indices(self) -> np.ndarray:
        """Sorted 1-based labels as an int array."""
        return np.array(sorted(self.members), dtype=int)

    def bitmask(self) -> int:
        """Integer encoding with bit ``j-1`` set iff label ``j`` is selected."""
        out = 0
        for j in self.members:
            out |= 1 << (j - 1)
        return out

    def intersects(self, other: "SelectionSet") -> bool:
        return not self.members.isdisjoint(other.members)

    def isdisjoint(self, other: "SelectionSet") -> bool:
        return self.members.isdisjoint(other.members)

    def issubset(self, other: "SelectionSet") -> bool:
        return self.members.issubset(other.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.members))

    def __contains__(self, label: object) -> bool:
        return label in self.members

    def __str__(self) -> str:
        return "{" + ", ".join(str(j) for j in sorted(self.members)) + "}"


@dataclass(frozen=True)
class InflationParams:
    """Inflation radius ``epsilon`` plus a tie tolerance for argmax comparisons.

    ``tie_tol`` is only consumed by :func:`argmax_set`-style comparisons in
    pipelines; inflated-argmax membership itself is evaluated with exact
    floating comparison (the selected set is open at its boundary, and adding
    a tolerance there would break the singleton characterization).
    """

    epsilon: float
    tie_tol: float = 1e-12

    def __post_init__(self) -> None:
        object.__setattr__(self, "epsilon", _check_eps(self.epsilon))
        tie_tol = float(self.tie_tol)
        if not np.isfinite(tie_tol) or tie_tol < 0.0:
            raise ValueError(f"tie_tol must be a nonnegative real, got {tie_tol!r}")
        object.__setattr__(self, "tie_tol", tie_tol)
        if tie_tol > self.epsilon / 100.0:
            warnings.warn(
                f"tie_tol={tie_tol:g} is not small relative to epsilon={self.epsilon:g}; "
                "expected tie_tol << epsilon",
                stacklevel=2,
            )


def _coerce_eps(params: "InflationParams | float") -> float:
    if isinstance(params, InflationParams):
        return params.epsilon
    return _check_eps(params)


def argmax_mask(w, tie_tol: float = 0.0) -> np.ndarray:
    """Boolean mask of entries within ``tie_tol`` of the row maximum."""
    arr = as_scores(w)
    tie_tol = float(tie_tol)
    if tie_tol < 0.0:
        raise ValueError("tie_tol must be >= 0")
    return arr >= arr.max(axis=-1, keepdims=True) - tie_tol


def argmax_set(w, tie_tol: float = 0.0) -> SelectionSet:
    """All labels whose score is within ``tie_tol`` of the maximum (never empty)."""
    return SelectionSet.from_mask(argmax_mask(_as_scores_1d(w), tie_tol))


def _top_stats(w: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per row: (k_hat, A1, A2) for the top-``k_hat`` order statistics.

    The admissibility condition is monotone along k (the left-hand side is
    nondecreasing), so k_hat is the last k where it holds; k=1 always does.
    """
    s = -np.sort(-w, axis=-1)
    ks = np.arange(1, w.shape[-1] + 1, dtype=float)
    cs = np.cumsum(s, axis=-1)
    cs2 = np.cumsum(s * s, axis=-1)
    head = cs - ks * s
    head2 = np.maximum(cs2 - 2.0 * s * cs + ks * s * s, 0.0)
    ok = head * head + head2 <= eps * eps
    khat = np.max(np.where(ok, ks.astype(int), 1), axis=-1)
    idx = khat[..., None] - 1
    a1 = np.take_along_axis(cs, idx, axis=-1)[..., 0] / khat
    a2 = np.take_along_axis(cs2, idx, axis=-1)[..., 0] / khat
    return khat, a1, a2


def k_hat(w, eps: float):
    """Number of top order statistics active in the closed form (1..L).

    Accepts a single score vector or a batch (rows on the last axis); returns
    an int for 1-D input, an int array otherwise.
    """
    arr = as_scores(w)
    eps = _check_eps(eps)
    khat, _, _ = _top_stats(arr, eps)
    return int(khat) if arr.ndim == 1 else khat


def _f_w(w: np.ndarray, c: float, eps: float) -> float:
    pos = np.maximum(w - c, 0.0)
    return float(pos.sum() ** 2 + (pos * pos).sum() - eps * eps)


def _c_bisect(w: np.ndarray, eps: float) -> float:
    """Solve f_w(c) = eps^2 by bisection; f_w >= 2(max-c)^2 brackets the root
    inside (max - eps, max)."""
    hi = float(w.max())
    lo = hi - eps
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _f_w(w, mid, eps) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def c_epsilon(w, eps: float):
    """Water level: the unique ``c`` with ``(sum(w-c)_+)^2 + sum((w-c)_+^2) = eps^2``.

    Computed from the closed form, with a bisection fallback where the
    discriminant cancels and a Newton polish pass; the defining residual is
    then ~1e-15 * eps^2 unless eps is so small relative to the score
    magnitudes that ``w - c`` itself runs out of mantissa (eps/|w| near
    1e-9).  Always ``c < max(w)``.
    """
    arr = as_scores(w)
    eps = _check_eps(eps)
    batch = arr.reshape(-1, arr.shape[-1])
    khat, a1, a2 = _top_stats(batch, eps)
    var = np.maximum(a2 - a1 * a1, 0.0)
    num = eps * eps / khat - var
    scale = eps * eps / khat + var
    c = a1 - np.sqrt(np.maximum(num, 0.0) / (khat + 1.0))
    bad = num < 1e-12 * scale
    if np.any(bad):
        for i in np.flatnonzero(bad):
            c[i] = _c_bisect(batch[i], eps)
    # one Newton polish pass: the closed form's cancellation error grows with
    # k_hat and |w|/eps; f' = -2 S (m+1) with m active coordinates, and the
    # top coordinate keeps S > 0
    pos = np.maximum(batch - c[:, None], 0.0)
    S = pos.sum(axis=1)
    f = S * S + (pos * pos).sum(axis=1)
    active = (pos > 0.0).sum(axis=1)
    c += (f - eps * eps) / (2.0 * S * (active + 1.0))
    return float(c[0]) if arr.ndim == 1 else c.reshape(arr.shape[:-1])


def t_epsilon(w, eps: float):
    """Selection threshold ``t = c + eps/sqrt(2) - sum_j (w_j - c)_+``.

    Always ``t <= c``; both are nonincreasing in ``eps`` and nondecreasing in
    ``w`` (coordinatewise).
    """
    arr = as_scores(w)
    eps = _check_eps(eps)
    batch = arr.reshape(-1, arr.shape[-1])
    c = np.atleast_1d(c_epsilon(batch, eps))
    pos = np.maximum(batch - c[:, None], 0.0)
    t = c + eps / SQRT2 - pos.sum(axis=-1)
    return float(t[0]) if arr.ndim == 1 else t.reshape(arr.shape[:-1])


def inflated_argmax_mask(w, eps: float) -> np.ndarray:
    """Boolean membership mask of the inflated argmax (batched over rows)."""
    arr = as_scores(w)
    eps = _check_eps(eps)
    t = np.asarray(t_epsilon(arr, eps))
    return arr > t[..., None]


def inflated_argmax(w, params: "InflationParams | float") -> SelectionSet:
    """Inflated argmax of a score vector: ``{j : w_j > t_eps(w)}``.

    Nonempty, contains every exact maximizer, and shrinks to the plain argmax
    as ``eps`` decreases.
    """
    arr = _as_scores_1d(w)
    return SelectionSet.from_mask(inflated_argmax_mask(arr, _coerce_eps(params)))


def fixed_margin_mask(w, eps: float) -> np.ndarray:
    """Boolean mask of the fixed-margin rule ``{j : w_j > max(w) - eps/sqrt(2)}``."""
    arr = as_scores(w)
    eps = _check_eps(eps)
    return arr > arr.max(axis=-1, keepdims=True) - eps / SQRT2


def fixed_margin(w, eps: float) -> SelectionSet:
    """Fixed-margin baseline rule; always a superset of the inflated argmax."""
    arr = _as_scores_1d(w)
    return SelectionSet.from_mask(fixed_margin_mask(arr, eps))


def in_region(w, eps: float, j: int) -> bool:
    """True iff ``w_j >= max_{l != j} w_l + eps/sqrt(2)`` (closed inequality).

    For ``L = 1`` the max over the empty set is -inf, so the answer is True.
    Equivalent to the inflated argmax of ``w`` being exactly ``{j}``.
    """
    arr = _as_scores_1d(w)
    eps = _check_eps(eps)
    j = int(j)
    if not 1 <= j <= arr.shape[0]:
        raise ValueError(f"class label j={j} outside 1..{arr.shape[0]}")
    if arr.shape[0] == 1:
        return True
    others = np.delete(arr, j - 1)
    return bool(arr[j - 1] >= others.max() + eps / SQRT2)
