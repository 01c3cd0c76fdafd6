"""Datasets and small dependency-free base learners emitting simplex scores.

Both learners return scorers mapping a feature vector (or a batch of them)
to a probability vector over the ``L`` classes.  Outputs always lie strictly
inside the simplex: a tiny additive smoothing (alpha = 1e-6) is folded in so
no coordinate is ever exactly 0, even when a class is absent from a
degenerate bag.  Fitting is deterministic given (data, seed, hyperparameters).

Row indices are 0-based; class labels are 1-based integers ``1..L``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = [
    "LabeledDataset",
    "Scorer",
    "softmax",
    "fit_nearest_centroid",
    "fit_multinomial_logistic",
    "softmax_cross_entropy",
    "make_gaussian_mixture",
    "load_csv",
    "NearestCentroidScorer",
    "SoftmaxLinearScorer",
]

Scorer = Callable[[np.ndarray], np.ndarray]

SMOOTHING_ALPHA = 1e-6


@dataclass(frozen=True)
class LabeledDataset:
    """n feature vectors with class labels in ``1..num_classes``.

    ``num_classes`` is declared, not inferred: dropping rows never changes it
    even if a class vanishes.  Instances are immutable (arrays are marked
    read-only).
    """

    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self) -> None:
        features = np.array(self.features, dtype=float)
        labels = np.array(self.labels, dtype=int)
        if features.ndim != 2:
            raise ValueError("features must be an n x d matrix")
        if labels.shape != (features.shape[0],):
            raise ValueError("labels must be one entry per feature row")
        if features.shape[0] < 1:
            raise ValueError("dataset must contain at least one row")
        if not np.all(np.isfinite(features)):
            raise ValueError("features contain non-finite entries")
        if int(self.num_classes) < 1:
            raise ValueError("num_classes must be >= 1")
        if labels.size and (labels.min() < 1 or labels.max() > int(self.num_classes)):
            raise ValueError("labels must lie in 1..num_classes")
        features.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "num_classes", int(self.num_classes))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    def drop(self, i: int) -> "LabeledDataset":
        """Leave-one-out view: all rows but row ``i`` (0-based), order kept.

        Later rows shift down by one, so ``drop(i)`` twice removes original
        rows ``i`` and ``i+1``.  Requires ``n >= 2``.
        """
        if self.n < 2:
            raise ValueError("cannot drop from a single-row dataset")
        if not 0 <= i < self.n:
            raise IndexError(f"row index {i} outside 0..{self.n - 1}")
        keep = np.arange(self.n) != i
        return LabeledDataset(self.features[keep], self.labels[keep], self.num_classes)

    def subset(self, rows: np.ndarray) -> "LabeledDataset":
        """Dataset restricted to ``rows`` (repeats allowed, e.g. bootstrap bags)."""
        rows = np.asarray(rows, dtype=int)
        return LabeledDataset(self.features[rows], self.labels[rows], self.num_classes)


def softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    """Numerically stable softmax along ``axis``."""
    z = np.asarray(z, dtype=float)
    shifted = z - z.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def _smooth(p: np.ndarray) -> np.ndarray:
    L = p.shape[-1]
    return (p + SMOOTHING_ALPHA) / (1.0 + L * SMOOTHING_ALPHA)


@dataclass(frozen=True)
class NearestCentroidScorer:
    centroids: np.ndarray  # (L, d)
    temperature: float

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d2 = ((x[..., None, :] - self.centroids) ** 2).sum(axis=-1)
        return _smooth(softmax(-d2 / self.temperature, axis=-1))


def fit_nearest_centroid(
    data: LabeledDataset, seed: int = 0, temperature: float = 2.0
) -> NearestCentroidScorer:
    """Class-centroid scorer: softmax of negative squared distances / temperature.

    Classes absent from ``data`` get the global mean as centroid, so the
    scorer is defined (and on the simplex) for every bag.  The fit is
    deterministic; ``seed`` exists only to satisfy the learner interface.
    """
    del seed
    if temperature <= 0.0:
        raise ValueError("temperature must be > 0")
    global_mean = data.features.mean(axis=0)
    centroids = np.tile(global_mean, (data.num_classes, 1))
    for label in range(1, data.num_classes + 1):
        rows = data.labels == label
        if rows.any():
            centroids[label - 1] = data.features[rows].mean(axis=0)
    return NearestCentroidScorer(centroids=centroids, temperature=float(temperature))


@dataclass(frozen=True)
class SoftmaxLinearScorer:
    weights: np.ndarray  # (L, d)
    bias: np.ndarray  # (L,)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return _smooth(softmax(x @ self.weights.T + self.bias, axis=-1))


def softmax_cross_entropy(
    weights: np.ndarray, bias: np.ndarray, x: np.ndarray, y: int
) -> tuple[float, np.ndarray, np.ndarray]:
    """Cross-entropy loss and its analytic gradient at one sample.

    ``y`` is a 1-based label.  Returns (loss, d loss/d weights, d loss/d bias):
    the gradient is ``(p - onehot_y)`` outer ``x`` for the weights and
    ``p - onehot_y`` for the bias.
    """
    p = softmax(weights @ x + bias)
    loss = -float(np.log(p[y - 1]))
    err = p.copy()
    err[y - 1] -= 1.0
    return loss, np.outer(err, x), err


def fit_multinomial_logistic(
    data: LabeledDataset, seed: int, epochs: int = 50, lr: float = 0.1
) -> SoftmaxLinearScorer:
    """Softmax-linear model trained by seeded per-sample SGD.

    Weights start at zero (zero epochs therefore gives the uniform scorer);
    each epoch visits the rows in a fresh seeded shuffle.  Deliberately a
    bare-bones, noise-sensitive learner, useful as an unstable contrast to
    the centroid scorer.
    """
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    if lr <= 0.0:
        raise ValueError("lr must be > 0")
    rng = np.random.default_rng(seed)
    L, d = data.num_classes, data.num_features
    weights = np.zeros((L, d))
    bias = np.zeros(L)
    for _ in range(epochs):
        for i in rng.permutation(data.n):
            x = data.features[i]
            _, grad_w, grad_b = softmax_cross_entropy(weights, bias, x, int(data.labels[i]))
            weights -= lr * grad_w
            bias -= lr * grad_b
    return SoftmaxLinearScorer(weights=weights, bias=bias)


def make_gaussian_mixture(
    n: int,
    d: int,
    num_classes: int,
    overlap: float = 0.5,
    seed: int = 0,
) -> LabeledDataset:
    """Synthetic isotropic Gaussian mixture with class means on a scaled simplex.

    Class ``l`` is centered at ``s * e_l`` with ``s = 6 * (1 - overlap)`` and
    unit noise, so ``overlap=0`` gives essentially separable classes and
    ``overlap=1`` makes them indistinguishable.  Requires ``d >= num_classes``.
    """
    if not 0.0 <= overlap <= 1.0:
        raise ValueError("overlap must lie in [0, 1]")
    if d < num_classes:
        raise ValueError("need d >= num_classes to place the class means")
    rng = np.random.default_rng(seed)
    scale = 6.0 * (1.0 - overlap)
    labels = rng.integers(1, num_classes + 1, size=n)
    means = np.zeros((num_classes, d))
    means[np.arange(num_classes), np.arange(num_classes)] = scale
    features = means[labels - 1] + rng.standard_normal((n, d))
    return LabeledDataset(features=features, labels=labels, num_classes=num_classes)


def load_csv(path: "str | Path", label_column: str, num_classes: int | None = None) -> LabeledDataset:
    """Read a headered CSV: one integer label column (1-based), the rest numeric
    features.  ``num_classes`` defaults to the largest label seen."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or label_column not in reader.fieldnames:
            raise ValueError(f"CSV {path} has no column named {label_column!r}")
        feature_names = [c for c in reader.fieldnames if c != label_column]
        rows, labels = [], []
        for record in reader:
            try:
                labels.append(int(record[label_column]))
                rows.append([float(record[c]) for c in feature_names])
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}, line {reader.line_num}: {exc}") from exc
    if not rows:
        raise ValueError(f"CSV {path} contains no data rows")
    if num_classes is None:
        num_classes = max(labels)
    return LabeledDataset(
        features=np.asarray(rows, dtype=float),
        labels=np.asarray(labels, dtype=int),
        num_classes=num_classes,
    )
