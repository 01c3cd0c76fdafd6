"""Reproducible desk-scale experiments: set-size simulation, leave-one-out
stability comparison, and the L=3 selection-region map.

Every experiment is a pure function of its config (seed included): identical
config produces identical output bytes.  Nothing here reads the clock or any
global RNG state.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from functools import partial
from pathlib import Path
from typing import Sequence

import numpy as np

from .ensemble import BagScheme, fit_bagged, stability_bound
from .learners import (
    LabeledDataset,
    fit_multinomial_logistic,
    fit_nearest_centroid,
    load_csv,
    make_gaussian_mixture,
    softmax,
)
from .metrics import (
    SCHEMA_VERSION,
    LooScores,
    StabilityReport,
    compute_loo_scores,
    delta_j_from_scores,
    precision_and_size_from_mask,
    write_delta_j_csv,
)
from .seeding import spawn_rng, spawn_seed
from .selection import argmax_mask, fixed_margin_mask, inflated_argmax_mask

__all__ = [
    "SizeSimulationRow",
    "simulate_set_sizes",
    "write_size_table_csv",
    "write_size_table_json",
    "LooConfig",
    "run_loo_experiment",
    "write_loo_reports",
    "region_map_rows",
    "write_region_map_csv",
]


@dataclass(frozen=True)
class SizeSimulationRow:
    """Mean selection-set sizes of the two rules at one class count."""

    L: int
    mean_inflated: float
    se_inflated: float
    mean_margin: float
    se_margin: float
    ratio: float


def simulate_set_sizes(
    L_values: Sequence[int],
    eps: float = 0.1,
    draws: int = 1000,
    seed: int = 0,
) -> list[SizeSimulationRow]:
    """Average set sizes of inflated argmax vs fixed margin on softmax-of-Gaussian
    scores.

    Each draw is the softmax of a standard Gaussian vector in ``R^L``.  The
    ratio column is mean inflated size over mean margin size; standard errors
    use sample std (ddof=1) / sqrt(draws).
    """
    if draws < 2:
        raise ValueError("draws must be >= 2")
    rows = []
    for L in L_values:
        if L < 1:
            raise ValueError("every L must be >= 1")
        rng = spawn_rng(seed, "sizes", int(L))
        scores = softmax(rng.standard_normal((draws, L)), axis=1)
        inflated = inflated_argmax_mask(scores, eps).sum(axis=1).astype(float)
        margin = fixed_margin_mask(scores, eps).sum(axis=1).astype(float)
        rows.append(
            SizeSimulationRow(
                L=int(L),
                mean_inflated=float(inflated.mean()),
                se_inflated=float(inflated.std(ddof=1) / np.sqrt(draws)),
                mean_margin=float(margin.mean()),
                se_margin=float(margin.std(ddof=1) / np.sqrt(draws)),
                ratio=float(inflated.mean() / margin.mean()),
            )
        )
    return rows


def write_size_table_csv(rows: Sequence[SizeSimulationRow], path: "str | Path") -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["L", "mean_inflated", "se_inflated", "mean_margin", "se_margin", "ratio"]
        )
        for r in rows:
            writer.writerow(
                [
                    r.L,
                    repr(r.mean_inflated),
                    repr(r.se_inflated),
                    repr(r.mean_margin),
                    repr(r.se_margin),
                    repr(r.ratio),
                ]
            )


def write_size_table_json(rows: Sequence[SizeSimulationRow], path: "str | Path") -> None:
    payload = {"schema_version": SCHEMA_VERSION, "rows": [asdict(r) for r in rows]}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


@dataclass(frozen=True)
class LooConfig:
    """Configuration of the leave-one-out stability comparison.

    Data is either the built-in Gaussian mixture (``csv_path=None``) or a CSV
    with a named label column, in which case the first ``n_test`` rows become
    the test grid and the rest the training set.
    """

    seed: int
    n: int = 200
    d: int = 5
    L: int = 5
    overlap: float = 0.5
    scheme_kind: str = "subbag"
    m: int = 100
    B: int = 100
    eps: float = 0.05
    tie_tol: float = 1e-12
    K: int = 50
    n_test: int = 100
    learner: str = "centroid"
    temperature: float = 2.0
    epochs: int = 50
    lr: float = 0.1
    csv_path: str | None = None
    label_column: str = "label"

    def __post_init__(self) -> None:
        positive = {
            "n": self.n, "d": self.d, "L": self.L, "m": self.m, "B": self.B,
            "eps": self.eps, "K": self.K, "n_test": self.n_test,
            "temperature": self.temperature, "lr": self.lr,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ValueError(f"config field {name!r} must be positive, got {value!r}")
        if self.tie_tol < 0 or self.epochs < 0:
            raise ValueError("config fields 'tie_tol' and 'epochs' must be nonnegative")
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError(f"config field 'overlap' must lie in [0, 1], got {self.overlap!r}")

    def to_dict(self) -> dict:
        return asdict(self)


def _base_fit(config: LooConfig):
    if config.learner == "centroid":
        return partial(fit_nearest_centroid, temperature=config.temperature)
    if config.learner == "logistic":
        return partial(fit_multinomial_logistic, epochs=config.epochs, lr=config.lr)
    raise ValueError(f"unknown learner {config.learner!r} (expected centroid or logistic)")


def _load_data(config: LooConfig) -> tuple[LabeledDataset, LabeledDataset]:
    if config.csv_path is not None:
        full = load_csv(config.csv_path, config.label_column)
        if full.n <= config.n_test:
            raise ValueError("CSV must contain more than n_test rows")
        test_rows = np.arange(config.n_test)
        train_rows = np.arange(config.n_test, full.n)
        return full.subset(train_rows), full.subset(test_rows)
    train = make_gaussian_mixture(
        config.n, config.d, config.L, config.overlap, seed=spawn_seed(config.seed, "train")
    )
    test = make_gaussian_mixture(
        config.n_test, config.d, config.L, config.overlap, seed=spawn_seed(config.seed, "test")
    )
    return train, test


def _tail_hat(scores: LooScores, eps: float) -> float:
    distances = np.linalg.norm(scores.loo - scores.full[None, :, :], axis=2)
    return float((distances >= eps).mean())


def run_loo_experiment(config: LooConfig) -> dict[str, StabilityReport]:
    """Compare three pipelines on shared data, seeds, and dropped rows.

    1. plain argmax of the base learner,
    2. plain argmax of the subbagged/bootstrapped learner,
    3. inflated argmax of the same bagged learner,

    each reported with its per-test-point instability, score-level tail
    instability at the config's eps, precision, and set size.  The third
    pipeline also carries its theoretical stability bounds.
    """
    train, test = _load_data(config)
    scheme = BagScheme(kind=config.scheme_kind, m=config.m, B=config.B)
    base_fit = _base_fit(config)

    def bagged_fit(data: LabeledDataset, seed: int):
        return fit_bagged(base_fit, data, scheme, seed)

    scores_base = compute_loo_scores(base_fit, train, test.features, config.K, config.seed)
    scores_bag = compute_loo_scores(bagged_fit, train, test.features, config.K, config.seed)

    arg_rule = partial(argmax_mask, tie_tol=config.tie_tol)
    inflated_rule = partial(inflated_argmax_mask, eps=config.eps)

    bound_inf = stability_bound(config.eps, train.n, train.num_classes, scheme, finite_B=False)
    bound_fin = stability_bound(config.eps, train.n, train.num_classes, scheme, finite_B=True)
    echo = config.to_dict()

    reports = {}
    for method, scores, rule, bounds in (
        ("base_argmax", scores_base, arg_rule, (None, None)),
        ("subbag_argmax", scores_bag, arg_rule, (None, None)),
        ("subbag_inflated", scores_bag, inflated_rule, (bound_fin, bound_inf)),
    ):
        delta_j = delta_j_from_scores(rule, scores)
        beta_prec, beta_size = precision_and_size_from_mask(rule(scores.full), test.labels)
        reports[method] = StabilityReport(
            method=method,
            delta_hat=float(delta_j.mean()),
            delta_j=delta_j,
            tail_delta_hat=_tail_hat(scores, config.eps),
            beta_prec=beta_prec,
            beta_size=beta_size,
            bound_finite_b=bounds[0],
            bound_infinite_b=bounds[1],
            config=echo,
        )
    return reports


def write_loo_reports(reports: dict[str, StabilityReport], out_dir: "str | Path") -> list[Path]:
    """Write one JSON report and one delta_j CSV per pipeline; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for method in sorted(reports):
        json_path = out_dir / f"{method}.json"
        json_path.write_text(reports[method].to_json())
        csv_path = out_dir / f"{method}_delta_j.csv"
        write_delta_j_csv(reports[method], csv_path)
        written.extend([json_path, csv_path])
    return written


def region_map_rows(eps: float, grid_resolution: int) -> list[tuple[float, float, float, int]]:
    """Inflated-argmax membership over a barycentric grid on the L=3 simplex.

    Each grid point (w1, w2, w3) with w1+w2+w3 = 1 is labeled with the
    selected set encoded as a bitmask (bit j-1 set iff class j selected), for
    external plotting of the selection regions.
    """
    if grid_resolution < 2:
        raise ValueError("grid_resolution must be >= 2")
    g = int(grid_resolution)
    rows = []
    points = []
    for i in range(g + 1):
        for j in range(g + 1 - i):
            points.append((i / g, j / g, (g - i - j) / g))
    scores = np.asarray(points, dtype=float)
    masks = inflated_argmax_mask(scores, eps)
    weights = 1 << np.arange(3)
    codes = masks @ weights
    for (w1, w2, w3), code in zip(points, codes):
        rows.append((w1, w2, w3, int(code)))
    return rows


def write_region_map_csv(rows, path: "str | Path") -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["w1", "w2", "w3", "selection_mask"])
        for w1, w2, w3, code in rows:
            writer.writerow([repr(float(w1)), repr(float(w2)), repr(float(w3)), code])
