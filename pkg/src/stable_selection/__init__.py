"""Stable set-valued multiclass selection.

Selection rules (the inflated argmax and baselines), an independent
projection-based oracle for them, bagged scorers with selection-stability
bound calculators, small simplex-output base learners, leave-one-out
stability metrics, and reproducible experiment drivers.
"""

from .ensemble import (
    BagFitError,
    BaggedScorer,
    BagScheme,
    fit_bagged,
    p_nm,
    sample_bag,
    stability_bound,
)
from .learners import (
    LabeledDataset,
    fit_multinomial_logistic,
    fit_nearest_centroid,
    load_csv,
    make_gaussian_mixture,
    softmax,
)
from .metrics import (
    Pipeline,
    StabilityReport,
    compute_loo_scores,
    delta_j_curve,
    disjoint_fraction,
    precision_and_size,
    tail_instability,
    write_delta_j_csv,
)
from .region import (
    ProjectionResult,
    inflated_argmax_by_definition,
    project_onto_region,
    region_distances,
    solve_anchor,
)
from .selection import (
    InflationParams,
    SelectionSet,
    argmax_set,
    c_epsilon,
    fixed_margin,
    in_region,
    inflated_argmax,
    inflated_argmax_mask,
    is_simplex_point,
    k_hat,
    t_epsilon,
)

__version__ = "0.1.0"

__all__ = [
    "BagFitError",
    "BaggedScorer",
    "BagScheme",
    "InflationParams",
    "LabeledDataset",
    "Pipeline",
    "ProjectionResult",
    "SelectionSet",
    "StabilityReport",
    "argmax_set",
    "c_epsilon",
    "compute_loo_scores",
    "delta_j_curve",
    "disjoint_fraction",
    "fit_bagged",
    "fit_multinomial_logistic",
    "fit_nearest_centroid",
    "fixed_margin",
    "in_region",
    "inflated_argmax",
    "inflated_argmax_by_definition",
    "inflated_argmax_mask",
    "is_simplex_point",
    "k_hat",
    "load_csv",
    "make_gaussian_mixture",
    "p_nm",
    "precision_and_size",
    "project_onto_region",
    "region_distances",
    "sample_bag",
    "softmax",
    "solve_anchor",
    "stability_bound",
    "t_epsilon",
    "tail_instability",
    "write_delta_j_csv",
]
