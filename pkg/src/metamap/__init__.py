"""Invariant densities and metastable structure of piecewise expanding
interval maps, computed by Ulam discretization of the transfer operator."""

from .map_model import (
    Branch,
    HypothesisReport,
    Interval,
    PerturbationFamily,
    PiecewiseMap,
    branch_preimages,
    distortion,
    evaluate,
    infinitesimal_holes,
    min_expansion,
    validate_hypotheses,
)
from .transfer_operator import (
    DensityGrid,
    LasotaYorkeConstants,
    UlamMatrix,
    apply_transfer,
    build_ulam,
    cesaro_density,
    lasota_yorke_constants,
)
from .spectral import (
    EscapeReport,
    SpectralReport,
    escape_rate,
    invariant_density,
    second_eigenpair,
    spectral_report,
)
from .bv_analysis import (
    PostcriticalHierarchy,
    SaltusDecomposition,
    jump_decay_profile,
    postcritical_hierarchy,
    saltus_decompose,
    total_variation,
)
from .metastability import (
    HoleReport,
    SweepRow,
    analytic_lhr,
    compute_holes,
    convergence_study,
    flux_balance,
    hole_measures,
    markov_stationary,
    predict_mixture,
)

__all__ = [
    "Branch", "HypothesisReport", "Interval", "PerturbationFamily", "PiecewiseMap",
    "branch_preimages", "distortion", "evaluate", "infinitesimal_holes",
    "min_expansion", "validate_hypotheses",
    "DensityGrid", "LasotaYorkeConstants", "UlamMatrix",
    "apply_transfer", "build_ulam", "cesaro_density", "lasota_yorke_constants",
    "EscapeReport", "SpectralReport", "escape_rate", "invariant_density",
    "second_eigenpair", "spectral_report",
    "PostcriticalHierarchy", "SaltusDecomposition", "jump_decay_profile",
    "postcritical_hierarchy", "saltus_decompose", "total_variation",
    "HoleReport", "SweepRow", "analytic_lhr", "compute_holes",
    "convergence_study", "flux_balance", "hole_measures", "markov_stationary",
    "predict_mixture",
]

__version__ = "0.1.0"
