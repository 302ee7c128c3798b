"""Reservoir sliced Wasserstein distance toolkit.

Distribution matching with a low-variance sliced estimator that reuses
informative projection directions across optimization steps, plus a plain
Monte Carlo baseline, a synthetic benchmark harness, and a differentiable
ASC-CDL color-correction application.
"""

from .estimator import EstimateResult, ReswdConfig, new_reservoir, reswd_step, swd_estimate
from .numeric import RngState, SampleSet, project, sample_directions
from .optimize import Adam, MatchReport, Sgd, StepRecord, fit_transform, match_particles
from .reservoir import (
    Reservoir,
    ReservoirEntry,
    SelectionResult,
    decay,
    ess_check,
    load_snapshot,
    make_key,
    save_snapshot,
    select,
)
from .wasserstein1d import (
    SlicedCost,
    equalize_lengths,
    exact_w1_1d,
    marginal_w1,
    w1d_cost,
    w_p_distance,
)

__version__ = "0.1.0"

__all__ = [
    "EstimateResult",
    "ReswdConfig",
    "new_reservoir",
    "reswd_step",
    "swd_estimate",
    "RngState",
    "SampleSet",
    "project",
    "sample_directions",
    "Adam",
    "MatchReport",
    "Sgd",
    "StepRecord",
    "fit_transform",
    "match_particles",
    "Reservoir",
    "ReservoirEntry",
    "SelectionResult",
    "decay",
    "ess_check",
    "load_snapshot",
    "make_key",
    "save_snapshot",
    "select",
    "SlicedCost",
    "equalize_lengths",
    "exact_w1_1d",
    "marginal_w1",
    "w1d_cost",
    "w_p_distance",
    "__version__",
]
