"""Sliced Wasserstein estimators: plain Monte Carlo and the reservoir variant.

Both return the p-power cost averaged over probe directions together with its
gradient w.r.t. the first sample set.  The reservoir variant reuses
informative directions across optimization steps via weighted reservoir
sampling and reweights the surviving directions with self-normalized inverse
selection shares; the weights are treated as constants in the gradient.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .numeric import RngState, SampleSet, sample_directions
from .reservoir import Reservoir, ess_check, select
from .wasserstein1d import batched_costs

__all__ = ["ReswdConfig", "EstimateResult", "swd_estimate", "reswd_step", "new_reservoir"]


@dataclass(frozen=True)
class ReswdConfig:
    """Estimator hyperparameters.

    total_projections is the per-step cost-evaluation budget L; fresh_count M
    of them are newly drawn each step and the reservoir holds K = L - M.
    """

    total_projections: int = 64
    fresh_count: int = 8
    p: float = 2.0
    alpha: float = 0.5
    tau: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.fresh_count < 1:
            raise ValueError(f"fresh_count must be >= 1, got {self.fresh_count}")
        if self.total_projections - self.fresh_count < 1:
            raise ValueError(
                "fresh_count must leave reservoir capacity >= 1 "
                f"(total_projections={self.total_projections}, fresh_count={self.fresh_count})"
            )
        if self.p < 1.0:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.tau < 0.0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")

    @property
    def reservoir_capacity(self) -> int:
        return self.total_projections - self.fresh_count


@dataclass(frozen=True)
class EstimateResult:
    """One estimator evaluation.

    per_direction_costs holds the cost of every direction evaluated this step
    (the full pool), so its length is the step's cost-evaluation budget.
    norm_weights and survivor_costs describe only the directions that entered
    the value: value == norm_weights . survivor_costs.
    """

    value: float
    grad: np.ndarray
    ess: float
    flushed: bool
    per_direction_costs: np.ndarray
    norm_weights: np.ndarray
    survivor_costs: np.ndarray


def new_reservoir(cfg: ReswdConfig) -> Reservoir:
    """Empty reservoir sized for the configuration."""
    return Reservoir(capacity=cfg.reservoir_capacity)


def swd_estimate(
    X: SampleSet, Y: SampleSet, L: int, p: float, rng: RngState
) -> EstimateResult:
    """Plain Monte Carlo sliced estimate over L fresh uniform directions."""
    if X.dim != Y.dim:
        raise ValueError(f"dimension mismatch: {X.dim} vs {Y.dim}")
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    dirs = sample_directions(rng, L, X.dim)
    costs, g = batched_costs(X.data @ dirs.T, Y.data @ dirs.T, p, rng)
    w = np.full(L, 1.0 / L)
    grad = (g * w) @ dirs
    return EstimateResult(
        value=float(costs.mean()),
        grad=grad,
        ess=float(L),
        flushed=False,
        per_direction_costs=costs,
        norm_weights=w,
        survivor_costs=costs,
    )


def reswd_step(
    X: SampleSet,
    Y: SampleSet,
    reservoir: Reservoir,
    cfg: ReswdConfig,
    t: int,
    rng: RngState,
) -> tuple[EstimateResult, Reservoir]:
    """One reservoir-estimator step: decay, refresh, select, estimate, reset.

    Costs are evaluated for every pool member (stored plus fresh), survivors
    are selected by weighted reservoir sampling on the refreshed costs, and
    the loss is the self-normalized weighted cost over survivors only.  When
    the survivors' cost mass concentrates below alpha * (reservoir size) in
    effective-sample terms, this step's estimate is still returned but the
    reservoir restarts empty.
    """
    if X.dim != Y.dim:
        raise ValueError(f"dimension mismatch: {X.dim} vs {Y.dim}")
    if not reservoir.is_empty() and reservoir.directions.shape[1] != X.dim:
        raise ValueError(
            f"reservoir direction dim {reservoir.directions.shape[1]} != sample dim {X.dim}"
        )
    if t < reservoir.current_step:
        raise ValueError(f"t={t} precedes reservoir step {reservoir.current_step}")

    n_stored = len(reservoir.entries)
    fresh_dirs = sample_directions(rng, cfg.fresh_count, X.dim)
    pool_dirs = (
        np.vstack([reservoir.directions, fresh_dirs]) if n_stored else fresh_dirs
    )
    costs, g = batched_costs(X.data @ pool_dirs.T, Y.data @ pool_dirs.T, cfg.p, rng)

    if float(costs.sum()) <= 0.0:
        # distributions matched on every probed direction
        result = EstimateResult(
            value=0.0,
            grad=np.zeros_like(X.data),
            ess=float(min(cfg.reservoir_capacity, costs.shape[0])),
            flushed=False,
            per_direction_costs=costs,
            norm_weights=np.full(costs.shape[0], 1.0 / costs.shape[0]),
            survivor_costs=np.zeros(costs.shape[0]),
        )
        return result, replace(reservoir, current_step=t)

    sel = select(
        reservoir,
        fresh_dirs,
        costs[n_stored:],
        rng,
        t=t,
        stored_costs=costs[:n_stored],
        tau=cfg.tau,
    )
    surv_costs = costs[sel.pool_indices]
    value = float(np.dot(sel.norm_weights, surv_costs))
    grad = (g[:, sel.pool_indices] * sel.norm_weights) @ pool_dirs[sel.pool_indices]

    flushed = ess_check(sel, cfg.alpha, len(sel.survivors))
    if flushed:
        next_res = Reservoir(cfg.reservoir_capacity, (), t)
    else:
        next_res = Reservoir(cfg.reservoir_capacity, sel.survivors, t)

    result = EstimateResult(
        value=value,
        grad=grad,
        ess=sel.ess,
        flushed=flushed,
        per_direction_costs=costs,
        norm_weights=sel.norm_weights,
        survivor_costs=surv_costs,
    )
    return result, next_res
