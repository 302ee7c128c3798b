"""Weighted reservoir of projection directions.

Selection follows the exponential-key scheme for weighted sampling without
replacement: a candidate with weight w receives key u^(1/w) for a latent
uniform u, and the K largest keys survive.  Each direction keeps its latent u
for its whole lifetime, so survivor keys are re-derived from refreshed weights
every step while membership stays consistent across steps; under frozen
weights this reduces exactly to streaming weighted reservoir sampling over
all directions ever proposed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .numeric import RngState

__all__ = [
    "ReservoirEntry",
    "Reservoir",
    "SelectionResult",
    "decay",
    "make_key",
    "select",
    "ess_check",
    "save_snapshot",
    "load_snapshot",
]

SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class ReservoirEntry:
    """A stored direction with its selection state.

    weight is the cost observed at the last selection; latent is the
    direction's persistent uniform draw from which its key is derived;
    inserted_at is the step at which the direction entered the reservoir.
    """

    direction: np.ndarray
    weight: float
    key: float
    latent: float
    inserted_at: int


@dataclass(frozen=True)
class Reservoir:
    """Persistent set of at most `capacity` directions carried across steps."""

    capacity: int
    entries: tuple[ReservoirEntry, ...] = ()
    current_step: int = 0

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {self.capacity}")
        if len(self.entries) > self.capacity:
            raise ValueError(f"{len(self.entries)} entries exceed capacity {self.capacity}")

    @property
    def directions(self) -> np.ndarray:
        """(len, d) matrix of stored directions; (0, 0) when empty."""
        if not self.entries:
            return np.zeros((0, 0))
        return np.stack([e.direction for e in self.entries])

    def is_empty(self) -> bool:
        return not self.entries


@dataclass(frozen=True)
class SelectionResult:
    """Survivors of one selection round with their estimator weights.

    probabilities are pool-relative cost shares q = D_i / sum(D over pool);
    norm_weights are the self-normalized inverse-share weights used in the
    loss; ess measures concentration of the survivors' cost mass,
    (sum D)^2 / sum(D^2), and drives the reservoir reset.
    """

    survivors: tuple[ReservoirEntry, ...]
    probabilities: np.ndarray
    norm_weights: np.ndarray
    ess: float
    pool_indices: np.ndarray
    degenerate: bool = False


def decay(reservoir: Reservoir, t: int, tau: float) -> Reservoir:
    """Age stored weights and keys by exp(-(t - inserted_at)/tau).

    Disabled when tau == 0.  The aging makes stale directions progressively
    easier to displace under non-stationary costs.
    """
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")
    if tau == 0.0 or reservoir.is_empty():
        return replace(reservoir, current_step=t)
    entries = []
    for e in reservoir.entries:
        if t < e.inserted_at:
            raise ValueError(f"t={t} precedes entry inserted_at={e.inserted_at}")
        f = math.exp(-(t - e.inserted_at) / tau)
        entries.append(replace(e, weight=e.weight * f, key=e.key * f))
    return Reservoir(reservoir.capacity, tuple(entries), t)


def _key_from_latent(latent: float | np.ndarray, weight: float | np.ndarray):
    """Exponential-race key u^(1/w); 0 for non-positive weight."""
    w = np.asarray(weight, dtype=np.float64)
    u = np.asarray(latent, dtype=np.float64)
    with np.errstate(divide="ignore"):
        k = np.where(w > 0, u ** np.where(w > 0, 1.0 / np.maximum(w, 1e-300), 1.0), 0.0)
    return k


def make_key(weight: float, rng: RngState) -> float:
    """Draw a fresh selection key u^(1/weight) in (0, 1)."""
    if weight <= 0:
        raise ValueError(f"weight must be positive, got {weight}")
    u = float(rng.uniform())
    while u == 0.0:  # pragma: no cover - probability 2^-53
        u = float(rng.uniform())
    return float(u ** (1.0 / weight))


def select(
    reservoir: Reservoir,
    fresh_directions: np.ndarray,
    fresh_costs: np.ndarray,
    rng: RngState,
    t: int,
    stored_costs: np.ndarray | None = None,
    tau: float = 0.0,
) -> SelectionResult:
    """Run one weighted-selection round over stored entries plus fresh candidates.

    Every pool member is keyed on its current cost (stored entries reuse
    their persistent latent uniform, fresh candidates draw new ones), and the
    `capacity` largest keys survive.  `stored_costs` supplies this step's
    refreshed costs for the stored entries; by default their recorded weights
    are used.  With tau > 0 stored entries are keyed on an age-discounted
    cost, weight * exp(-age/tau).

    Zero-cost members are ineligible while any positive-cost candidate
    exists; an all-zero pool returns a degenerate uniform result.
    """
    fresh_directions = np.asarray(fresh_directions, dtype=np.float64)
    fresh_costs = np.asarray(fresh_costs, dtype=np.float64).ravel()
    if fresh_directions.ndim != 2 or fresh_directions.shape[0] != fresh_costs.shape[0]:
        raise ValueError("fresh_directions and fresh_costs must agree in length")
    n_stored = len(reservoir.entries)
    if stored_costs is None:
        stored_costs = np.array([e.weight for e in reservoir.entries])
    else:
        stored_costs = np.asarray(stored_costs, dtype=np.float64).ravel()
        if stored_costs.shape[0] != n_stored:
            raise ValueError("stored_costs length must match reservoir entries")

    costs = np.concatenate([stored_costs, fresh_costs])
    n_pool = costs.shape[0]
    if n_pool == 0:
        raise ValueError("selection pool is empty")
    if np.any(costs < 0) or not np.all(np.isfinite(costs)):
        raise ValueError("costs must be finite and non-negative")

    pool_dirs = (
        np.vstack([reservoir.directions, fresh_directions]) if n_stored else fresh_directions
    )
    fresh_latents = rng.uniform(size=fresh_costs.shape[0])
    latents = np.concatenate(
        [np.array([e.latent for e in reservoir.entries]), fresh_latents]
    )
    inserted = np.concatenate(
        [
            np.array([e.inserted_at for e in reservoir.entries], dtype=np.int64),
            np.full(fresh_costs.shape[0], t, dtype=np.int64),
        ]
    )

    total = float(costs.sum())
    k_cap = reservoir.capacity

    if total <= 0.0:
        # matched on every probed direction: uniform degenerate result
        take = np.arange(min(k_cap, n_pool))
        share = np.full(take.size, 1.0 / n_pool)
        w = np.full(take.size, 1.0 / take.size)
        survivors = tuple(
            ReservoirEntry(pool_dirs[i].copy(), 0.0, 0.0, float(latents[i]), int(inserted[i]))
            for i in take
        )
        return SelectionResult(survivors, share, w, float(take.size), take, degenerate=True)

    key_weights = costs.copy()
    if tau > 0.0 and n_stored:
        age = t - inserted[:n_stored]
        key_weights[:n_stored] *= np.exp(-age / tau)
    keys = _key_from_latent(latents, key_weights)

    eligible = costs > 0
    keys = np.where(eligible, keys, 0.0)
    n_take = min(k_cap, int(eligible.sum()))
    order = np.argsort(-keys, kind="stable")
    take = order[:n_take]

    q = costs[take] / total
    inv_q = 1.0 / q
    norm_w = inv_q / inv_q.sum()
    shares = q.copy()
    ess = float(q.sum() ** 2 / np.sum(q * q))

    survivors = tuple(
        ReservoirEntry(
            direction=pool_dirs[i].copy(),
            weight=float(costs[i]),
            key=float(keys[i]),
            latent=float(latents[i]),
            inserted_at=int(inserted[i]),
        )
        for i in take
    )
    return SelectionResult(survivors, shares, norm_w, ess, take, degenerate=False)


def ess_check(result: SelectionResult, alpha: float, k: int) -> bool:
    """True when the reservoir should be flushed: ESS < alpha * k."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    return result.ess < alpha * k


def save_snapshot(reservoir: Reservoir, path: str) -> None:
    """Write a versioned JSON snapshot for checkpointing."""
    doc = {
        "version": SNAPSHOT_VERSION,
        "capacity": reservoir.capacity,
        "current_step": reservoir.current_step,
        "entries": [
            {
                "direction": e.direction.tolist(),
                "weight": e.weight,
                "key": e.key,
                "latent": e.latent,
                "inserted_at": e.inserted_at,
            }
            for e in reservoir.entries
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_snapshot(path: str) -> Reservoir:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("version") != SNAPSHOT_VERSION:
        raise ValueError(f"unsupported snapshot version {doc.get('version')!r}")
    entries = tuple(
        ReservoirEntry(
            direction=np.asarray(e["direction"], dtype=np.float64),
            weight=float(e["weight"]),
            key=float(e["key"]),
            latent=float(e["latent"]),
            inserted_at=int(e["inserted_at"]),
        )
        for e in doc["entries"]
    )
    return Reservoir(int(doc["capacity"]), entries, int(doc["current_step"]))
