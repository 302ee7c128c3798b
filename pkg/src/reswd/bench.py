"""Synthetic distribution-matching benchmark harness.

Generates random distribution pairs from three families, runs particle
matching under each estimator, and aggregates per-step trajectories into CSV
series and a JSON summary.  Runs are independent and deterministically seeded,
so results are reproducible for a fixed configuration regardless of the
number of worker processes.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .estimator import ReswdConfig
from .numeric import RngState, SampleSet
from .optimize import DEFAULT_PARTICLE_LR, Adam, match_particles
from .wasserstein1d import marginal_w1

__all__ = [
    "DistributionSpec",
    "BenchConfig",
    "BenchResult",
    "generate_pair",
    "true_marginal_w1",
    "run_benchmark",
]

# declared parameter ranges for random pair generation
MEAN_RANGE = (-5.0, 5.0)
SCALE_RANGE = (0.5, 2.0)
BIMODAL_SEPARATION_RANGE = (2.0, 8.0)
BIMODAL_WEIGHT_RANGE = (0.3, 0.7)

FAMILIES = ("normal", "uniform", "bimodal-normal")


@dataclass(frozen=True)
class DistributionSpec:
    """A sampleable distribution from one of the three benchmark families.

    means/scales parameterize the body; the bimodal family adds a second
    component at means2/scales2 mixed with the given weight.
    """

    family: str
    dim: int
    means: np.ndarray
    scales: np.ndarray
    means2: np.ndarray | None = None
    scales2: np.ndarray | None = None
    weight: float = 0.5

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if np.any(np.asarray(self.scales) <= 0):
            raise ValueError("scales must be positive")
        if self.family == "bimodal-normal":
            if self.means2 is None or self.scales2 is None:
                raise ValueError("bimodal-normal requires means2 and scales2")
            if not 0.0 < self.weight < 1.0:
                raise ValueError(f"bimodal weight must lie in (0, 1), got {self.weight}")

    def sample(self, rng: RngState, n: int) -> np.ndarray:
        if self.family == "normal":
            return rng.normal(size=(n, self.dim)) * self.scales + self.means
        if self.family == "uniform":
            # half-width scale*sqrt(3) gives standard deviation = scale
            hw = self.scales * np.sqrt(3.0)
            return self.means + (2.0 * rng.uniform(size=(n, self.dim)) - 1.0) * hw
        pick = rng.uniform(size=n) < self.weight
        a = rng.normal(size=(n, self.dim)) * self.scales + self.means
        b = rng.normal(size=(n, self.dim)) * self.scales2 + self.means2
        return np.where(pick[:, None], a, b)


def _random_spec(rng: RngState, dim: int) -> DistributionSpec:
    family = FAMILIES[int(rng.integers(0, len(FAMILIES)))]
    means = rng.uniform(size=dim) * (MEAN_RANGE[1] - MEAN_RANGE[0]) + MEAN_RANGE[0]
    scales = rng.uniform(size=dim) * (SCALE_RANGE[1] - SCALE_RANGE[0]) + SCALE_RANGE[0]
    if family != "bimodal-normal":
        return DistributionSpec(family, dim, means, scales)
    u = rng.normal(size=dim)
    u /= np.linalg.norm(u)
    sep = rng.uniform() * (
        BIMODAL_SEPARATION_RANGE[1] - BIMODAL_SEPARATION_RANGE[0]
    ) + BIMODAL_SEPARATION_RANGE[0]
    weight = rng.uniform() * (
        BIMODAL_WEIGHT_RANGE[1] - BIMODAL_WEIGHT_RANGE[0]
    ) + BIMODAL_WEIGHT_RANGE[0]
    scales2 = rng.uniform(size=dim) * (SCALE_RANGE[1] - SCALE_RANGE[0]) + SCALE_RANGE[0]
    return DistributionSpec(family, dim, means, scales, means + sep * u, scales2, float(weight))


def generate_pair(
    rng: RngState, dim: int, n_samples: int = 1024
) -> tuple[SampleSet, SampleSet, tuple[DistributionSpec, DistributionSpec]]:
    """Draw two random specs and sample n points from each."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    spec_x = _random_spec(rng, dim)
    spec_y = _random_spec(rng, dim)
    X = SampleSet(spec_x.sample(rng, n_samples))
    Y = SampleSet(spec_y.sample(rng, n_samples))
    return X, Y, (spec_x, spec_y)


def true_marginal_w1(X: SampleSet, Y: SampleSet) -> float:
    """Exact per-axis 1-D W1 averaged over axes; the benchmark truth metric."""
    return marginal_w1(X.data, Y.data)


@dataclass(frozen=True)
class BenchConfig:
    """Benchmark protocol parameters; defaults mirror the standard protocol."""

    n_pairs: int = 1000
    n_samples: int = 1024
    steps: int = 300
    dim: int = 3
    projections: int = 64
    fresh: int = 8
    p: float = 2.0
    alpha: float = 0.5
    tau: float = 0.0
    seed: int = 0
    seeds_per_pair: int = 1
    lr: float = DEFAULT_PARTICLE_LR
    ablation_fresh: tuple[int, ...] = ()
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.n_pairs < 1 or self.steps < 1 or self.n_samples < 1:
            raise ValueError("n_pairs, steps and n_samples must be >= 1")
        # validate the estimator configs eagerly so errors surface before runs
        self.estimator_config(self.fresh, 0)
        for m in self.ablation_fresh:
            self.estimator_config(m, 0)

    def estimator_config(self, fresh: int, run_seed: int) -> ReswdConfig:
        return ReswdConfig(
            total_projections=self.projections,
            fresh_count=fresh,
            p=self.p,
            alpha=self.alpha,
            tau=self.tau,
            seed=run_seed,
        )

    def methods(self) -> list[str]:
        out = ["swd", "reswd"]
        for m in self.ablation_fresh:
            if m != self.fresh:
                out.append(f"reswd_m{m}")
        return out


@dataclass
class MethodAggregate:
    """Aggregated trajectories for one method."""

    n_runs: int
    final_mean_w1: float
    ms_per_step: float
    mean_w1_by_step: np.ndarray
    pearson_by_step: np.ndarray | None
    wall_ms_mean_by_step: np.ndarray


@dataclass
class BenchResult:
    methods: dict[str, MethodAggregate]
    failed_runs: list[tuple[str, int, int, str]] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            name: {
                "final_mean_w1": agg.final_mean_w1,
                "ms_per_step": agg.ms_per_step,
                "n_runs": agg.n_runs,
            }
            for name, agg in self.methods.items()
        }

    def write_csv(self, out_dir: str) -> list[str]:
        """One CSV per method: step, mean_w1[, pearson_corr], wall_ms_mean.

        The pearson_corr column is present only when the run population is
        at least 30.
        """
        paths = []
        os.makedirs(out_dir, exist_ok=True)
        for name, agg in self.methods.items():
            path = os.path.join(out_dir, f"{name}.csv")
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                cols = ["step", "mean_w1"]
                if agg.pearson_by_step is not None:
                    cols.append("pearson_corr")
                cols.append("wall_ms_mean")
                writer.writerow(cols)
                for i in range(agg.mean_w1_by_step.shape[0]):
                    row = [i + 1, f"{agg.mean_w1_by_step[i]:.12g}"]
                    if agg.pearson_by_step is not None:
                        row.append(f"{agg.pearson_by_step[i]:.12g}")
                    row.append(f"{agg.wall_ms_mean_by_step[i]:.3f}")
                    writer.writerow(row)
            paths.append(path)
        return paths

    def write_summary(self, out_dir: str) -> str:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "summary.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def _run_seed(cfg: BenchConfig, pair_idx: int, rep: int, method_idx: int) -> int:
    seq = np.random.SeedSequence(
        entropy=cfg.seed, spawn_key=(pair_idx, rep, method_idx)
    )
    return int(seq.generate_state(1, np.uint64)[0])


def _run_one(args) -> tuple[str, int, int, np.ndarray | None, np.ndarray | None, np.ndarray | None, str]:
    cfg, method, pair_idx, rep = args
    try:
        pair_rng = RngState(cfg.seed).child(pair_idx)
        X0, Y, _specs = generate_pair(pair_rng, cfg.dim, cfg.n_samples)
        method_idx = cfg.methods().index(method)
        fresh = cfg.fresh if method in ("swd", "reswd") else int(method.split("_m")[1])
        est_cfg = cfg.estimator_config(fresh, _run_seed(cfg, pair_idx, rep, method_idx))
        mode = "swd" if method == "swd" else "reswd"
        report = match_particles(X0, Y, est_cfg, cfg.steps, Adam(lr=cfg.lr), mode=mode)
        loss = report.losses()
        w1 = report.mean_w1_series()
        wall = np.array([r.wall_ms for r in report.records])
        return method, pair_idx, rep, loss, w1, wall, ""
    except Exception as exc:  # aggregate excludes failed runs, with a warning
        return method, pair_idx, rep, None, None, None, f"{type(exc).__name__}: {exc}"


def run_benchmark(cfg: BenchConfig, progress=None) -> BenchResult:
    """Run every (pair, seed repetition, method) combination and aggregate.

    `progress`, when given, is called with (done, total) after each run.
    """
    tasks = [
        (cfg, method, pair_idx, rep)
        for method in cfg.methods()
        for pair_idx in range(cfg.n_pairs)
        for rep in range(cfg.seeds_per_pair)
    ]
    results = []
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            for i, res in enumerate(pool.map(_run_one, tasks, chunksize=1)):
                results.append(res)
                if progress:
                    progress(i + 1, len(tasks))
    else:
        for i, task in enumerate(tasks):
            results.append(_run_one(task))
            if progress:
                progress(i + 1, len(tasks))

    by_method: dict[str, list[tuple[np.ndarray, np.ndarray, np.ndarray]]] = {
        m: [] for m in cfg.methods()
    }
    failed = []
    for method, pair_idx, rep, loss, w1, wall, err in results:
        if err:
            failed.append((method, pair_idx, rep, err))
        else:
            by_method[method].append((loss, w1, wall))

    aggregates = {}
    for method, runs in by_method.items():
        if not runs:
            continue
        losses = np.stack([r[0] for r in runs])  # (runs, steps)
        w1s = np.stack([r[1] for r in runs])
        walls = np.stack([r[2] for r in runs])
        n_runs = losses.shape[0]
        pearson = None
        if n_runs >= 30:
            pearson = _pearson_by_step(losses, w1s)
        warm = min(9, walls.shape[1] - 1)
        aggregates[method] = MethodAggregate(
            n_runs=n_runs,
            final_mean_w1=float(w1s[:, -1].mean()),
            ms_per_step=float(np.mean(np.median(walls[:, warm:], axis=1))),
            mean_w1_by_step=w1s.mean(axis=0),
            pearson_by_step=pearson,
            wall_ms_mean_by_step=walls.mean(axis=0),
        )
    return BenchResult(methods=aggregates, failed_runs=failed)


def _pearson_by_step(losses: np.ndarray, w1s: np.ndarray) -> np.ndarray:
    """Correlation across runs, per step, between estimate and true metric."""
    lc = losses - losses.mean(axis=0)
    wc = w1s - w1s.mean(axis=0)
    num = (lc * wc).sum(axis=0)
    den = np.sqrt((lc * lc).sum(axis=0) * (wc * wc).sum(axis=0))
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, num / np.maximum(den, 1e-300), np.nan)
    return out
