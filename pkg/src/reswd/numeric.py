"""Sample-set container, deterministic RNG, sphere sampling, and 1-D projection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["RngState", "SampleSet", "sample_directions", "project"]


class RngState:
    """Deterministic random stream owned by a single consumer.

    Wraps numpy's PCG64 generator, whose integer output stream is fixed by the
    seed across platforms and numpy versions.  A single RngState must not be
    shared between concurrent consumers; derive independent child streams with
    :meth:`child` instead.
    """

    def __init__(self, seed: int, _bit_gen: np.random.PCG64 | None = None) -> None:
        self.seed = int(seed)
        if _bit_gen is None:
            _bit_gen = np.random.PCG64(self.seed)
        self.generator = np.random.Generator(_bit_gen)

    def child(self, *key: int) -> "RngState":
        """Independent deterministic substream identified by integer key(s).

        Children with distinct keys are statistically independent of each
        other and of the parent, and do not consume from the parent stream.
        """
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=tuple(int(k) for k in key))
        return RngState(self.seed, _bit_gen=np.random.PCG64(seq))

    def normal(self, size=None) -> np.ndarray:
        return self.generator.standard_normal(size)

    def uniform(self, size=None) -> np.ndarray:
        return self.generator.random(size)

    def integers(self, low: int, high: int, size=None) -> np.ndarray:
        return self.generator.integers(low, high, size=size)

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngState(seed={self.seed})"


@dataclass(frozen=True)
class SampleSet:
    """An (N, d) collection of points representing an empirical distribution."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"sample data must be 2-D (N, d), got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"sample data must be non-empty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample data contains non-finite entries")
        object.__setattr__(self, "data", arr)

    @property
    def n_points(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


def sample_directions(rng: RngState, count: int, dim: int) -> np.ndarray:
    """Draw `count` i.i.d. uniform unit vectors on the (dim-1)-sphere.

    Standard normal vectors normalized to unit length; rows of the returned
    (count, dim) array have unit Euclidean norm.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    v = rng.normal(size=(count, dim))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    # a zero draw has probability ~2^-1000; redraw rather than divide by 0
    while np.any(norms < 1e-12):  # pragma: no cover
        bad = norms[:, 0] < 1e-12
        v[bad] = rng.normal(size=(int(bad.sum()), dim))
        norms = np.linalg.norm(v, axis=1, keepdims=True)
    return v / norms


def project(samples: SampleSet, direction: np.ndarray) -> np.ndarray:
    """Project every sample onto a unit direction: out[i] = <samples[i], direction>."""
    direction = np.asarray(direction, dtype=np.float64)
    if direction.ndim != 1 or direction.shape[0] != samples.dim:
        raise ValueError(
            f"direction has length {direction.shape[-1] if direction.ndim else 0}, "
            f"samples have dim {samples.dim}"
        )
    return samples.data @ direction
