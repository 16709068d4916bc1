"""Gaussian sequence policies and counter-based sampling.

Every Gaussian draw is a pure function of ``(master_seed, stream_id,
sample_index, element_index)``: a splitmix64 hash turns those counters into
two uniforms and Box-Muller turns them into a standard normal. Any subset of
samples can therefore be generated independently, which is what makes the
solvers' results independent of batch chunking and thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ParameterError, ShapeError

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_M1 = _U64(0xBF58476D1CE4E5B9)
_M2 = _U64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def _mix(z: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; uint64 array arithmetic wraps silently
    z = (z ^ (z >> _U64(30))) * _M1
    z = (z ^ (z >> _U64(27))) * _M2
    return z ^ (z >> _U64(31))


def _key(*words: int) -> np.ndarray:
    h = np.zeros(1, dtype=_U64)
    for w in words:
        h = _mix(h + _GOLDEN + np.array([w & _MASK64], dtype=_U64))
    return h


def derive_seed(master_seed: int, *ids: int) -> int:
    """Deterministically derive a child 64-bit seed from a parent and ids."""
    return int(_key(master_seed, *ids)[0])


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            v = getattr(self, name)
            if not 0 <= int(v) <= _MASK64:
                raise ParameterError(f"{name} must be an unsigned 64-bit integer, got {v}")

    def with_stream(self, stream_id: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, stream_id & _MASK64)


def standard_normal(seed: SeedSpec, indices, size: int) -> np.ndarray:
    """Standard normal draws of shape ``(len(indices), size)``.

    Row ``i`` is the stream of sample ``indices[i]`` and depends on nothing else.
    """
    idx = np.asarray(indices, dtype=_U64).reshape(-1, 1)
    base = _key(seed.master_seed, seed.stream_id)
    per_sample = _mix(base + (idx + _U64(1)) * _GOLDEN)
    counter = np.arange(2 * size, dtype=_U64).reshape(1, -1)
    bits = _mix(per_sample + (counter + _U64(1)) * _M2)
    # 53-bit uniforms; u1 in (0, 1] keeps the log finite
    unif = (bits >> _U64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
    u1 = 1.0 - unif[:, 0::2]
    u2 = unif[:, 1::2]
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


class WarmStartFill(str, Enum):
    REPEAT_LAST = "repeat_last"
    ZEROS = "zeros"


@dataclass(frozen=True)
class GaussianSequencePolicy:
    """Independent N(mean[t], diag(std**2)) per time step."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float, ndmin=2)
        if mean.ndim != 2:
            raise ShapeError(f"mean must be a (T, n_u) matrix, got shape {mean.shape}")
        std = np.broadcast_to(np.asarray(self.std, dtype=float), (mean.shape[1],)).copy()
        if not np.all(std > 0) or not np.all(np.isfinite(std)):
            raise ParameterError("std must be strictly positive and finite")
        mean.flags.writeable = False
        std.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @property
    def horizon(self) -> int:
        return self.mean.shape[0]

    @property
    def input_dim(self) -> int:
        return self.mean.shape[1]


def sample_indices(policy: GaussianSequencePolicy, seed: SeedSpec, indices) -> np.ndarray:
    """Samples ``indices`` of the policy's stream, shape ``(len(indices), T, n_u)``."""
    t, nu = policy.mean.shape
    z = standard_normal(seed, indices, t * nu).reshape(-1, t, nu)
    return policy.mean + policy.std * z


def sample_batch(policy: GaussianSequencePolicy, k: int, seed: SeedSpec) -> np.ndarray:
    """Draw ``k`` control sequences; sample ``i`` only depends on ``(seed, i)``."""
    if k < 1:
        raise ParameterError(f"K must be >= 1, got {k}")
    return sample_indices(policy, seed, np.arange(k))


def log_pdf(policy: GaussianSequencePolicy, u) -> float:
    u = np.asarray(u, dtype=float)
    if u.shape != policy.mean.shape:
        raise ShapeError(f"u must have shape {policy.mean.shape}, got {u.shape}")
    z = (u - policy.mean) / policy.std
    per_step = -0.5 * np.sum(z * z, axis=1) - np.sum(np.log(policy.std)) - 0.5 * policy.input_dim * math.log(2 * math.pi)
    return float(np.sum(per_step))


def shift_warm_start(prev_mean, fill: WarmStartFill | str = WarmStartFill.REPEAT_LAST) -> np.ndarray:
    """Drop the first row of the previous plan and fill the freed last row."""
    fill = WarmStartFill(fill)
    prev = np.asarray(prev_mean, dtype=float)
    if prev.ndim != 2 or prev.shape[0] < 1:
        raise ShapeError(f"prev_mean must be a non-empty (T, n_u) matrix, got shape {prev.shape}")
    out = np.empty_like(prev)
    out[:-1] = prev[1:]
    out[-1] = prev[-1] if fill is WarmStartFill.REPEAT_LAST else 0.0
    return out
