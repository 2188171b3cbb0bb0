"""Gaussian ensembles interpolating between GOE (r = 0) and GUE (r = 1).

Entries are centred jointly Gaussian with

    <H_ij H_kl> = (delta_jk delta_il + (1 - r) delta_ik delta_jl) / N,

realised by independent normals: Re H_ij ~ N(0, (2-r)/(2N)) and
Im H_ij ~ N(0, r/(2N)) for i < j, and H_ii ~ N(0, (2-r)/N).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Family(str, enum.Enum):
    GUE = "gue"
    GOE = "goe"
    INTERPOLATING = "interp"


@dataclass(frozen=True)
class EnsembleSpec:
    family: Family
    matrix_size: int
    r: float | None = None

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        if not isinstance(self.matrix_size, (int, np.integer)) or self.matrix_size < 1:
            raise ValueError(f"matrix_size must be a positive integer, got {self.matrix_size!r}")
        if family is Family.INTERPOLATING:
            if self.r is None or not 0.0 <= self.r <= 1.0:
                raise ValueError(f"interpolating ensemble needs 0 <= r <= 1, got {self.r!r}")
        elif self.r is not None and self.r != self.coupling:
            raise ValueError(f"{family.name} fixes r = {self.coupling}, got {self.r}")

    @property
    def coupling(self) -> float:
        """The interpolation parameter r (1 for GUE, 0 for GOE)."""
        if self.family is Family.GUE:
            return 1.0
        if self.family is Family.GOE:
            return 0.0
        return float(self.r)

    @property
    def N(self) -> int:
        return int(self.matrix_size)


def gue(n: int) -> EnsembleSpec:
    return EnsembleSpec(Family.GUE, n)


def goe(n: int) -> EnsembleSpec:
    return EnsembleSpec(Family.GOE, n)


def interpolating(n: int, r: float) -> EnsembleSpec:
    return EnsembleSpec(Family.INTERPOLATING, n, r)


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_streams(seed: int, count: int) -> list[np.random.Generator]:
    """Independent generators derived from one seed, one per worker or chunk."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def covariance(spec: EnsembleSpec, i: int, j: int, k: int, l: int) -> float:
    """Exact <H_ij H_kl> for 1-based indices."""
    r = spec.coupling
    return ((j == k) * (i == l) + (1.0 - r) * (i == k) * (j == l)) / spec.N


def sample_batch(spec: EnsembleSpec, count: int, seed) -> np.ndarray:
    """Draw ``count`` matrices, shape ``(count, N, N)``, complex128.

    GUE and GOE go through exactly the same arithmetic as the interpolating
    family at r = 1 and r = 0, so equal seeds give identical bytes.
    """
    rng = as_generator(seed)
    n = spec.N
    r = spec.coupling
    x = rng.standard_normal((count, n, n))
    y = rng.standard_normal((count, n, n))
    # symmetrising halves the off-diagonal variance and leaves the diagonal alone
    re = (x + x.transpose(0, 2, 1)) * (0.5 * np.sqrt((2.0 - r) / n))
    im = (y - y.transpose(0, 2, 1)) * (0.5 * np.sqrt(r / n))
    h = np.empty((count, n, n), dtype=complex)
    h.real = re
    h.imag = im
    return h


def sample_matrix(spec: EnsembleSpec, seed) -> np.ndarray:
    """One Hermitian N x N sample."""
    return sample_batch(spec, 1, seed)[0]


@dataclass(frozen=True)
class CovarianceEstimate:
    mean: float
    std_error: float
    num_samples: int
    expected: float

    @property
    def z_score(self) -> float:
        if self.std_error == 0:
            return 0.0 if self.mean == self.expected else np.inf
        return (self.mean - self.expected) / self.std_error


def _jackknife_mean(values: np.ndarray, blocks: int = 50) -> tuple[float, float]:
    """Block-jackknife estimate of a sample mean and its standard error."""
    n = values.size
    blocks = min(blocks, n)
    sums = np.array([b.sum() for b in np.array_split(values, blocks)])
    sizes = np.array([b.size for b in np.array_split(values, blocks)])
    total = sums.sum()
    loo = (total - sums) / (n - sizes)
    mean = total / n
    var = (blocks - 1) / blocks * np.sum((loo - loo.mean()) ** 2)
    return float(mean), float(np.sqrt(var))


def empirical_covariance(spec: EnsembleSpec, index_tuple: tuple[int, int, int, int],
                         num_samples: int, seed, chunk: int = 200_000) -> CovarianceEstimate:
    """Sample mean of Re(H_ij H_kl) with a jackknife standard error.

    Indices are 1-based, matching the usual matrix notation.
    """
    i, j, k, l = index_tuple
    n = spec.N
    if not all(1 <= idx <= n for idx in index_tuple):
        raise ValueError(f"indices {index_tuple} out of range for N={n}")
    if num_samples < 100:
        raise ValueError("num_samples must be at least 100")
    counts = [chunk] * (num_samples // chunk)
    if num_samples % chunk:
        counts.append(num_samples % chunk)
    streams = spawn_streams(seed if isinstance(seed, int) else 0, len(counts))
    products = []
    for count, rng in zip(counts, streams):
        h = sample_batch(spec, count, rng)
        products.append((h[:, i - 1, j - 1] * h[:, k - 1, l - 1]).real)
    mean, se = _jackknife_mean(np.concatenate(products))
    return CovarianceEstimate(mean, se, num_samples, covariance(spec, i, j, k, l))
