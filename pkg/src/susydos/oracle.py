"""Independent ground truth for the integral evaluators.

Two routes that share nothing with the contour machinery: direct sampling
of the ensemble with an epsilon-smoothed eigenvalue density, and the
classical Hermite-function kernel for the finite-N GUE density.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate as sp_integrate

from .ensemble import EnsembleSpec, sample_batch, spawn_streams

MC_CHUNK = 10_000
MAX_HERMITE_N = 64
MIN_EPSILON = 0.01


@dataclass(frozen=True)
class SpectrumSample:
    eigenvalues: np.ndarray
    spec: EnsembleSpec | None = None
    seed: int | None = None

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if np.any(np.diff(ev) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)

    def __len__(self):
        return self.eigenvalues.size

    def counting_fraction(self, E: float) -> float:
        """Fraction of eigenvalues at or below E."""
        return float(np.searchsorted(self.eigenvalues, E, side="right")) / len(self)


def eigenvalues(H, spec: EnsembleSpec | None = None, seed: int | None = None) -> SpectrumSample:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("need a square matrix")
    scale = max(1.0, float(np.max(np.abs(H)))) if H.size else 1.0
    if not np.allclose(H, H.conj().T, atol=1e-12 * scale, rtol=0):
        raise ValueError("matrix is not Hermitian")
    return SpectrumSample(np.linalg.eigvalsh(H), spec, seed)


def sample_spectra(spec: EnsembleSpec, count: int, seed) -> np.ndarray:
    """Sorted eigenvalues of ``count`` independent draws, shape ``(count, N)``."""
    h = sample_batch(spec, count, seed)
    if spec.coupling == 0.0:
        h = h.real
    return np.linalg.eigvalsh(h)


@dataclass(frozen=True)
class SmoothedDosEstimate:
    E: float
    epsilon: float
    mean: float
    std_error: float
    num_samples: int

    def z_score(self, exact: float) -> float:
        return (self.mean - exact) / self.std_error if self.std_error > 0 else math.inf


def _lorentzian_sums(spectra: np.ndarray, energies: np.ndarray, epsilon: float) -> np.ndarray:
    """Per-sample smoothed density, shape ``(samples, len(energies))``."""
    n = spectra.shape[1]
    out = np.empty((spectra.shape[0], energies.size))
    for k, E in enumerate(energies):
        d = E - spectra
        out[:, k] = np.sum(epsilon / (d * d + epsilon * epsilon), axis=1) / (n * math.pi)
    return out


def smoothed_dos_mc_grid(spec: EnsembleSpec, energies: Sequence[float], epsilon: float,
                         num_samples: int, seed: int, workers: int = 1,
                         chunk: int = MC_CHUNK) -> list[SmoothedDosEstimate]:
    """Smoothed density on a grid of energies from one shared set of samples.

    Samples are drawn in fixed-size chunks, each with its own spawned RNG
    stream, so the result depends on ``seed`` alone and not on ``workers``.
    """
    if epsilon < MIN_EPSILON:
        raise ValueError(f"epsilon must be at least {MIN_EPSILON}")
    if num_samples < 2:
        raise ValueError("need at least two samples")
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    counts = [chunk] * (num_samples // chunk)
    if num_samples % chunk:
        counts.append(num_samples % chunk)
    streams = spawn_streams(seed, len(counts))

    def work(job):
        count, rng = job
        vals = _lorentzian_sums(sample_spectra(spec, count, rng), energies, epsilon)
        return vals.sum(axis=0), (vals * vals).sum(axis=0)

    jobs = list(zip(counts, streams))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(work, jobs))
    else:
        parts = [work(job) for job in jobs]
    # merge in chunk order so the floating-point sum is reproducible
    total = np.zeros(energies.size)
    total_sq = np.zeros(energies.size)
    for s, sq in parts:
        total += s
        total_sq += sq
    mean = total / num_samples
    var = np.maximum(total_sq / num_samples - mean * mean, 0.0) * num_samples / (num_samples - 1)
    se = np.sqrt(var / num_samples)
    return [SmoothedDosEstimate(float(E), float(epsilon), float(m), float(s), num_samples)
            for E, m, s in zip(energies, mean, se)]


def smoothed_dos_mc(spec: EnsembleSpec, E: float, epsilon: float, num_samples: int,
                    seed: int, workers: int = 1) -> SmoothedDosEstimate:
    """Average of ``(1/N pi) sum_j eps / ((E - lambda_j)^2 + eps^2)`` over samples."""
    return smoothed_dos_mc_grid(spec, [E], epsilon, num_samples, seed, workers)[0]


def gaussian_scalar_dos(E: float, epsilon: float, variance: float = 1.0) -> float:
    """Smoothed density of a single Gaussian eigenvalue, by 1D quadrature.

    This is the N = 1 case of every family: the lone entry has variance
    ``2 - r``.
    """
    sd = math.sqrt(variance)

    def f(h):
        return epsilon / ((E - h) ** 2 + epsilon ** 2) * math.exp(-h * h / (2 * variance))

    pts = [E] if abs(E) < 12 * sd else None
    val, _ = sp_integrate.quad(f, -12 * sd, 12 * sd, points=pts, limit=400,
                               epsabs=1e-14, epsrel=1e-12)
    return val / (math.pi * sd * math.sqrt(2 * math.pi))


def hermite_functions(N: int, x) -> np.ndarray:
    """``phi_k(x)`` for k < N, orthonormal for the weight ``exp(-x^2/2)``.

    ``phi_k = He_k(x) exp(-x^2/4) / sqrt(sqrt(2 pi) k!)``, built by the
    three-term recurrence with the Gaussian factor folded into the seed so
    nothing overflows.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((N,) + x.shape)
    out[0] = np.exp(-x * x / 4) / (2 * math.pi) ** 0.25
    if N > 1:
        out[1] = x * out[0]
    for k in range(1, N - 1):
        out[k + 1] = (x * out[k] - math.sqrt(k) * out[k - 1]) / math.sqrt(k + 1)
    return out


def gue_exact_dos(N: int, E):
    """Exact finite-N GUE density for entries of variance 1/N.

    The kernel lives in units where eigenvalues scale like ``sqrt(N) E``;
    the Jacobian ``sqrt(N)`` is fixed by requiring N = 1 to be the standard
    normal density.
    """
    if not 1 <= N <= MAX_HERMITE_N:
        raise ValueError(f"need 1 <= N <= {MAX_HERMITE_N}")
    scalar = np.ndim(E) == 0
    x = math.sqrt(N) * np.asarray(E, dtype=float)
    phi = hermite_functions(N, x)
    rho = np.sum(phi * phi, axis=0) / math.sqrt(N)
    return float(rho) if scalar else rho
