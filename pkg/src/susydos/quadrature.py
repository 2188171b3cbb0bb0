"""Quadrature rules and overflow-safe integration.

Integrands are handed around as complex logarithms (``log|f| + i arg f``) so
that factors like ``2**N * N**2`` or ``s**N * exp(-N s**2)`` never have to be
formed in double precision.  :func:`integrate` factors out the largest
log-magnitude before summing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

MAX_GL_ORDER = 4096


class NonFiniteIntegrandError(ArithmeticError):
    """Raised when an integrand evaluates to inf/nan at some node."""

    def __init__(self, node, value):
        super().__init__(f"non-finite integrand {value!r} at node {node!r}")
        self.node = node
        self.value = value


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights; the weight already contains dz/dparameter.

    ``coarse`` optionally holds a lower-order companion rule over the same
    path, used by :func:`integrate` for its error estimate.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    coarse: "QuadratureRule | None" = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        nodes = np.atleast_1d(np.asarray(self.nodes))
        weights = np.atleast_1d(np.asarray(self.weights, dtype=complex))
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size < 1:
            raise ValueError("nodes and weights must be equal-length 1-D arrays")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.nodes.size

    def mapped(self, path: Callable, dpath: Callable) -> "QuadratureRule":
        """Push the rule through a parametrisation ``x -> path(x)``."""
        coarse = self.coarse.mapped(path, dpath) if self.coarse is not None else None
        return QuadratureRule(path(self.nodes), self.weights * dpath(self.nodes),
                              self.order, coarse)

    def concat(self, other: "QuadratureRule") -> "QuadratureRule":
        coarse = None
        if self.coarse is not None and other.coarse is not None:
            coarse = self.coarse.concat(other.coarse)
        return QuadratureRule(np.concatenate([self.nodes, other.nodes]),
                              np.concatenate([self.weights, other.weights]),
                              max(self.order, other.order), coarse)


@dataclass(frozen=True)
class ScaledIntegrand:
    """A complex number stored as ``phase * exp(log_magnitude)``."""

    log_magnitude: float
    phase: complex

    def __post_init__(self):
        if np.any(np.abs(np.abs(self.phase) - 1.0) > 1e-12):
            raise ValueError("phase must have unit modulus")

    @classmethod
    def from_log(cls, log_value: complex) -> "ScaledIntegrand":
        log_value = complex(log_value)
        return cls(log_value.real, complex(np.exp(1j * log_value.imag)))

    @classmethod
    def from_complex(cls, value: complex) -> "ScaledIntegrand":
        if value == 0:
            return cls(-math.inf, 1.0 + 0j)
        return cls(math.log(abs(value)), value / abs(value))

    @property
    def value(self) -> complex:
        """The plain complex value; overflows to inf when out of range."""
        with np.errstate(over="ignore"):
            return complex(self.phase * np.exp(self.log_magnitude))

    def __mul__(self, other: "ScaledIntegrand") -> "ScaledIntegrand":
        return ScaledIntegrand(self.log_magnitude + other.log_magnitude,
                               self.phase * other.phase)


@dataclass(frozen=True)
class IntegralResult:
    """``mantissa * exp(log_scale)`` with an absolute error on the same scale."""

    mantissa: complex
    log_scale: float
    error_mantissa: float = 0.0

    @property
    def value(self) -> complex:
        with np.errstate(over="ignore"):
            return complex(self.mantissa * np.exp(self.log_scale))

    @property
    def error(self) -> float:
        with np.errstate(over="ignore"):
            return float(self.error_mantissa * np.exp(self.log_scale))

    def scaled(self) -> ScaledIntegrand:
        s = ScaledIntegrand.from_complex(self.mantissa)
        return ScaledIntegrand(s.log_magnitude + self.log_scale, s.phase)


def gauss_legendre(order: int) -> QuadratureRule:
    """Gauss-Legendre rule on [-1, 1], exact through degree ``2*order - 1``."""
    if not 1 <= order <= MAX_GL_ORDER:
        raise ValueError(f"order must lie in [1, {MAX_GL_ORDER}], got {order}")
    x, w = leggauss(order)
    coarse = None
    if order >= 2:
        xc, wc = leggauss(order // 2)
        coarse = QuadratureRule(xc, wc, order // 2)
    return QuadratureRule(x, w, order, coarse)


def composite_gauss_legendre(a: float, b: float, panels: int, order: int) -> QuadratureRule:
    """Uniform panels on [a, b], each carrying an ``order``-point GL rule."""
    if panels < 1:
        raise ValueError("need at least one panel")

    def build(n):
        x, w = leggauss(n)
        edges = np.linspace(a, b, panels + 1)
        half = np.diff(edges) / 2
        mid = (edges[:-1] + edges[1:]) / 2
        return ((half[:, None] * x + mid[:, None]).ravel(),
                (half[:, None] * w).ravel())

    nodes, weights = build(order)
    coarse = None
    if order >= 2:
        cn, cw = build(order // 2)
        coarse = QuadratureRule(cn, cw, order // 2)
    return QuadratureRule(nodes, weights, order, coarse)


def half_line_rule(order: int, scale: float = 1.0) -> QuadratureRule:
    """Rule for integrals over [0, inf) via ``s = scale (1+x)/(1-x)``."""
    base = gauss_legendre(order)
    return base.mapped(lambda x: scale * (1 + x) / (1 - x),
                       lambda x: 2 * scale / (1 - x) ** 2)


def circle_rule(radius: float, num_nodes: int) -> QuadratureRule:
    """Trapezoidal rule for a counterclockwise circle about the origin."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    if num_nodes < 4:
        raise ValueError("need at least 4 nodes on a circle")

    def build(n):
        z = radius * np.exp(2j * np.pi * np.arange(n) / n)
        return z, 2j * np.pi * z / n

    nodes, weights = build(num_nodes)
    coarse = None
    if num_nodes >= 8:
        cn, cw = build(num_nodes // 2)
        coarse = QuadratureRule(cn, cw, num_nodes // 2)
    return QuadratureRule(nodes, weights, num_nodes, coarse)


def gauss_jacobi(order: int, exponent: float) -> QuadratureRule:
    """Symmetric Gauss-Jacobi rule for weight ``(1 - x**2)**exponent`` on [-1, 1]."""
    if exponent <= -1:
        raise ValueError("weight exponent must exceed -1")
    x, w = roots_jacobi(order, exponent, exponent)
    coarse = None
    if order >= 2:
        xc, wc = roots_jacobi(order // 2, exponent, exponent)
        coarse = QuadratureRule(xc, wc, order // 2)
    return QuadratureRule(x, w, order, coarse)


def log_sum(log_values: np.ndarray, weights: np.ndarray) -> tuple[float, complex]:
    """Return ``(m, S)`` with ``sum(weights * exp(log_values)) == S * exp(m)``."""
    log_values = np.asarray(log_values, dtype=complex)
    m = float(np.max(log_values.real))
    if not math.isfinite(m):
        if m == -math.inf:
            return 0.0, 0j
        raise NonFiniteIntegrandError(None, m)
    return m, complex(np.sum(weights * np.exp(log_values - m)))


def _check_finite(nodes, log_values):
    bad = ~(np.isfinite(log_values.imag) & (np.isfinite(log_values.real)
                                             | (log_values.real == -np.inf)))
    if bad.any():
        k = int(np.argmax(bad))
        raise NonFiniteIntegrandError(nodes[k], log_values[k])


def integrate(rule: QuadratureRule,
              f: Callable[[np.ndarray], "ScaledIntegrand | np.ndarray"]) -> IntegralResult:
    """Sum ``w_k f(x_k)`` with the largest log-magnitude factored out.

    ``f`` is vectorised over the node array and returns either complex
    log-values or a :class:`ScaledIntegrand` of arrays.  When the rule has a
    coarse companion, the difference between the two sums is reported as
    the error estimate.
    """

    def as_log(vals):
        if isinstance(vals, ScaledIntegrand):
            lm = np.asarray(vals.log_magnitude, dtype=float)
            ph = np.asarray(vals.phase, dtype=complex)
            return np.broadcast_to(lm + 1j * np.angle(ph), np.broadcast(lm, ph).shape)
        return np.asarray(vals, dtype=complex)

    logs = np.broadcast_to(as_log(f(rule.nodes)), rule.nodes.shape)
    _check_finite(rule.nodes, logs)
    m, total = log_sum(logs, rule.weights)
    err = 0.0
    if rule.coarse is not None:
        clogs = np.broadcast_to(as_log(f(rule.coarse.nodes)), rule.coarse.nodes.shape)
        _check_finite(rule.coarse.nodes, clogs)
        cm, ctotal = log_sum(clogs, rule.coarse.weights)
        if ctotal != 0:
            ctotal *= math.exp(cm - m) if cm - m < 700 else math.inf
        err = abs(total - ctotal)
    return IntegralResult(total, m, err)
