"""Exact dual-integral representations of the averaged resolvent trace.

Every evaluator returns ``(1/N) <tr G(E - i eps)>``; the matching
normalisation integrals must return ``i`` for every N, E and eps, which
makes them a free accuracy certificate.

GUE (two-fold)::

    (-1)^(N-1) N / (2 pi)  int_Gamma1 ds  oint dz  (iE_eps - z + s)
        exp(-N (iE_eps s + s^2/2 - ln s)) exp(-N (iE_eps z - z^2/2 + ln z))

Interpolating ensemble with coupling r (GOE is r = 0, four-fold)::

    (-1)^N 2^N N^2 / (8 pi^2)  int ds int dt int_{-1}^{1} dalpha oint dz
        z (s+t)/(st) (1-alpha^2)^(-3/2)
        [1/N + (z-iE_eps)^2 - (2-r)(z-iE_eps)(s+t) + 4(1-r) st (1-alpha^2)]
        exp(-N (iE_eps (s+t) + (1-r/2)(s^2+t^2) + r st - ln(s)/2 - ln(t)/2))
        exp(-N (iE_eps z - z^2/2 + ln z))
        exp(-N (2(1-r) st alpha^2 - ln(1-alpha^2)/2))

The prefactor is a polynomial in z, so the circle integral reduces to three
moments; the alpha integral carries the Jacobi weight (1-alpha^2)^((N-3)/2)
(and ^((N-1)/2) for the 4(1-r)st term) and is done by Gauss-Jacobi.  The
(s, t) integral is a tensor product over Gamma_1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .contours import ContourPlan, build_plan
from .ensemble import Family
from .quadrature import QuadratureRule, gauss_jacobi, log_sum

GUE_TOL = 1e-10
FOUR_FOLD_TOL = 1e-8
_ROW_CHUNK = 64


class QuadratureError(RuntimeError):
    """The error estimate stayed above tolerance after all refinements."""


@dataclass(frozen=True)
class TraceResult:
    value: complex
    quad_error: float
    normalization: complex
    plan_summary: dict = field(default_factory=dict)

    @property
    def dos(self) -> float:
        return dos_from_trace(self)


def dos_from_trace(trace, N: int | None = None) -> float:
    """Density of states ``Im(value) / pi``; the value already carries 1/N."""
    value = trace.value if isinstance(trace, TraceResult) else complex(trace)
    return value.imag / math.pi


# -- GUE -----------------------------------------------------------------------

def _gue_raw(N: int, Ee: complex, g1: QuadratureRule, g2: QuadratureRule) -> tuple[complex, complex]:
    s, ws = g1.nodes, g1.weights
    lf = -N * (1j * Ee * s + s * s / 2 - np.log(s))
    ms, S0 = log_sum(lf, ws)
    _, S1 = log_sum(lf, ws * s)
    _, Sm = log_sum(lf, ws / s)
    z, wz = g2.nodes, g2.weights
    lg = -N * (1j * Ee * z - z * z / 2 + np.log(z))
    mz, Z0 = log_sum(lg, wz)
    _, Z1 = log_sum(lg, wz * z)
    scale = (-1) ** (N - 1) * np.exp(math.log(N / (2 * math.pi)) + ms + mz)
    trace = 1j * Ee * S0 * Z0 - S0 * Z1 + S1 * Z0
    norm = 1j * Ee * Sm * Z0 - Sm * Z1 + S0 * Z0
    return complex(trace * scale), complex(norm * scale)


# -- interpolating / GOE ---------------------------------------------------------

def _four_fold_raw(N: int, Ee: complex, r: float, g1: QuadratureRule, g2: QuadratureRule,
                   alpha_order: int) -> tuple[complex, complex]:
    z, wz = g2.nodes, g2.weights
    u = z - 1j * Ee
    lg = -N * (1j * Ee * z - z * z / 2 + np.log(z))
    mz, Z0 = log_sum(lg, wz * z)
    _, Z1 = log_sum(lg, wz * z * u)
    _, Z2 = log_sum(lg, wz * z * u * u)

    x0sq, w0 = _folded_jacobi(alpha_order, (N - 3) / 2)
    x1sq, w1 = _folded_jacobi(alpha_order, (N - 1) / 2)
    coupling = 2 * N * (1 - r)

    s, ws = g1.nodes, g1.weights
    n = s.size
    ls = -N * (1j * Ee * s + (1 - r / 2) * s * s - 0.5 * np.log(s))
    # the integrand is symmetric in (s, t): visit the upper triangle only
    blocks = []
    m = -math.inf
    for start in range(0, n, _ROW_CHUNK):
        stop = min(start + _ROW_CHUNK, n)
        S = s[start:stop, None]
        T = s[None, start:]
        log_e = ls[start:stop, None] + ls[None, start:] - N * r * S * T
        rows = np.arange(start, stop)[:, None]
        cols = np.arange(start, n)[None, :]
        mult = np.where(cols > rows, 2.0, np.where(cols == rows, 1.0, 0.0))
        blocks.append((start, stop, log_e, mult))
        m = max(m, float(log_e.real[mult > 0].max()))

    trace = 0j
    norm = 0j
    for start, stop, log_e, mult in blocks:
        S = s[start:stop, None]
        T = s[None, start:]
        P = S * T
        weight = np.exp(log_e - m) * (ws[start:stop, None] * ws[None, start:]) * mult
        B0 = np.exp(-coupling * P[..., None] * x0sq) @ w0
        B1 = np.exp(-coupling * P[..., None] * x1sq) @ w1
        bracket = (Z0 / N + Z2 - (2 - r) * (S + T) * Z1) * B0 + 4 * (1 - r) * P * Z0 * B1
        common = weight * bracket / P
        trace += np.sum(common * (S + T))
        norm += np.sum(common)
    log_c = N * math.log(2) + 2 * math.log(N) - math.log(8 * math.pi ** 2) + m + mz
    scale = (-1) ** N * np.exp(log_c)
    return complex(trace * scale), complex(norm * scale)


def _folded_jacobi(order: int, exponent: float) -> tuple[np.ndarray, np.ndarray]:
    """Squared nodes and weights of the symmetric rule, folded onto x >= 0."""
    rule = gauss_jacobi(order, exponent)
    x, w = rule.nodes, rule.weights.real
    keep = x >= 0
    w = np.where(x[keep] > 0, 2 * w[keep], w[keep])
    return x[keep] ** 2, w


# -- driver ----------------------------------------------------------------------

def _coupling(family: Family, r: float | None) -> float:
    if family is Family.GUE:
        return 1.0
    if family is Family.GOE:
        return 0.0
    if r is None or not 0.0 <= r <= 1.0:
        raise ValueError(f"need 0 <= r <= 1, got {r!r}")
    return float(r)


def _raw(plan: ContourPlan, Ee: complex, r: float, coarse: bool):
    g1 = plan.gamma1.coarse if coarse else plan.gamma1
    g2 = plan.gamma2.coarse if coarse else plan.gamma2
    if plan.family is Family.GUE:
        return _gue_raw(plan.N, Ee, g1, g2)
    order = plan.alpha_order // 2 if coarse else plan.alpha_order
    return _four_fold_raw(plan.N, Ee, r, g1, g2, order)


def evaluate(family, N: int, E: float, epsilon: float = 0.0, r: float | None = None,
             plan: ContourPlan | None = None, tol: float | None = None,
             max_doublings: int = 2) -> TraceResult:
    """Evaluate the trace and normalisation integrals together.

    The error estimate compares the rule against its half-order companion;
    the plan is refined (all node counts doubled) until the estimate drops
    below ``tol`` relative to ``max(1, |value|)``.
    """
    family = Family(family)
    r = _coupling(family, r)
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if family is not Family.GUE and N < 2:
        raise ValueError("the four-fold representation needs N >= 2: at N = 1 the alpha "
                         "integral diverges while the z integral vanishes identically")
    if plan is None:
        plan = build_plan(family, N, E)
    elif plan.N != N or plan.E != E or (plan.family is Family.GUE) != (family is Family.GUE):
        raise ValueError("contour plan was built for a different (family, N, E)")
    if tol is None:
        tol = GUE_TOL if family is Family.GUE else FOUR_FOLD_TOL
    Ee = complex(E, -epsilon)
    for attempt in range(max_doublings + 1):
        trace, norm = _raw(plan, Ee, r, coarse=False)
        ctrace, cnorm = _raw(plan, Ee, r, coarse=True)
        err = max(abs(trace - ctrace), abs(norm - cnorm))
        if not (np.isfinite(trace) and np.isfinite(norm)):
            raise QuadratureError(f"non-finite result for N={N}, E={E}")
        if err <= tol * max(1.0, abs(trace)):
            return TraceResult(trace, err, norm, plan.summary())
        if attempt < max_doublings:
            plan = plan.refined()
    raise QuadratureError(f"error estimate {err:.3g} above tolerance {tol:.3g} for "
                          f"{family.value} N={N} E={E} eps={epsilon}")


def gue_trace(N: int, E: float, epsilon: float = 0.0, plan: ContourPlan | None = None,
              **kw) -> TraceResult:
    return evaluate(Family.GUE, N, E, epsilon, plan=plan, **kw)


def gue_normalization(N: int, E: float, epsilon: float = 0.0,
                      plan: ContourPlan | None = None, **kw) -> complex:
    return evaluate(Family.GUE, N, E, epsilon, plan=plan, **kw).normalization


def goe_trace(N: int, E: float, epsilon: float = 0.0, plan: ContourPlan | None = None,
              **kw) -> TraceResult:
    return evaluate(Family.GOE, N, E, epsilon, plan=plan, **kw)


def goe_normalization(N: int, E: float, epsilon: float = 0.0,
                      plan: ContourPlan | None = None, **kw) -> complex:
    return evaluate(Family.GOE, N, E, epsilon, plan=plan, **kw).normalization


def interp_trace(N: int, E: float, epsilon: float, r: float,
                 plan: ContourPlan | None = None, **kw) -> TraceResult:
    return evaluate(Family.INTERPOLATING, N, E, epsilon, r=r, plan=plan, **kw)


def interp_normalization(N: int, E: float, epsilon: float, r: float,
                         plan: ContourPlan | None = None, **kw) -> complex:
    return evaluate(Family.INTERPOLATING, N, E, epsilon, r=r, plan=plan, **kw).normalization


def trace(family, N: int, E: float, epsilon: float = 0.0, r: float | None = None,
          **kw) -> TraceResult:
    """Family-dispatching convenience wrapper around :func:`evaluate`."""
    return evaluate(family, N, E, epsilon, r=r, **kw)


# -- pointwise integrands --------------------------------------------------------

def interp_integrand(N: int, E: float, epsilon: float, r: float, s, t, alpha, z,
                     normalization: bool = False):
    """The full four-fold integrand (without the constant prefactor) at a point.

    Evaluated directly from the formula, independently of the factorised
    evaluator above; used to cross-check it.
    """
    s, t, z = (np.asarray(v, dtype=complex) for v in (s, t, z))
    alpha = np.asarray(alpha, dtype=float)
    Ee = complex(E, -epsilon)
    u = z - 1j * Ee
    one_m = 1 - alpha ** 2
    bracket = 1 / N + u * u - (2 - r) * u * (s + t) + 4 * (1 - r) * s * t * one_m
    pre = z * (1 / (s * t) if normalization else (s + t) / (s * t)) * one_m ** -1.5 * bracket
    log_e = -N * (1j * Ee * (s + t) + (1 - r / 2) * (s * s + t * t) + r * s * t
                  - 0.5 * np.log(s) - 0.5 * np.log(t))
    log_e = log_e - N * (1j * Ee * z - z * z / 2 + np.log(z))
    log_e = log_e - N * (2 * (1 - r) * s * t * alpha ** 2 - 0.5 * np.log(one_m))
    return pre * np.exp(log_e)


def goe_integrand(N: int, E: float, epsilon: float, s, t, alpha, z, normalization: bool = False):
    """GOE four-fold integrand, written out with the GOE coefficients."""
    s, t, z = (np.asarray(v, dtype=complex) for v in (s, t, z))
    alpha = np.asarray(alpha, dtype=float)
    Ee = complex(E, -epsilon)
    u = z - 1j * Ee
    one_m = 1 - alpha ** 2
    bracket = 1 / N + u * u - 2 * u * (s + t) + 4 * s * t * one_m
    pre = z * (1 / (s * t) if normalization else (s + t) / (s * t)) * one_m ** -1.5 * bracket
    log_e = (-N * (1j * Ee * (s + t) + s * s + t * t - 0.5 * np.log(s) - 0.5 * np.log(t))
             - N * (1j * Ee * z - z * z / 2 + np.log(z))
             - N * (2 * s * t * alpha ** 2 - 0.5 * np.log(one_m)))
    return pre * np.exp(log_e)


def four_fold_constant(N: int) -> float:
    """``(-1)^N 2^N N^2 / (8 pi^2)``; only usable where it does not overflow."""
    return (-1) ** N * 2.0 ** N * N ** 2 / (8 * math.pi ** 2)
