"""Saddle points, deformed contours and executable monotonicity checks.

The s-contour is a ray from the origin through the saddle ``s_plus``
(parameter ``s_hat`` in ``[0, A]``) continued horizontally to ``+inf``; the
z-contour is the unit circle.  For the two-variable (GOE / interpolating)
representations the same ray is used scaled by 1/2, so ``s_hat = 1`` lands
on ``s_plus / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .ensemble import Family
from .quadrature import QuadratureRule, circle_rule, composite_gauss_legendre

DEFAULT_EDGE = 1.95
# Gamma_1 is cut where N * (Re f - Re f(saddle)) exceeds this (40 decades + margin).
TAIL_DECAY = 40 * math.log(10) + 8.0


class EnergyRangeError(ValueError):
    pass


def _check_energy(E: float, edge: float = 2.0) -> None:
    if not math.isfinite(E) or abs(E) >= edge:
        raise EnergyRangeError(f"|E| must be below {edge}, got E={E}")


@dataclass(frozen=True)
class SaddleData:
    E: float
    s_plus: complex
    s_minus: complex
    z_plus: complex
    z_minus: complex


def saddle_points(E: float) -> SaddleData:
    _check_energy(E)
    root = math.sqrt(1.0 - E * E / 4.0)
    return SaddleData(E, complex(root, -E / 2), complex(-root, -E / 2),
                      complex(root, E / 2), complex(-root, E / 2))


def _family(family) -> Family:
    return Family(family)


def choose_A(E: float, family) -> float:
    """Length of the ray segment of Gamma_1, per the family's case split."""
    _check_energy(E)
    if _family(family) is Family.GUE:
        return 2.0 if abs(E) <= math.sqrt(3.0) else 1.0 / (E * E / 2 - 1)
    return 2.0 if abs(E) <= math.sqrt(2.5) else 1.0 / math.sqrt(E * E / 2 - 1)


def contour_scale(family) -> float:
    return 1.0 if _family(family) is Family.GUE else 0.5


def gamma1_path(E: float, A: float, s_hat):
    """Point(s) on the unscaled Gamma_1 at parameter ``s_hat >= 0``."""
    s_plus = saddle_points(E).s_plus
    s_hat = np.asarray(s_hat, dtype=float)
    if np.any(s_hat < 0):
        raise ValueError("s_hat must be non-negative")
    out = np.where(s_hat <= A, s_plus * s_hat, s_plus * A + (s_hat - A))
    return out[()] if out.ndim == 0 else out


def exponent_f(family, E, s):
    """Single-variable exponent whose saddle Gamma_1 is built around.

    GUE: ``iEs + s^2/2 - ln s``; GOE/interpolating: ``iEs + s^2 - ln(s)/2``.
    """
    s = np.asarray(s, dtype=complex)
    if _family(family) is Family.GUE:
        return 1j * E * s + s * s / 2 - np.log(s)
    return 1j * E * s + s * s - 0.5 * np.log(s)


def exponent_g(E, z):
    z = np.asarray(z, dtype=complex)
    return 1j * E * z - z * z / 2 + np.log(z)


def _tail_end(family, E: float, A: float, N: int, scale: float) -> float:
    """Parameter where the horizontal tail has decayed by ``TAIL_DECAY / N``."""
    s_plus = saddle_points(E).s_plus
    base = float(exponent_f(family, E, scale * s_plus).real)
    target = base + TAIL_DECAY / N

    def re_f(x):
        return float(exponent_f(family, E, scale * (s_plus * A + (x - A))).real)

    hi = A + 1.0
    while re_f(hi) < target:
        hi = A + 2 * (hi - A)
    lo = A
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if re_f(mid) < target:
            lo = mid
        else:
            hi = mid
    return hi


def gamma1_rule(family, E: float, N: int, A: float | None = None, panels: int = 24,
                order: int = 32) -> tuple[QuadratureRule, float]:
    """Composite GL rule along (scaled) Gamma_1 and the truncation parameter.

    The ray is parametrised by ``s_hat = v**2`` so that half-integer powers
    of s at the origin become polynomial in v.
    """
    A = choose_A(E, family) if A is None else float(A)
    scale = contour_scale(family)
    s_plus = saddle_points(E).s_plus
    s_max = _tail_end(family, E, A, N, scale)
    ray = composite_gauss_legendre(0.0, math.sqrt(A), panels, order).mapped(
        lambda v: scale * s_plus * v * v, lambda v: scale * s_plus * 2 * v)
    # the tail length shrinks like N**-1/2, as does the integrand's width
    tail = composite_gauss_legendre(A, s_max, panels, order).mapped(
        lambda x: scale * (s_plus * A + (x - A)), lambda x: scale * np.ones_like(x))
    return ray.concat(tail), s_max


@dataclass(frozen=True)
class ContourPlan:
    family: Family
    E: float
    N: int
    A: float
    saddles: SaddleData
    gamma1: QuadratureRule = field(repr=False)
    gamma2: QuadratureRule = field(repr=False)
    alpha_order: int | None
    s_hat_max: float
    panels: int
    order: int

    @property
    def scale(self) -> float:
        return contour_scale(self.family)

    @property
    def effective_saddle(self) -> complex:
        return self.scale * self.saddles.s_plus

    @property
    def tail_bound(self) -> float:
        """Relative size of the discarded Gamma_1 tail."""
        return math.exp(-TAIL_DECAY)

    def summary(self) -> dict:
        return {"A": self.A, "gamma1_nodes": len(self.gamma1), "gamma2_nodes": len(self.gamma2),
                "alpha_nodes": self.alpha_order, "s_hat_max": self.s_hat_max}

    def refined(self) -> "ContourPlan":
        """Same contours with every node count doubled."""
        return build_plan(self.family, self.N, self.E, A=self.A, panels=self.panels,
                          order=2 * self.order, circle_nodes=2 * len(self.gamma2),
                          alpha_order=None if self.alpha_order is None else 2 * self.alpha_order,
                          edge=2.0)


def build_plan(family, N: int, E: float, *, A: float | None = None, panels: int | None = None,
               order: int | None = None, circle_nodes: int = 512,
               alpha_order: int | None = None, edge: float = DEFAULT_EDGE) -> ContourPlan:
    """Contours and quadrature rules for one (family, N, E).

    The GUE default (24 panels of order 32 per segment) follows the usual
    calibration; the four-fold representations default to 8 panels of order
    24 because their cost is quadratic in the Gamma_1 node count.
    """
    family = _family(family)
    if N < 1:
        raise ValueError("N must be positive")
    _check_energy(E, edge)
    four_fold = family is not Family.GUE
    if panels is None:
        panels = 8 if four_fold else 24
    if order is None:
        order = 24 if four_fold else 32
    if four_fold and alpha_order is None:
        alpha_order = 48
    A = choose_A(E, family) if A is None else float(A)
    g1, s_max = gamma1_rule(family, E, N, A, panels, order)
    return ContourPlan(family, float(E), int(N), A, saddle_points(E), g1,
                       circle_rule(1.0, circle_nodes), alpha_order if four_fold else None,
                       s_max, panels, order)


# -- claim checks --------------------------------------------------------------

@dataclass
class ClaimReport:
    name: str
    E: float
    passed: bool
    minimum_at: float | tuple
    minimum_value: float
    violation: str | None = None
    details: dict = field(default_factory=dict)


def _first_monotone_violation(values: np.ndarray, k_min: int) -> int | None:
    d = np.diff(values)
    left = np.nonzero(d[:k_min] >= 0)[0]
    if left.size:
        return int(left[0])
    right = np.nonzero(d[k_min:] <= 0)[0]
    if right.size:
        return int(right[0] + k_min)
    return None


def verify_claim_f(E: float, family, grid_size: int = 10_000, delta: float = 0.05,
                   s_hat_max: float | None = None) -> ClaimReport:
    """Scan Re f along Gamma_1: single minimum at ``s_hat = 1``, monotone flanks."""
    if abs(E) > 2 - delta:
        raise EnergyRangeError(f"|E| must not exceed {2 - delta}")
    family = _family(family)
    A = choose_A(E, family)
    scale = contour_scale(family)
    s_hat_max = A + 3.0 if s_hat_max is None else s_hat_max
    s_hat = s_hat_max * np.arange(1, grid_size + 1) / grid_size
    values = exponent_f(family, E, scale * gamma1_path(E, A, s_hat)).real
    k = int(np.argmin(values))
    cell = s_hat_max / grid_size
    violation = None
    if abs(s_hat[k] - 1.0) > cell:
        violation = f"minimum at s_hat={s_hat[k]:.6g}, expected 1"
    else:
        bad = _first_monotone_violation(values, k)
        if bad is not None:
            violation = f"Re f not monotone on cell [{s_hat[bad]:.6g}, {s_hat[bad + 1]:.6g}]"
    return ClaimReport("f", E, violation is None, float(s_hat[k]), float(values[k]), violation,
                       {"family": family.value, "A": A, "grid_size": grid_size})


def verify_claim_g(E: float, grid_size: int = 10_000) -> ClaimReport:
    """Scan Re g on the unit circle: minima exactly where sin(theta) = E/2."""
    _check_energy(E)
    theta = 2 * np.pi * np.arange(grid_size) / grid_size
    values = exponent_g(E, np.exp(1j * theta)).real
    left = np.roll(values, 1)
    right = np.roll(values, -1)
    minima = np.nonzero((values <= left) & (values <= right))[0]
    expected = np.array([math.asin(E / 2) % (2 * np.pi), (np.pi - math.asin(E / 2)) % (2 * np.pi)])
    cell = 2 * np.pi / grid_size
    violation = None
    found = theta[minima]
    if minima.size != 2:
        violation = f"expected two minima, found {minima.size} at theta={found}"
    else:
        for t in found:
            gap = np.min(np.abs((expected - t + np.pi) % (2 * np.pi) - np.pi))
            if gap > cell:
                violation = f"minimum at theta={t:.6g} is not at sin(theta)=E/2"
                break
    slope = [-math.cos(t) * (E - 2 * math.sin(t)) for t in expected]
    if violation is None and max(abs(x) for x in slope) > 1e-10:
        violation = "derivative does not vanish at the predicted minima"
    return ClaimReport("g", E, violation is None, tuple(float(t) for t in found),
                       float(values[minima].min()) if minima.size else math.nan, violation,
                       {"predicted_theta": tuple(expected), "derivative_at_predicted": slope})


def alpha_exponent(s: complex, t: complex, alpha):
    """Real part of ``2 s t alpha^2 - ln(1 - alpha^2)/2``."""
    alpha = np.asarray(alpha, dtype=float)
    with np.errstate(divide="ignore"):
        return 2 * (s * t).real * alpha ** 2 - 0.5 * np.log1p(-alpha ** 2)


def verify_claim_alpha(E: float, s: complex, t: complex, grid_size: int = 10_000) -> ClaimReport:
    """Scan the alpha-exponent over (-1, 1) for one (s, t) pair.

    Besides locating the minimum, this records ``4 Re(st) + 1``: when it is
    non-negative the only stationary point in (-1, 1) is alpha = 0 (the
    other two satisfy alpha^2 = 1 + 1/(4 Re st), outside the interval).
    """
    alpha = -1 + 2 * np.arange(1, grid_size) / grid_size
    values = alpha_exponent(s, t, alpha)
    k = int(np.argmin(values))
    re_st = float((s * t).real)
    cell = 2.0 / grid_size
    stationary_sq = math.inf if re_st == 0 else 1 + 1 / (4 * re_st)
    violation = None
    if abs(alpha[k]) > cell:
        violation = f"minimum at alpha={alpha[k]:.6g}"
    elif 4 * re_st + 1 < 0:
        violation = f"4 Re(st) + 1 = {4 * re_st + 1:.3g} < 0"
    elif 0 < stationary_sq < 1:
        violation = f"stationary point alpha^2={stationary_sq:.6g} inside (-1, 1)"
    else:
        bad = _first_monotone_violation(values, k)
        if bad is not None:
            violation = f"not monotone on cell starting at alpha={alpha[bad]:.6g}"
    return ClaimReport("alpha", E, violation is None, float(alpha[k]), float(values[k]), violation,
                       {"re_st": re_st, "stationary_alpha_sq": stationary_sq,
                        "endpoint_values": (float(values[0]), float(values[-1]))})


def verify_claim_alpha_on_contour(E: float, grid_size: int = 10_000,
                                  pairs_per_axis: int = 25) -> ClaimReport:
    """Run :func:`verify_claim_alpha` over a grid of (s, t) on the GOE contour."""
    A = choose_A(E, Family.GOE)
    s_hat = np.linspace(0.0, A + 3.0, pairs_per_axis)
    pts = 0.5 * gamma1_path(E, A, s_hat)
    worst = None
    min_re = math.inf
    for s in pts:
        for t in pts:
            rep = verify_claim_alpha(E, complex(s), complex(t), grid_size)
            min_re = min(min_re, rep.details["re_st"])
            if not rep.passed:
                return replace(rep, details={**rep.details, "s": complex(s), "t": complex(t)})
            worst = rep
    return ClaimReport("alpha", E, True, 0.0, worst.minimum_value, None,
                       {"min_re_st": min_re, "min_4re_st_plus_1": 4 * min_re + 1,
                        "pairs": pairs_per_axis ** 2})
