"""Semicircle law and its 1/N corrections in the bulk.

With ``w = -iE/2 + sqrt(1 - E^2/4)`` (a unit-modulus number) the three
expansions read

GUE::

    rho_sc - (-1)^N / (4 pi^3 N rho_sc^2) cos[N (E sqrt(1-E^2/4) + 2 arcsin(E/2))]

GOE::

    rho_sc - 1 / (4 pi^2 N rho_sc)

interpolating (coupling r)::

    rho_sc - (-1)^N r / (4 pi^3 N rho_sc^2) Re{ exp(-N (iE sqrt(1-E^2/4)
                 + 2 ln(iE/2 + sqrt(1-E^2/4)))) / ((1-r) w^2 + 1) }
           - (1-r) / (2 pi^2 N rho_sc) Re{ (2 sqrt(1-E^2/4) - r w) w^3 / ((1-r) w^2 + 1)^2 }

all up to O(N^-3/2).  The combination ``1 - E^2/2 - iE sqrt(1-E^2/4)``
that appears in the interpolating denominators equals ``w**2``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Iterable

from .contours import DEFAULT_EDGE, EnergyRangeError
from .ensemble import Family

RESIDUAL_ORDER = "O(N^-3/2)"
BULK_EDGE = DEFAULT_EDGE


@dataclass(frozen=True)
class ExpansionResult:
    rho_sc: float
    correction: float
    residual_order: str = RESIDUAL_ORDER

    @property
    def total(self) -> float:
        return self.rho_sc + self.correction


def semicircle(E: float) -> float:
    return math.sqrt(max(0.0, 1.0 - E * E / 4.0)) / math.pi


def _bulk(N: int, E: float) -> float:
    if N < 1:
        raise ValueError("N must be positive")
    if not math.isfinite(E) or abs(E) > BULK_EDGE:
        raise EnergyRangeError(f"expansions hold in the bulk |E| <= {BULK_EDGE}, got E={E}")
    return semicircle(E)


def gue_phase(E: float) -> float:
    return E * math.sqrt(1 - E * E / 4) + 2 * math.asin(E / 2)


def gue_expansion(N: int, E: float) -> ExpansionResult:
    rho = _bulk(N, E)
    amp = (-1) ** N / (4 * math.pi ** 3 * N * rho ** 2)
    return ExpansionResult(rho, -amp * math.cos(N * gue_phase(E)))


def goe_expansion(N: int, E: float) -> ExpansionResult:
    rho = _bulk(N, E)
    return ExpansionResult(rho, -1.0 / (4 * math.pi ** 2 * N * rho))


def interp_expansion(N: int, E: float, r: float) -> ExpansionResult:
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"need 0 <= r <= 1, got {r}")
    rho = _bulk(N, E)
    root = math.sqrt(1 - E * E / 4)
    w = complex(root, -E / 2)
    denom = (1 - r) * complex(1 - E * E / 2, -E * root) + 1
    phase = cmath.exp(-N * (1j * E * root + 2 * cmath.log(complex(root, E / 2))))
    oscillatory = -((-1) ** N) * r / (4 * math.pi ** 3 * N * rho ** 2) * (phase / denom).real
    smooth = -(1 - r) / (2 * math.pi ** 2 * N * rho) * ((2 * root - r * w) * w ** 3 / denom ** 2).real
    return ExpansionResult(rho, oscillatory + smooth)


def expansion(family, N: int, E: float, r: float | None = None) -> ExpansionResult:
    family = Family(family)
    if family is Family.GUE:
        return gue_expansion(N, E)
    if family is Family.GOE:
        return goe_expansion(N, E)
    return interp_expansion(N, E, r)


@dataclass(frozen=True)
class ResidualRow:
    N: int
    exact: float
    expansion: float
    residual: float
    scaled_residual: float


def residual_scaling(family, E: float, N_list: Iterable[int], r: float | None = None,
                     exact: Callable[[int], float] | None = None) -> list[ResidualRow]:
    """Tabulate ``|exact - expansion| * N^{3/2}`` over ``N_list``.

    ``exact`` maps N to the exact density; by default the dual-integral
    evaluators at eps = 0 are used.
    """
    if exact is None:
        from .susy_integrals import evaluate

        def exact(n):
            return evaluate(family, n, E, 0.0, r=r).dos

    rows = []
    for n in N_list:
        ex = exact(n)
        approx = expansion(family, n, E, r).total
        res = abs(ex - approx)
        rows.append(ResidualRow(n, ex, approx, res, res * n ** 1.5))
    return rows


def growth_flag(rows: list[ResidualRow]) -> bool:
    """True when scaled residuals increase monotonically across the table."""
    scaled = [row.scaled_residual for row in rows]
    return len(scaled) > 2 and all(b > a for a, b in zip(scaled, scaled[1:]))
