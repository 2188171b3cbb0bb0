"""A small exterior-algebra engine for Berezin integrals.

Generators come in pairs ``psibar_j, psi_j`` (j = 1..M).  Monomials are
bitmasks with ``psibar_j`` on bit ``2(j-1)`` and ``psi_j`` on bit ``2j-1``;
a stored monomial is the product of its generators in increasing bit order.

Integration follows ``int dpsi_j psi_j = 1`` with the measure written to
the left of the integrand and the innermost differential acting first, so
that ``D psi = prod_j dpsibar_j dpsi_j`` gives ``int D psi [psi, psi]^N =
(-1)^N N!``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .quadrature import circle_rule, integrate

MAX_GENERATORS = 24
PRUNE = 1e-300


def psibar_bit(j: int) -> int:
    return 2 * (j - 1)


def psi_bit(j: int) -> int:
    return 2 * (j - 1) + 1


def _parity_before(mask: int, bit: int) -> int:
    return bin(mask & ((1 << bit) - 1)).count("1") & 1


def _product_sign(a: int, b: int) -> int:
    """Sign from sorting the concatenation of two ordered monomials."""
    swaps = 0
    m = b
    while m:
        low = m & -m
        swaps += bin(a & ~((low << 1) - 1)).count("1")
        m ^= low
    return -1 if swaps & 1 else 1


class GrassmannElement:
    """Sparse element of the exterior algebra over 2M generators."""

    __slots__ = ("num_pairs", "terms")

    def __init__(self, num_pairs: int, terms: dict[int, complex] | None = None):
        if 2 * num_pairs > MAX_GENERATORS:
            raise ValueError(f"at most {MAX_GENERATORS} generators are supported")
        self.num_pairs = num_pairs
        self.terms = {m: complex(c) for m, c in (terms or {}).items() if abs(c) > PRUNE}

    # -- constructors
    @classmethod
    def scalar(cls, value: complex, num_pairs: int) -> "GrassmannElement":
        return cls(num_pairs, {0: value})

    @classmethod
    def psi(cls, j: int, num_pairs: int) -> "GrassmannElement":
        return cls(num_pairs, {1 << psi_bit(j): 1.0})

    @classmethod
    def psibar(cls, j: int, num_pairs: int) -> "GrassmannElement":
        return cls(num_pairs, {1 << psibar_bit(j): 1.0})

    @classmethod
    def pair(cls, j: int, num_pairs: int) -> "GrassmannElement":
        """``psibar_j psi_j``."""
        return cls(num_pairs, {(1 << psibar_bit(j)) | (1 << psi_bit(j)): 1.0})

    @classmethod
    def bracket(cls, num_pairs: int, pairs: Iterable[int] | None = None) -> "GrassmannElement":
        """``sum_j psibar_j psi_j`` over ``pairs`` (default: all)."""
        pairs = range(1, num_pairs + 1) if pairs is None else pairs
        out = cls(num_pairs)
        for j in pairs:
            out = out + cls.pair(j, num_pairs)
        return out

    # -- inspection
    @property
    def num_generators(self) -> int:
        return 2 * self.num_pairs

    def scalar_part(self) -> complex:
        return self.terms.get(0, 0j)

    def is_even(self) -> bool:
        return all(bin(m).count("1") % 2 == 0 for m in self.terms)

    def is_odd(self) -> bool:
        return all(bin(m).count("1") % 2 == 1 for m in self.terms)

    def allclose(self, other: "GrassmannElement", tol: float = 1e-12) -> bool:
        other = self._coerce(other)
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= tol for k in keys)

    def max_abs_difference(self, other: "GrassmannElement") -> float:
        other = self._coerce(other)
        keys = set(self.terms) | set(other.terms)
        return max((abs(self.terms.get(k, 0) - other.terms.get(k, 0)) for k in keys), default=0.0)

    # -- arithmetic
    def _coerce(self, other) -> "GrassmannElement":
        if isinstance(other, GrassmannElement):
            if other.num_pairs != self.num_pairs:
                raise ValueError("elements live in different generator spaces")
            return other
        return GrassmannElement.scalar(other, self.num_pairs)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0) + c
        return GrassmannElement(self.num_pairs, terms)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElement(self.num_pairs, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, GrassmannElement):
            return GrassmannElement(self.num_pairs, {m: c * other for m, c in self.terms.items()})
        return multiply(self, other)

    def __rmul__(self, other):
        return GrassmannElement(self.num_pairs, {m: other * c for m, c in self.terms.items()})

    def __truediv__(self, other):
        return self * (1.0 / other)

    def __pow__(self, k: int):
        out = GrassmannElement.scalar(1.0, self.num_pairs)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, GrassmannElement):
            other = GrassmannElement.scalar(other, self.num_pairs)
        return self.num_pairs == other.num_pairs and self.allclose(other, 0.0)

    def __repr__(self):
        return f"GrassmannElement({self.num_pairs}, {self.terms})"


def multiply(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    if a.num_pairs != b.num_pairs:
        raise ValueError("elements live in different generator spaces")
    terms: dict[int, complex] = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            if ma & mb:
                continue
            m = ma | mb
            terms[m] = terms.get(m, 0) + _product_sign(ma, mb) * ca * cb
    return GrassmannElement(a.num_pairs, terms)


def exp_even(a: GrassmannElement) -> GrassmannElement:
    """``exp(a)`` for an even, nilpotent ``a``; the series terminates."""
    if not a.is_even():
        raise ValueError("exp_even needs an element with only even-degree terms")
    if abs(a.scalar_part()) > 0:
        raise ValueError("scalar part must be split off before exponentiating")
    out = GrassmannElement.scalar(1.0, a.num_pairs)
    term = GrassmannElement.scalar(1.0, a.num_pairs)
    for k in range(1, a.num_pairs + 1):
        term = term * a / k
        if not term.terms:
            break
        out = out + term
    return out


def dpsi_order(num_pairs: int, pairs: Sequence[int] | None = None) -> list[int]:
    """Generator order whose monomial integrates to +1 under ``prod dpsibar_j dpsi_j``."""
    pairs = range(1, num_pairs + 1) if pairs is None else pairs
    out = []
    for j in pairs:
        out += [psi_bit(j), psibar_bit(j)]
    return out


def berezin_integrate(a: GrassmannElement, order: Sequence[int]) -> complex:
    """Full Berezin integral: the top coefficient, signed by ``order``.

    ``order`` lists every generator (by bit index) once; the monomial
    ``g[order[0]] g[order[1]] ...`` is the one that integrates to +1.  Use
    :func:`dpsi_order` for the standard measure.
    """
    n = a.num_generators
    if sorted(order) != list(range(n)):
        raise ValueError("integration order must list every generator exactly once")
    inversions = sum(1 for i in range(n) for j in range(i + 1, n) if order[i] > order[j])
    sign = -1 if inversions & 1 else 1
    return sign * a.terms.get((1 << n) - 1, 0j)


def _left_integrate(a: GrassmannElement, bit: int) -> GrassmannElement:
    terms = {}
    for m, c in a.terms.items():
        if m >> bit & 1:
            sign = -1 if _parity_before(m, bit) else 1
            terms[m ^ (1 << bit)] = sign * c
    return GrassmannElement(a.num_pairs, terms)


def integrate_pairs(a: GrassmannElement, pairs: Iterable[int]) -> GrassmannElement:
    """Partial integral ``int prod_{j in pairs} dpsibar_j dpsi_j  a``."""
    out = a
    for j in pairs:
        out = _left_integrate(out, psi_bit(j))
        out = _left_integrate(out, psibar_bit(j))
    return out


# -- verification against closed forms ------------------------------------------

@dataclass
class PhipolarReport:
    N: int
    coefficients: tuple
    engine: complex
    contour: complex
    passed: bool

    @property
    def difference(self) -> float:
        return abs(self.engine - self.contour)


def verify_phipolar(N: int, coefficients: Sequence[complex], tol: float = 1e-10,
                    num_nodes: int = 64) -> PhipolarReport:
    """Compare ``int D phi F([phi, phi])`` with ``(-1)^N N!/(2 pi i) oint F(z) z^-(N+1) dz``.

    ``coefficients[k]`` is the coefficient of ``z^k`` in F.
    """
    coefficients = tuple(complex(c) for c in coefficients)
    if N < 1 or 2 * N > MAX_GENERATORS:
        raise ValueError("N out of range")
    if len(coefficients) - 1 > 2 * N:
        raise ValueError("polynomial degree must not exceed 2N")
    b = GrassmannElement.bracket(N)
    F = GrassmannElement(N)
    power = GrassmannElement.scalar(1.0, N)
    for c in coefficients:
        F = F + c * power
        power = power * b
    engine = berezin_integrate(F, dpsi_order(N))

    rule = circle_rule(1.0, max(num_nodes, 2 * len(coefficients) + 8))
    poly = np.polynomial.Polynomial(coefficients)
    res = integrate(rule, lambda z: np.log(poly(z) * z ** (-(N + 1)) + 0j))
    contour = (-1) ** N * math.factorial(N) / (2j * math.pi) * res.value
    return PhipolarReport(N, coefficients, engine, contour, abs(engine - contour) <= tol)


@dataclass
class BlockReport:
    name: str
    max_difference: float
    passed: bool
    engine: GrassmannElement = field(repr=False)
    closed_form: GrassmannElement = field(repr=False)


def _split_scalar(x: GrassmannElement) -> tuple[complex, GrassmannElement]:
    c = x.scalar_part()
    return c, x - c


def gue_block(E: float, epsilon: float, N: int, z_sq: float, extra_pairs: int = 1,
              tol: float = 1e-12) -> BlockReport:
    """Integrate out the first fermion pair of the GUE rotated exponent.

    The remaining pairs stand for the rest of the rotated Grassmann vector
    and are kept as genuine generators.  The closed form is
    ``(iE_eps + [z,z]/N - [phi~,phi~]/N)`` times the untouched factor.
    """
    M = 1 + extra_pairs
    Ee = complex(E, -epsilon)
    q1 = GrassmannElement.pair(1, M)
    rest = GrassmannElement.bracket(M, range(2, M + 1))
    full = q1 + rest
    # -iE_eps [psi,psi] - (1/2N)( -[psi,psi]^2 + 2 [z,z] psibar_1 psi_1 )
    exponent = -1j * Ee * full + (full * full) / (2 * N) - (z_sq / N) * q1
    engine = integrate_pairs(exp_even(exponent), [1])
    untouched = exp_even(-1j * Ee * rest + (rest * rest) / (2 * N))
    closed = (1j * Ee + z_sq / N - rest / N) * untouched
    diff = engine.max_abs_difference(closed)
    return BlockReport("gue_one_pair", diff, diff <= tol, engine, closed)


def goe_block(E: float, epsilon: float, N: int, x_sq: float, y_sq: float, xy: float,
              extra_pairs: int = 1, tol: float = 1e-12) -> BlockReport:
    """Integrate out the first two fermion pairs of the GOE rotated exponent.

    ``u = (1 + [x,y]/(|x||y|))/2`` parametrises the rotated frame; the
    closed form is

        1/N + (P/N - iE)^2 - 2/N (P/N - iE)(|x|^2+|y|^2) + 4/N^2 (|x|^2|y|^2 - [x,y]^2)

    with ``P = [phi~, phi~]``, times the untouched factor.
    """
    if xy * xy > x_sq * y_sq:
        raise ValueError("need [x,y]^2 <= |x|^2 |y|^2")
    M = 2 + extra_pairs
    Ee = complex(E, -epsilon)
    u = 0.5 * (1 + xy / math.sqrt(x_sq * y_sq))
    S = x_sq + y_sq
    D = x_sq - y_sq
    q1 = GrassmannElement.pair(1, M)
    q2 = GrassmannElement.pair(2, M)
    mix = (GrassmannElement.psibar(2, M) * GrassmannElement.psi(1, M)
           + GrassmannElement.psibar(1, M) * GrassmannElement.psi(2, M))
    rest = GrassmannElement.bracket(M, range(3, M + 1))
    full = q1 + q2 + rest
    exponent = (-1j * Ee * full
                - (1 / (2 * N)) * (-(full * full) + 4 * S * (u * q1 + (1 - u) * q2)
                                   + 4 * math.sqrt(u * (1 - u)) * D * mix))
    engine = integrate_pairs(exp_even(exponent), [1, 2])
    untouched = exp_even(-1j * Ee * rest + (rest * rest) / (2 * N))
    a = rest / N - 1j * Ee
    closed = (1 / N + a * a - (2 / N) * a * S + 4 / N ** 2 * (x_sq * y_sq - xy * xy)) * untouched
    diff = engine.max_abs_difference(closed)
    return BlockReport("goe_two_pair", diff, diff <= tol, engine, closed)


def verify_fermionic_blocks(E: float, epsilon: float = 0.0, N: int = 5, z_sq: float = 1.3,
                            x_sq: float = 0.8, y_sq: float = 1.7, xy: float = 0.4,
                            extra_pairs: int = 1, tol: float = 1e-12) -> list[BlockReport]:
    """Both fermionic block integrations against their closed forms."""
    return [gue_block(E, epsilon, N, z_sq, extra_pairs, tol),
            goe_block(E, epsilon, N, x_sq, y_sq, xy, extra_pairs, tol)]
