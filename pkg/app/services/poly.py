"""Exact polynomial arithmetic over ZZ, QQ and cyclotomic fields.

Everything here is a thin, immutable layer over ``sympy.Poly`` so that the
rest of the package can pass Alexander polynomials around as plain values.
Coefficient lists are always lowest degree first.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import sympy as sp
from sympy import QQ, ZZ, Poly, Rational

from app.core.errors import InputError, check

logger = logging.getLogger(__name__)

t = sp.Symbol("t")
_x = sp.Symbol("x")
_z = sp.Symbol("z")


def _strip(coeffs: Iterable[int]) -> tuple[int, ...]:
    out = [int(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class IntPoly:
    """Dense integer polynomial, coefficients lowest degree first."""

    coeffs: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", _strip(self.coeffs))

    @classmethod
    def of(cls, *coeffs: int) -> IntPoly:
        return cls(tuple(coeffs))

    @classmethod
    def from_sympy(cls, poly: Poly | sp.Expr) -> IntPoly:
        if not isinstance(poly, Poly):
            poly = Poly(poly, t)
        coeffs = list(reversed(poly.all_coeffs()))
        values = []
        for c in coeffs:
            c = sp.nsimplify(c)
            if not c.is_integer:
                raise InputError(f"non-integer coefficient {c} in {poly.as_expr()}")
            values.append(int(c))
        return cls(tuple(values))

    @classmethod
    def _from_zz(cls, poly: Poly) -> IntPoly:
        return cls(tuple(int(c) for c in reversed(poly.all_coeffs())))

    def to_sympy(self, var: sp.Symbol = t) -> Poly:
        if self.is_zero:
            return Poly(0, var, domain=ZZ)
        return Poly(list(reversed(self.coeffs)), var, domain=ZZ)

    def as_expr(self, var: sp.Symbol = t) -> sp.Expr:
        return self.to_sympy(var).as_expr()

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    @property
    def constant(self) -> int:
        return self.coeffs[0] if self.coeffs else 0

    def __add__(self, other: IntPoly) -> IntPoly:
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return IntPoly(tuple(x + y for x, y in zip(a, b, strict=True)))

    def __neg__(self) -> IntPoly:
        return IntPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: IntPoly) -> IntPoly:
        return self + (-other)

    def __mul__(self, other: IntPoly | int) -> IntPoly:
        if isinstance(other, int):
            return IntPoly(tuple(c * other for c in self.coeffs))
        return IntPoly._from_zz(self.to_sympy() * other.to_sympy())

    __rmul__ = __mul__

    def __pow__(self, k: int) -> IntPoly:
        return IntPoly._from_zz(self.to_sympy() ** k)

    def exact_div(self, other: IntPoly) -> IntPoly:
        q, r = self.to_sympy().div(other.to_sympy())
        if not r.is_zero:
            raise InputError(f"{other} does not divide {self}")
        return IntPoly.from_sympy(q)

    def divides(self, other: IntPoly) -> bool:
        """True when ``self`` divides ``other`` over QQ."""
        return other.to_sympy().rem(self.to_sympy()).is_zero

    @property
    def content(self) -> int:
        return int(sp.igcd(*self.coeffs)) if self.coeffs else 0

    def primitive(self) -> IntPoly:
        """Primitive part with positive leading coefficient."""
        if self.is_zero:
            return self
        c = self.content
        if self.leading < 0:
            c = -c
        return IntPoly(tuple(x // c for x in self.coeffs))

    def reverse(self) -> IntPoly:
        return IntPoly(tuple(reversed(self.coeffs)))

    def derivative(self) -> IntPoly:
        return IntPoly(tuple(i * c for i, c in enumerate(self.coeffs) if i))

    def evaluate(self, x: Any) -> Any:
        acc: Any = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def compose_shift(self, k: int) -> IntPoly:
        """``t**k * self`` for ``k >= 0``."""
        return IntPoly((0,) * k + self.coeffs)

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        return str(self.as_expr()).replace("**", "^")

    def to_list(self) -> list[int]:
        return list(self.coeffs)


@dataclass(frozen=True)
class LaurentPoly:
    """``t**offset * (c0 + c1 t + ...)``; offset may be negative."""

    coeffs: tuple[int, ...]
    offset: int = 0

    @classmethod
    def from_pair(cls, coeffs: Sequence[int], offset: int) -> LaurentPoly:
        return cls(tuple(int(c) for c in coeffs), offset)

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)


def normalize_alexander(p: LaurentPoly | IntPoly) -> IntPoly:
    """Shift by a power of t to a polynomial with positive nonzero constant term."""
    coeffs = p.coeffs
    if not any(coeffs):
        raise InputError("zero Alexander polynomial")
    start = next(i for i, c in enumerate(coeffs) if c)
    out = IntPoly(tuple(coeffs[start:]))
    if out.constant < 0:
        out = -out
    return out


def is_symmetric(p: IntPoly) -> bool:
    if p.is_zero:
        raise InputError("zero polynomial has no symmetry type")
    rev = p.reverse()
    return p == rev or p == -rev


def reciprocal(p: IntPoly) -> IntPoly:
    return p.reverse()


@dataclass(frozen=True)
class SymmetricFactor:
    poly: IntPoly
    exponent: int
    symmetric: bool


@dataclass(frozen=True)
class SymmetricFactorization:
    """Irreducible factorisation over QQ with symmetry flags.

    ``unit`` is the integer content (``+-1`` for Alexander polynomials),
    ``t_power`` the power of t split off, and ``pairing`` maps the index of
    every non-symmetric factor to the index of its reciprocal partner (or to
    ``None`` when the partner does not occur).
    """

    unit: int
    factors: tuple[SymmetricFactor, ...]
    pairing: dict[int, int | None] = field(default_factory=dict)
    t_power: int = 0

    def expand(self) -> IntPoly:
        out = IntPoly.of(self.unit)
        for f in self.factors:
            out = out * f.poly**f.exponent
        return out.compose_shift(self.t_power)

    def symmetric_factors(self) -> list[SymmetricFactor]:
        return [f for f in self.factors if f.symmetric]

    def exponent_of(self, delta: IntPoly) -> int:
        target = delta.primitive()
        for f in self.factors:
            if f.poly == target:
                return f.exponent
        return 0

    def summary(self) -> str:
        parts = []
        for f in self.factors:
            base = f"({f.poly})"
            parts.append(base if f.exponent == 1 else f"{base}^{f.exponent}")
        return " * ".join(parts) if parts else "1"


@lru_cache(maxsize=512)
def factor_rational(p: IntPoly) -> SymmetricFactorization:
    """Complete factorisation over QQ (sympy's Zassenhaus/Hensel factoriser)."""
    if p.is_zero:
        raise InputError("cannot factor the zero polynomial")
    shift = next(i for i, c in enumerate(p.coeffs) if c)
    core = IntPoly(p.coeffs[shift:])
    content, pairs = core.to_sympy().factor_list()
    unit = int(content)
    factors: list[SymmetricFactor] = []
    for poly, exp in pairs:
        f = IntPoly.from_sympy(poly).primitive()
        factors.append(SymmetricFactor(f, int(exp), is_symmetric(f)))
    factors.sort(key=lambda f: (f.poly.degree, f.poly.coeffs))
    # factors are normalised to positive leading coefficient; fix the unit sign
    expanded = IntPoly.of(1)
    for f in factors:
        expanded = expanded * f.poly**f.exponent
    if expanded * unit != core:
        unit = -unit
    check(expanded * unit == core, f"factorisation of {p} does not multiply back")

    pairing: dict[int, int | None] = {}
    for i, f in enumerate(factors):
        if f.symmetric:
            continue
        partner = f.poly.reverse().primitive()
        pairing[i] = next((j for j, g in enumerate(factors) if g.poly == partner), None)
    logger.debug("factorised %s as %s", p, [(str(f.poly), f.exponent) for f in factors])
    return SymmetricFactorization(unit, tuple(factors), pairing, shift)


def fox_milnor_form(p: IntPoly) -> bool:
    """Decide whether p is ``a t^d f(t) f(1/t)`` up to the rational unit."""
    fac = factor_rational(p)
    for i, f in enumerate(fac.factors):
        if f.symmetric:
            if f.exponent % 2:
                return False
            continue
        j = fac.pairing.get(i)
        if j is None or fac.factors[j].exponent != f.exponent:
            return False
    return True


def min_concordant_degree(p: IntPoly, obstructed: Iterable[IntPoly] = ()) -> int:
    """Smallest degree an Alexander polynomial concordant to ``p`` can have.

    Odd-exponent symmetric factors always survive (Fox-Milnor parity);
    obstructed even-exponent factors survive squared.
    """
    fac = factor_rational(p)
    wanted = {d.primitive() for d in obstructed}
    for d in wanted:
        if fac.exponent_of(d) == 0:
            raise InputError(f"obstructed factor {d} does not divide {p}")
    total = 0
    for f in fac.symmetric_factors():
        if f.exponent % 2:
            total += f.poly.degree
        elif f.poly in wanted:
            total += 2 * f.poly.degree
    return total


def resultant(p: IntPoly, q: IntPoly) -> int:
    if p.is_zero or q.is_zero:
        raise InputError("resultant of the zero polynomial")
    return int(p.to_sympy().resultant(q.to_sympy()))


def discriminant(p: IntPoly) -> int:
    if p.degree < 1:
        raise InputError("discriminant needs degree >= 1")
    return int(p.to_sympy().discriminant())


def radical(p: IntPoly) -> IntPoly:
    """Product of the distinct irreducible factors (square-free part)."""
    out = IntPoly.of(1)
    for f in factor_rational(p).factors:
        out = out * f.poly
    return out


def trace_polynomial(p: IntPoly) -> IntPoly:
    """For palindromic p of degree 2m return P with p(t) = t^m P(t + 1/t)."""
    coeffs = list(p.coeffs)
    if len(coeffs) % 2 == 0 or coeffs != coeffs[::-1]:
        raise InputError(f"{p} is not palindromic of even degree")
    m = p.degree // 2
    # t^k + t^-k as a polynomial in u: D0 = 2, D1 = u, D(k+1) = u D(k) - D(k-1)
    cheb = [IntPoly.of(2), IntPoly.of(0, 1)]
    for _ in range(2, m + 1):
        cheb.append(IntPoly.of(0, 1) * cheb[-1] - cheb[-2])
    out = IntPoly.of(coeffs[m])
    for k in range(1, m + 1):
        out = out + cheb[k] * coeffs[m + k]
    return out


def sign_variations(seq: Sequence[Poly], x: Rational) -> int:
    signs = [sp.sign(s.eval(x)) for s in seq]
    signs = [s for s in signs if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:], strict=False) if a != b)


def sturm_isolate(poly: Poly, lo: Rational, hi: Rational) -> list[tuple[Rational, Rational]]:
    """Isolate the real roots of ``poly`` in (lo, hi) by Sturm bisection.

    Returned intervals are disjoint, ordered, have non-root rational
    endpoints and contain exactly one root each. ``lo`` and ``hi`` must not
    be roots.
    """
    poly = Poly(poly, domain=QQ).sqf_part()
    if poly.degree() < 1:
        return []
    lo, hi = Rational(lo), Rational(hi)
    check(poly.eval(lo) != 0 and poly.eval(hi) != 0, "isolation bounds must not be roots")
    seq = poly.sturm()

    def count(a: Rational, b: Rational) -> int:
        return sign_variations(seq, a) - sign_variations(seq, b)

    found: list[tuple[Rational, Rational]] = []
    stack = [(lo, hi)]
    while stack:
        a, b = stack.pop()
        n = count(a, b)
        if n == 0:
            continue
        if n == 1:
            found.append((a, b))
            continue
        step = 2
        mid = a + (b - a) / step
        while poly.eval(mid) == 0:
            step += 1
            mid = a + (b - a) / step
        stack.extend([(a, mid), (mid, b)])
    found.sort()
    return found


def root_bound(poly: Poly) -> Rational:
    """Cauchy bound: every real root lies in (-B, B)."""
    coeffs = [Rational(c) for c in poly.all_coeffs()]
    lead = abs(coeffs[0])
    return 1 + max((abs(c) / lead for c in coeffs[1:]), default=Rational(0)) + 1


def unit_circle_roots(p: IntPoly) -> list[tuple[Rational, Rational]]:
    """Isolating intervals in u = t + 1/t for the unit-circle roots of p.

    Unit-circle root pairs of a palindromic p correspond to real roots of the
    trace polynomial in (-2, 2).
    """
    trace = trace_polynomial(p).to_sympy(_x)
    lo, hi = Rational(-2), Rational(2)
    if trace.eval(lo) == 0 or trace.eval(hi) == 0:
        raise InputError(f"{p} vanishes at t = +-1")
    return sturm_isolate(trace, lo, hi)


# --- cyclotomic arithmetic -------------------------------------------------


@lru_cache(maxsize=64)
def _phi(n: int) -> Poly:
    return Poly(sp.cyclotomic_poly(n, _z), _z, domain=QQ)


def _reduce(n: int, poly: Poly) -> tuple[Rational, ...]:
    rem = Poly(poly, _z, domain=QQ).rem(_phi(n))
    coeffs = list(reversed(rem.all_coeffs())) if not rem.is_zero else []
    width = _phi(n).degree()
    coeffs = [Rational(c) for c in coeffs] + [Rational(0)] * (width - len(coeffs))
    return tuple(coeffs[:width])


@dataclass(frozen=True)
class CycloElement:
    """Element of QQ(zeta_n) in the power basis modulo the n-th cyclotomic polynomial."""

    n: int
    coeffs: tuple[Rational, ...]

    @classmethod
    def from_poly(cls, n: int, poly: Poly | sp.Expr) -> CycloElement:
        return cls(n, _reduce(n, Poly(poly, _z, domain=QQ)))

    @classmethod
    def zeta(cls, n: int, k: int = 1) -> CycloElement:
        return cls.from_poly(n, _z ** (k % n))

    @classmethod
    def rational(cls, n: int, value: int | Rational) -> CycloElement:
        return cls.from_poly(n, Rational(value) + 0 * _z)

    def to_poly(self) -> Poly:
        return Poly(list(reversed(self.coeffs)) or [0], _z, domain=QQ)

    def _same_field(self, other: CycloElement) -> None:
        if other.n != self.n:
            raise InputError(f"mixing QQ(zeta_{self.n}) and QQ(zeta_{other.n})")

    def __add__(self, other: CycloElement) -> CycloElement:
        self._same_field(other)
        return CycloElement(self.n, tuple(a + b for a, b in zip(self.coeffs, other.coeffs, strict=True)))

    def __neg__(self) -> CycloElement:
        return CycloElement(self.n, tuple(-a for a in self.coeffs))

    def __sub__(self, other: CycloElement) -> CycloElement:
        return self + (-other)

    def __mul__(self, other: CycloElement | int) -> CycloElement:
        if isinstance(other, int):
            return CycloElement(self.n, tuple(a * other for a in self.coeffs))
        self._same_field(other)
        return CycloElement.from_poly(self.n, self.to_poly() * other.to_poly())

    __rmul__ = __mul__

    def conjugate(self) -> CycloElement:
        """Complex conjugation zeta -> zeta^-1."""
        expr = sum(
            (c * _z ** ((self.n - i) % self.n) for i, c in enumerate(self.coeffs)),
            sp.Integer(0),
        )
        return CycloElement.from_poly(self.n, expr)

    def is_real(self) -> bool:
        return self == self.conjugate()

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def norm(self) -> Rational:
        """Field norm to QQ: resultant of the cyclotomic polynomial with the representative."""
        if self.is_zero:
            return Rational(0)
        return Rational(sp.resultant(_phi(self.n).as_expr(), self.to_poly().as_expr(), _z))

    def __str__(self) -> str:
        return str(self.to_poly().as_expr()).replace("z", f"zeta{self.n}")


def eval_cyclotomic(p: IntPoly, n: int) -> CycloElement:
    if n < 1:
        raise InputError("root of unity order must be positive")
    return CycloElement.from_poly(n, p.as_expr(_z))


def cyclotomic_norm(p: IntPoly, n: int) -> int:
    """Product of p over the primitive n-th roots of unity."""
    phi = IntPoly.from_sympy(Poly(sp.cyclotomic_poly(n, t), t))
    return resultant(phi, p)


def norm_np(p: IntPoly, prime: int) -> IntPoly:
    """N_p(p)(t): the product of p(zeta^i x) rewritten in t = x^p.

    Computed as res_x(p(x), t - x^p), whose roots are the p-th powers of the
    roots of p; the sign is fixed by the leading coefficient of the product.
    """
    if prime < 2:
        raise InputError("norm order must be at least 2")
    if p.is_zero:
        raise InputError("norm of the zero polynomial")
    if p.degree == 0:
        return IntPoly.of(p.constant**prime)
    res = Poly(sp.resultant(p.as_expr(_x), t - _x**prime, _x), t)
    out = IntPoly.from_sympy(res)
    check(out.degree == p.degree, f"norm of {p} has the wrong degree")
    expected_lead = p.leading**prime * (-1) ** (p.degree * (prime - 1))
    if out.leading != expected_lead:
        out = -out
    check(out.leading == expected_lead, f"norm of {p} is not in ZZ[x^{prime}]")
    return out
