"""Branched cyclic covers and the Galois-theoretic obstruction chain."""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum

import sympy as sp
from sympy import QQ, ZZ, Poly, Rational
from sympy.matrices.normalforms import smith_normal_form

from app.core.errors import InputError, check
from app.services.poly import (
    CycloElement,
    IntPoly,
    cyclotomic_norm,
    discriminant,
    factor_rational,
    fox_milnor_form,
    norm_np,
    t,
)
from app.services.seifert import SeifertMatrix

logger = logging.getLogger(__name__)

QUARTIC_10_82 = IntPoly.of(1, -2, 1, -2, 1)
TWISTED_10_82_CHI1 = IntPoly.of(-1, 2, 1) * IntPoly.of(-1, -2, 1) * IntPoly.of(-1, 1) ** 2
check(fox_milnor_form(TWISTED_10_82_CHI1), "twisted polynomial constant is not of the form f(t)f(1/t)")


@dataclass(frozen=True)
class AbelianGroup:
    invariant_factors: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        factors = tuple(int(d) for d in self.invariant_factors)
        if any(d <= 1 for d in factors):
            raise InputError(f"invariant factors must exceed 1: {factors}")
        for a, b in itertools.pairwise(factors):
            if b % a:
                raise InputError(f"invariant factors {factors} do not form a divisibility chain")
        object.__setattr__(self, "invariant_factors", factors)

    @property
    def order(self) -> int:
        return math.prod(self.invariant_factors)

    @property
    def is_trivial(self) -> bool:
        return not self.invariant_factors

    def __str__(self) -> str:
        if self.is_trivial:
            return "0"
        return " + ".join(f"Z/{d}" for d in self.invariant_factors)


def cover_order(d: IntPoly, p: int) -> int:
    """|H_1| of the p-fold branched cover: the product of d over nontrivial p-th roots of unity."""
    if not sp.isprime(p):
        raise InputError(f"cover order needs a prime, got {p}")
    value = abs(cyclotomic_norm(d, p))
    if value == 0:
        raise InputError(f"Delta vanishes at a primitive {p}-th root of unity: infinite homology")
    return value


def _presentation(v: SeifertMatrix, p: int) -> sp.Matrix:
    """Gamma^p - (Gamma - I)^p with Gamma = V (V - V^t)^-1."""
    m = v.to_matrix()
    gamma = m * (m - m.T).inv()
    eye = sp.eye(v.size)
    return gamma**p - (gamma - eye) ** p


def cover_homology(v: SeifertMatrix, p: int) -> AbelianGroup:
    if not sp.isprime(p):
        raise InputError(f"cover homology needs a prime, got {p}")
    if v.size == 0:
        return AbelianGroup()
    snf = smith_normal_form(_presentation(v, p), domain=ZZ)
    diag = sorted(abs(int(snf[i, i])) for i in range(snf.rows))
    if 0 in diag:
        raise InputError(f"infinite homology: Delta vanishes at a {p}-th root of unity")
    group = AbelianGroup(tuple(x for x in diag if x != 1))
    logger.debug("H_1 of the %d-fold cover: %s", p, group)
    return group


def plans_halves(group: AbelianGroup) -> tuple[int, ...] | None:
    """T with group = T + T, or None when the invariant factors do not pair up."""
    counts = Counter(group.invariant_factors)
    if any(c % 2 for c in counts.values()):
        return None
    return tuple(sorted(itertools.chain.from_iterable([d] * (c // 2) for d, c in counts.items())))


def fox_family_polynomial(a: int) -> IntPoly:
    return QUARTIC_10_82 * IntPoly.of(-(a - 1), a) * IntPoly.of(-a, a - 1)


def fox_family_order(a: int, p: int = 3) -> int:
    """Cover order for the family quartic * (a t - (a - 1)) ((a - 1) t - a)."""
    order = cover_order(fox_family_polynomial(a), p)
    if p == 3:
        check(order == 4 * (a**3 - (a - 1) ** 3) ** 2, "Fox family order disagrees with 4(a^3 - (a-1)^3)^2")
    return order


def fox_family_odd(a: int) -> bool:
    """a^3 - (a-1)^3 is odd, so the 2-primary part of the family's cover is the quartic's."""
    return (a**3 - (a - 1) ** 3) % 2 == 1


def twisted_poly_trivial_char(d: IntPoly, p: int) -> IntPoly:
    return norm_np(d, p)


# --- metabolizer characters on Z/8 + Z/8 + Z/2 + Z/2 --------------------

CHARACTER_GROUP = (8, 8, 2, 2)
METABOLIZER_ORDER = 16

Element = tuple[int, ...]


@dataclass(frozen=True)
class Character2:
    """Homomorphism to Z/2: x -> sum values_i x_i mod 2 (defined since every factor is even)."""

    values: tuple[int, ...]

    def __call__(self, x: Sequence[int]) -> int:
        return sum(a * b for a, b in zip(self.values, x, strict=True)) % 2

    @property
    def is_nontrivial(self) -> bool:
        return any(v % 2 for v in self.values)


def _add(x: Element, y: Element, moduli: Sequence[int]) -> Element:
    return tuple((a + b) % m for a, b, m in zip(x, y, moduli, strict=True))


def _elements(moduli: Sequence[int]) -> list[Element]:
    return list(itertools.product(*(range(m) for m in moduli)))


def _join(h: frozenset[Element], g: Element, moduli: Sequence[int]) -> frozenset[Element]:
    multiples = [tuple([0] * len(moduli))]
    while True:
        nxt = _add(multiples[-1], g, moduli)
        if nxt == multiples[0]:
            break
        multiples.append(nxt)
    return frozenset(_add(x, k, moduli) for x in h for k in multiples)


def subgroup_closure(gens: Iterable[Element], moduli: Sequence[int] = CHARACTER_GROUP) -> frozenset[Element]:
    group = frozenset({tuple([0] * len(moduli))})
    for g in gens:
        group = _join(group, tuple(x % m for x, m in zip(g, moduli, strict=True)), moduli)
    return group


def enumerate_subgroups(order: int, moduli: Sequence[int] = CHARACTER_GROUP) -> list[frozenset[Element]]:
    """Every subgroup of the given order, found by closing under one generator at a time."""
    elements = _elements(moduli)
    frontier = {subgroup_closure([], moduli)}
    found: set[frozenset[Element]] = set()
    seen = set(frontier)
    while frontier:
        nxt: set[frozenset[Element]] = set()
        for h in frontier:
            if len(h) == order:
                found.add(h)
                continue
            covered = set(h)
            for g in elements:
                if g in covered:
                    continue
                covered.update(_add(g, x, moduli) for x in h)
                bigger = _join(h, g, moduli)
                if len(bigger) <= order and order % len(bigger) == 0 and bigger not in seen:
                    seen.add(bigger)
                    nxt.add(bigger)
        frontier = nxt
    return sorted(found, key=lambda h: sorted(h))


def _hermite_forms(index: int, n: int) -> Iterable[list[list[int]]]:
    """Upper triangular row bases of the index-``index`` sublattices of Z^n."""
    divisors = [d for d in range(1, index + 1) if index % d == 0]
    for diag in itertools.product(divisors, repeat=n):
        if math.prod(diag) != index:
            continue
        slots = [(i, j) for j in range(n) for i in range(j)]
        for values in itertools.product(*(range(diag[j]) for _, j in slots)):
            h = [[0] * n for _ in range(n)]
            for k in range(n):
                h[k][k] = diag[k]
            for (i, j), val in zip(slots, values, strict=True):
                h[i][j] = val
            yield h


def _in_lattice(h: list[list[int]], v: Sequence[int]) -> bool:
    rest = list(v)
    for i, row in enumerate(h):
        if rest[i] % row[i]:
            return False
        k = rest[i] // row[i]
        rest = [a - k * b for a, b in zip(rest, row, strict=True)]
    return not any(rest)


def count_subgroups_by_lattices(order: int, moduli: Sequence[int] = CHARACTER_GROUP) -> Counter[tuple[int, ...]]:
    """Count subgroups as lattices between prod(m Z) and Z^n, keyed by Hermite diagonal."""
    n = len(moduli)
    total = math.prod(moduli)
    if total % order:
        return Counter()
    kernel = [[m if i == j else 0 for j in range(n)] for i, m in enumerate(moduli)]
    counts: Counter[tuple[int, ...]] = Counter()
    for h in _hermite_forms(total // order, n):
        if all(_in_lattice(h, v) for v in kernel):
            counts[tuple(h[k][k] for k in range(n))] += 1
    return counts


def character_for(subgroup: Iterable[Element]) -> Character2 | None:
    """Nontrivial character on the Z/8 + Z/8 part vanishing on the subgroup and the Z/2 + Z/2 summand."""
    elems = list(subgroup)
    for c1, c2 in ((1, 0), (0, 1), (1, 1)):
        chi = Character2((c1, c2, 0, 0))
        if all(chi(x) == 0 for x in elems):
            return chi
    return None


@dataclass(frozen=True)
class CharacterSearchReport:
    subgroups: int
    lattice_count: int
    counterexamples: tuple[tuple[Element, ...], ...] = ()
    by_shape: dict[tuple[int, ...], int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.counterexamples and self.subgroups == self.lattice_count


def character_search(order: int = METABOLIZER_ORDER, moduli: Sequence[int] = CHARACTER_GROUP) -> CharacterSearchReport:
    subgroups = enumerate_subgroups(order, moduli)
    shapes = count_subgroups_by_lattices(order, moduli)
    bad = tuple(tuple(sorted(h)) for h in subgroups if character_for(h) is None)
    report = CharacterSearchReport(len(subgroups), sum(shapes.values()), bad, dict(shapes))
    logger.debug("character search: %d subgroups, %d by lattices, %d counterexamples", report.subgroups, report.lattice_count, len(bad))
    return report


# --- Q(zeta_8) and quartic Galois groups ---------------------------------


def _cyclo_poly_mul(a: list[CycloElement], b: list[CycloElement]) -> list[CycloElement]:
    zero = CycloElement.rational(a[0].n, 0)
    out = [zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def zeta8_factors() -> tuple[list[CycloElement], list[CycloElement]]:
    """The quadratics t^2 + (+-(2 z - 2 z^3) - 4) t + 1 over Q(zeta_8)."""
    z, z3 = CycloElement.zeta(8), CycloElement.zeta(8, 3)
    one, four = CycloElement.rational(8, 1), CycloElement.rational(8, 4)
    middle = z * 2 - z3 * 2
    return [one, middle - four, one], [one, -middle - four, one]


@dataclass(frozen=True)
class Zeta8Check:
    product_matches: bool
    factors_real: bool
    factors_conjugate: bool
    palindromic: bool

    @property
    def ok(self) -> bool:
        return self.product_matches and self.factors_real and not self.factors_conjugate and self.palindromic


def zeta8_check() -> Zeta8Check:
    f1, f2 = zeta8_factors()
    product = _cyclo_poly_mul(f1, f2)
    target = [CycloElement.rational(8, c) for c in twisted_poly_trivial_char(QUARTIC_10_82, 3).coeffs]
    conj1 = [c.conjugate() for c in f1]
    return Zeta8Check(
        product_matches=product == target,
        factors_real=all(c.is_real() for c in f1 + f2),
        factors_conjugate=conj1 == f2,
        palindromic=f1 == f1[::-1] and f2 == f2[::-1],
    )


def verify_zeta8_factorization() -> bool:
    return zeta8_check().ok


class QuarticGaloisClass(str, Enum):
    C4 = "C4"
    V4 = "V4"
    D4 = "D4"
    A4 = "A4"
    S4 = "S4"

    @property
    def is_abelian(self) -> bool:
        return self in (QuarticGaloisClass.C4, QuarticGaloisClass.V4)


def _is_rational_square(q: Rational) -> bool:
    q = Rational(q)
    if q < 0:
        return False
    return math.isqrt(int(q.p)) ** 2 == q.p and math.isqrt(int(q.q)) ** 2 == q.q


def _splits_over(e: Rational, disc: Rational) -> bool:
    """Whether a quadratic with discriminant e splits over Q(sqrt(disc))."""
    return e == 0 or _is_rational_square(e) or _is_rational_square(e * disc)


def quartic_galois(p: IntPoly) -> QuarticGaloisClass:
    fac = factor_rational(p)
    if p.degree != 4 or len(fac.factors) != 1 or fac.factors[0].exponent != 1 or fac.t_power:
        raise InputError(f"{p} is not irreducible of degree 4")
    lead = Rational(p.leading)
    d, c, b, a = (Rational(x) / lead for x in p.coeffs[:4])
    y = sp.Symbol("y")
    resolvent = Poly(y**3 - b * y**2 + (a * c - 4 * d) * y - (a**2 * d - 4 * b * d + c**2), y, domain=QQ)
    roots = [-f.nth(0) / f.nth(1) for f, _ in resolvent.factor_list()[1] if f.degree() == 1]
    disc = Rational(discriminant(p))
    if not roots:
        return QuarticGaloisClass.A4 if _is_rational_square(disc) else QuarticGaloisClass.S4
    if len(roots) >= 2:
        return QuarticGaloisClass.V4
    r = roots[0]
    if _splits_over(r**2 - 4 * d, disc) and _splits_over(a**2 - 4 * (b - r), disc):
        return QuarticGaloisClass.C4
    return QuarticGaloisClass.D4


def cyclotomic_embedding_obstruction(p: IntPoly) -> bool:
    """True when the splitting field is nonabelian, so it lies in no Q(zeta_{2^r})."""
    return not quartic_galois(p).is_abelian


@dataclass(frozen=True)
class GaloisChain:
    factor: IntPoly
    norm: IntPoly
    norm_irreducible: bool
    galois: QuarticGaloisClass | None
    obstructed: bool
    zeta8_ok: bool


def galois_chain(d: IntPoly, p: int = 3) -> list[GaloisChain]:
    """Run N_p, irreducibility and the Galois test on each odd-exponent symmetric quartic factor."""
    out = []
    for f in factor_rational(d).symmetric_factors():
        if f.poly.degree != 4 or f.exponent % 2 == 0:
            continue
        norm = twisted_poly_trivial_char(f.poly, p)
        nfac = factor_rational(norm)
        irreducible = len(nfac.factors) == 1 and nfac.factors[0].exponent == 1
        galois = quartic_galois(norm) if irreducible else None
        obstructed = galois is not None and not galois.is_abelian
        out.append(GaloisChain(f.poly, norm, irreducible, galois, obstructed, verify_zeta8_factorization()))
        logger.debug("galois chain for %s: N_%d = %s, group %s", f.poly, p, norm, galois)
    return out

