"""Witt classes of rational symmetric bilinear forms.

Forms are diagonalised exactly, scaled to square-free integer entries and
then decided place by place: signature at the real place, the residue
maps at odd primes and the discriminant/Hasse pair at 2.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Literal

import sympy as sp
from sympy import Rational
from sympy.functions.combinatorial.numbers import legendre_symbol
from sympy.ntheory import multiplicity
from sympy.ntheory.factor_ import core
from sympy.polys.domains import GF
from sympy.polys.matrices import DomainMatrix

from app.core.errors import InputError

logger = logging.getLogger(__name__)

Place = int | Literal["real"]
Matrixish = Sequence[Sequence[int | Rational]] | sp.MatrixBase


def _rows(m: Matrixish) -> list[list[Rational]]:
    if isinstance(m, sp.MatrixBase):
        return [[Rational(m[i, j]) for j in range(m.cols)] for i in range(m.rows)]
    return [[Rational(x) for x in row] for row in m]


def congruence_diagonal(m: Matrixish) -> list[Rational]:
    """Diagonal of a symmetric matrix after exact symmetric elimination.

    Zero entries are returned for a degenerate input.
    """
    a = _rows(m)
    n = len(a)
    if any(len(row) != n for row in a):
        raise InputError("form matrix is not square")
    if any(a[i][j] != a[j][i] for i in range(n) for j in range(i)):
        raise InputError("form matrix is not symmetric")
    idx = list(range(n))
    diag: list[Rational] = []
    while idx:
        pivot = next((i for i in idx if a[i][i] != 0), None)
        if pivot is None:
            pair = next(((i, j) for i in idx for j in idx if i != j and a[i][j] != 0), None)
            if pair is None:
                diag.extend(Rational(0) for _ in idx)
                break
            i, j = pair
            # row/column i += row/column j makes a[i][i] = 2 a[i][j]
            for k in range(n):
                a[i][k] += a[j][k]
            for k in range(n):
                a[k][i] += a[k][j]
            pivot = i
        p = a[pivot][pivot]
        rest = [k for k in idx if k != pivot]
        for k in rest:
            f = a[k][pivot] / p
            if f == 0:
                continue
            for c in range(n):
                a[k][c] -= f * a[pivot][c]
            for r in range(n):
                a[r][k] -= f * a[r][pivot]
        diag.append(p)
        idx = rest
    return diag


def sym_signature(m: Matrixish) -> int:
    diag = congruence_diagonal(m)
    return sum(1 for d in diag if d > 0) - sum(1 for d in diag if d < 0)


def squarefree_part(q: Rational | int) -> int:
    """Square-free integer in the square class of a nonzero rational."""
    q = Rational(q)
    if q == 0:
        raise InputError("zero has no square class")
    n = int(q.p) * int(q.q)
    sign = -1 if n < 0 else 1
    return sign * int(core(abs(n), 2))


@dataclass(frozen=True)
class SymForm:
    entries: tuple[tuple[Rational, ...], ...]

    @classmethod
    def from_rows(cls, rows: Matrixish) -> SymForm:
        form = cls(tuple(tuple(r) for r in _rows(rows)))
        n = form.size
        if any(len(r) != n for r in form.entries):
            raise InputError("form matrix is not square")
        if any(form.entries[i][j] != form.entries[j][i] for i in range(n) for j in range(i)):
            raise InputError("form matrix is not symmetric")
        return form

    @property
    def size(self) -> int:
        return len(self.entries)

    def to_matrix(self) -> sp.Matrix:
        return sp.Matrix(self.size, self.size, lambda i, j: self.entries[i][j])

    @property
    def det(self) -> Rational:
        return Rational(self.to_matrix().det()) if self.size else Rational(1)

    @property
    def is_degenerate(self) -> bool:
        return self.det == 0


@dataclass(frozen=True)
class DiagonalForm:
    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        for a in self.entries:
            if a == 0 or squarefree_part(a) != a:
                raise InputError(f"diagonal entry {a} is not a nonzero square-free integer")

    @classmethod
    def of(cls, *entries: int) -> DiagonalForm:
        return cls(tuple(entries))

    @property
    def rank(self) -> int:
        return len(self.entries)

    def to_list(self) -> list[int]:
        return list(self.entries)

    def __str__(self) -> str:
        return "<" + ", ".join(str(a) for a in self.entries) + ">"


@dataclass(frozen=True)
class FiniteWittClass:
    """Diagonal form over the prime field F_p, p odd."""

    p: int
    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.p == 2 or not sp.isprime(self.p):
            raise InputError(f"finite Witt classes need an odd prime, got {self.p}")
        object.__setattr__(self, "entries", tuple(int(a) % self.p for a in self.entries))
        if any(a == 0 for a in self.entries):
            raise InputError("finite Witt class entries must be units mod p")

    @property
    def rank(self) -> int:
        return len(self.entries)

    @property
    def discriminant(self) -> int:
        return math.prod(self.entries) % self.p

    @property
    def is_trivial(self) -> bool:
        return finite_trivial(self)

    def __str__(self) -> str:
        return f"<{', '.join(str(a) for a in self.entries)}> over F_{self.p}"


def diagonalize(q: SymForm | Matrixish) -> DiagonalForm:
    form = q if isinstance(q, SymForm) else SymForm.from_rows(q)
    diag = congruence_diagonal(form.entries)
    if any(d == 0 for d in diag):
        raise InputError("degenerate form")
    out = DiagonalForm(tuple(squarefree_part(d) for d in diag))
    logger.debug("diagonalised rank %d form to %s", form.size, out)
    return out


def signature(d: DiagonalForm) -> int:
    return sum(1 if a > 0 else -1 for a in d.entries)


def discriminant_class(d: DiagonalForm) -> int:
    return squarefree_part(math.prod(d.entries)) if d.entries else 1


def negate(d: DiagonalForm) -> DiagonalForm:
    return DiagonalForm(tuple(-a for a in d.entries))


def direct_sum(*forms: DiagonalForm) -> DiagonalForm:
    return DiagonalForm(tuple(itertools.chain.from_iterable(f.entries for f in forms)))


def hyperbolic(rank: int) -> DiagonalForm:
    if rank % 2:
        raise InputError("hyperbolic forms have even rank")
    return DiagonalForm((1, -1) * (rank // 2))


def cancel_hyperbolic(d: DiagonalForm) -> DiagonalForm:
    """Delete pairs {a, -a} until none remain."""
    kept: list[int] = []
    for a in d.entries:
        if -a in kept:
            kept.remove(-a)
        else:
            kept.append(a)
    return DiagonalForm(tuple(kept))


def boundary_p(d: DiagonalForm, p: int) -> FiniteWittClass:
    return FiniteWittClass(p, tuple((a // p) % p for a in d.entries if a % p == 0))


def boundary_p_unit(d: DiagonalForm, p: int) -> FiniteWittClass:
    return FiniteWittClass(p, tuple(a % p for a in d.entries if a % p))


def finite_trivial(c: FiniteWittClass) -> bool:
    """Split test over F_p: even rank and disc = (-1)^(rank/2) mod squares."""
    if c.rank % 2:
        return False
    if c.rank == 0:
        return True
    target = (c.discriminant * (-1) ** (c.rank // 2)) % c.p
    return legendre_symbol(target, c.p) == 1


def _least_nonresidue(p: int) -> int:
    return next(a for a in range(2, p) if legendre_symbol(a, p) == -1)


def canonical_class(c: FiniteWittClass) -> FiniteWittClass:
    """Anisotropic representative: (), (1), (nu) or (1, -nu) for the least non-residue nu."""
    nu = _least_nonresidue(c.p)
    if c.rank % 2 == 0:
        if finite_trivial(c):
            return FiniteWittClass(c.p, ())
        return FiniteWittClass(c.p, (1, -nu))
    signed = (c.discriminant * (-1) ** ((c.rank - 1) // 2)) % c.p
    return FiniteWittClass(c.p, (1,) if legendre_symbol(signed, c.p) == 1 else (nu,))


def _form_value(c: FiniteWittClass, u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * x * y for a, x, y in zip(c.entries, u, v, strict=True)) % c.p


def is_metabolizer(c: FiniteWittClass, vectors: Sequence[Sequence[int]]) -> bool:
    """Half rank, independent mod p and totally isotropic."""
    if 2 * len(vectors) != c.rank:
        return False
    if any(_form_value(c, u, v) for u in vectors for v in vectors):
        return False
    if not vectors:
        return True
    return _rank_mod_p(sp.Matrix(vectors), c.p) == len(vectors)


def _rank_mod_p(m: sp.Matrix, p: int) -> int:
    return DomainMatrix.from_Matrix(m).convert_to(GF(p)).rank()


def find_metabolizer(c: FiniteWittClass) -> list[tuple[int, ...]] | None:
    """Greedy half-rank isotropic basis over F_p, or None for a non-split class."""
    if not finite_trivial(c):
        return None
    if c.p**c.rank > 10**6:
        raise InputError(f"metabolizer search over F_{c.p}^{c.rank} is too large")
    half = (c.p - 1) // 2
    values = [0] + [x for k in range(1, half + 1) for x in (k, -k)]
    chosen: list[tuple[int, ...]] = []
    span = {tuple([0] * c.rank)}
    while 2 * len(chosen) < c.rank:
        for v in itertools.product(values, repeat=c.rank):
            key = tuple(x % c.p for x in v)
            if key in span or _form_value(c, v, v):
                continue
            if any(_form_value(c, v, u) for u in chosen):
                continue
            chosen.append(v)
            span = {
                tuple((s + k * x) % c.p for s, x in zip(base, key, strict=True))
                for base in span
                for k in range(c.p)
            }
            break
        else:
            raise InputError(f"no isotropic extension found for {c}")
    return chosen


def is_square_qp(n: int, p: int) -> bool:
    if n == 0:
        raise InputError("zero is not a p-adic unit square test input")
    v = multiplicity(p, abs(n))
    if v % 2:
        return False
    u = n // p**v
    if p == 2:
        return u % 8 == 1
    return legendre_symbol(u % p, p) == 1


def hilbert_symbol(a: int, b: int, p: Place) -> int:
    if a == 0 or b == 0:
        raise InputError("Hilbert symbol of zero")
    if p == "real":
        return -1 if a < 0 and b < 0 else 1
    alpha, beta = multiplicity(p, abs(a)), multiplicity(p, abs(b))
    u, v = a // p**alpha, b // p**beta
    if p == 2:

        def eps(x: int) -> int:
            return ((x - 1) // 2) % 2

        def omega(x: int) -> int:
            return ((x * x - 1) // 8) % 2

        e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if e % 2 else 1
    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    return sign * int(legendre_symbol(u % p, p)) ** beta * int(legendre_symbol(v % p, p)) ** alpha


def hasse_invariant(d: DiagonalForm, p: Place) -> int:
    out = 1
    for a, b in itertools.combinations(d.entries, 2):
        out *= hilbert_symbol(a, b, p)
    return out


def trivial_over_qp(d: DiagonalForm, p: int) -> bool:
    if p != 2:
        return finite_trivial(boundary_p(d, p)) and finite_trivial(boundary_p_unit(d, p))
    if d.rank % 2:
        return False
    if d.rank == 0:
        return True
    disc = math.prod(d.entries) * (-1) ** (d.rank // 2)
    if not is_square_qp(disc, 2):
        return False
    return hasse_invariant(d, 2) == hasse_invariant(hyperbolic(d.rank), 2)


def odd_primes_of(d: DiagonalForm) -> list[int]:
    primes: set[int] = set()
    for a in d.entries:
        primes.update(q for q in sp.factorint(abs(a)) if q != 2)
    return sorted(primes)


def trivial_over_q(d: DiagonalForm) -> bool:
    if signature(d) != 0:
        return False
    for p in odd_primes_of(d):
        if not finite_trivial(boundary_p(d, p)):
            return False
    return trivial_over_qp(d, 2)


def witt_witness(d: DiagonalForm, primes: Iterable[int] = ()) -> str | None:
    """First place at which d is not Witt trivial, as text, or None."""
    if signature(d):
        return f"signature {signature(d)} at the real place"
    for p in sorted(set(odd_primes_of(d)) | set(primes) - {2}):
        c = boundary_p(d, p)
        if not finite_trivial(c):
            return f"boundary map at {p} gives nontrivial {c}"
        e = boundary_p_unit(d, p)
        if p in primes and not finite_trivial(e):
            return f"unit reduction at {p} gives nontrivial {e}"
    if not trivial_over_qp(d, 2):
        return "nontrivial over Q_2 (rank, discriminant or Hasse invariant)"
    return None
