"""Isometric structures (Q, T) and their Witt classes in the rational
algebraic concordance group.

A structure is split into delta-primary pieces, one per irreducible
symmetric factor delta of the characteristic polynomial of T, and each
piece is decided at the real place and at a finite list of primes.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Literal

import sympy as sp
from sympy import QQ, Poly, Rational
from sympy.ntheory import sqrt_mod
from sympy.ntheory.factor_ import multiplicity

from app.core.errors import InputError, check
from app.services import seifert as sf
from app.services.poly import IntPoly, discriminant, factor_rational, radical, t, trace_polynomial
from app.services.witt import (
    DiagonalForm,
    diagonalize,
    hilbert_symbol,
    is_square_qp,
    signature,
    sym_signature,
    trivial_over_qp,
    witt_witness,
)

logger = logging.getLogger(__name__)

Verdict = Literal["trivial", "nontrivial", "undetermined"]


@dataclass(frozen=True)
class TriState:
    value: Verdict
    witness: str

    @classmethod
    def trivial(cls, witness: str) -> TriState:
        return cls("trivial", witness)

    @classmethod
    def nontrivial(cls, witness: str) -> TriState:
        return cls("nontrivial", witness)

    @classmethod
    def undetermined(cls, witness: str) -> TriState:
        return cls("undetermined", witness)

    @property
    def is_trivial(self) -> bool:
        return self.value == "trivial"

    @property
    def is_nontrivial(self) -> bool:
        return self.value == "nontrivial"


@dataclass(frozen=True)
class IsometricStructure:
    """Nonsingular symmetric Q with an isometry T (T^t Q T = Q)."""

    Q: sp.ImmutableMatrix
    T: sp.ImmutableMatrix

    @classmethod
    def from_matrices(cls, q: sp.Matrix | Sequence[Sequence[int]], tm: sp.Matrix | Sequence[Sequence[int]]) -> IsometricStructure:
        qm = sp.ImmutableMatrix(q).applyfunc(Rational)
        tmat = sp.ImmutableMatrix(tm).applyfunc(Rational)
        if qm.shape != tmat.shape or qm.rows != qm.cols:
            raise InputError("Q and T must be square matrices of the same size")
        if qm != qm.T:
            raise InputError("Q is not symmetric")
        if qm.rows and qm.det() == 0:
            raise InputError("degenerate form: det Q = 0")
        if tmat.T * qm * tmat != qm:
            raise InputError("T is not an isometry of Q")
        return cls(qm, tmat)

    @classmethod
    def empty(cls) -> IsometricStructure:
        return cls(sp.ImmutableMatrix.zeros(0, 0), sp.ImmutableMatrix.zeros(0, 0))

    @property
    def size(self) -> int:
        return self.Q.rows

    @property
    def signature(self) -> int:
        return sym_signature(self.Q) if self.size else 0


def char_poly(s: IsometricStructure) -> IntPoly:
    """Characteristic polynomial of T, scaled to a primitive integer polynomial."""
    if s.size == 0:
        return IntPoly.of(1)
    cp = Poly(s.T.charpoly(t).as_expr(), t, domain=QQ)
    _, prim = cp.clear_denoms(convert=True)
    out = IntPoly.from_sympy(prim).primitive()
    return out


def direct_sum(a: IsometricStructure, b: IsometricStructure) -> IsometricStructure:
    if a.size == 0:
        return b
    if b.size == 0:
        return a
    return IsometricStructure(
        sp.ImmutableMatrix(sp.diag(a.Q, b.Q)), sp.ImmutableMatrix(sp.diag(a.T, b.T))
    )


def negate(s: IsometricStructure) -> IsometricStructure:
    return IsometricStructure(sp.ImmutableMatrix(-s.Q), s.T)


def scale_by_two(s: IsometricStructure) -> IsometricStructure:
    return IsometricStructure(sp.ImmutableMatrix(2 * s.Q), s.T)


def from_seifert(v: sf.SeifertMatrix) -> IsometricStructure:
    rep = sf.invertible_representative(v)
    if rep.size == 0:
        return IsometricStructure.empty()
    return sf.isometric_structure(rep)


def _matrix_poly(f: IntPoly, m: sp.Matrix) -> sp.Matrix:
    acc = sp.zeros(m.rows, m.cols)
    eye = sp.eye(m.rows)
    for c in reversed(f.coeffs):
        acc = acc * m + c * eye
    return acc


@dataclass(frozen=True)
class DeltaComponent:
    delta: IntPoly
    exponent: int
    structure: IsometricStructure
    basis: sp.ImmutableMatrix
    symmetric: bool = True

    @property
    def dimension(self) -> int:
        return self.structure.size


def component_from_pair(q: sp.Matrix | Sequence[Sequence[int]], tm: sp.Matrix | Sequence[Sequence[int]]) -> DeltaComponent:
    """Wrap a printed (Q, T) pair whose T has a prime-power characteristic polynomial."""
    s = IsometricStructure.from_matrices(q, tm)
    fac = factor_rational(char_poly(s))
    if len(fac.factors) != 1 or not fac.factors[0].symmetric:
        raise InputError("pair is not supported on a single symmetric factor")
    f = fac.factors[0]
    return DeltaComponent(f.poly, f.exponent, s, sp.ImmutableMatrix(sp.eye(s.size)))


def decompose(s: IsometricStructure) -> list[DeltaComponent]:
    """Split S into delta-primary components.

    The delta-primary subspace is taken as the image of the product of the
    other primary factors evaluated at T, and checked against the kernel of
    delta^k(T). A non-symmetric factor is grouped with its reciprocal into
    a single component flagged ``symmetric=False``.
    """
    if s.size == 0:
        return []
    fac = factor_rational(char_poly(s))
    groups: list[tuple[IntPoly, int, list[int], bool]] = []
    seen: set[int] = set()
    for i, f in enumerate(fac.factors):
        if i in seen:
            continue
        if f.symmetric:
            groups.append((f.poly, f.exponent, [i], True))
            seen.add(i)
            continue
        j = fac.pairing.get(i)
        check(j is not None, f"non-symmetric factor {f.poly} has no reciprocal partner")
        assert j is not None
        check(fac.factors[j].exponent == f.exponent, "reciprocal factors with unequal exponents")
        groups.append((f.poly * fac.factors[j].poly, f.exponent, [i, j], False))
        seen.update({i, j})

    tm = sp.Matrix(s.T)
    components: list[DeltaComponent] = []
    for delta, k, members, symmetric in groups:
        complement = IntPoly.of(1)
        for idx, f in enumerate(fac.factors):
            if idx not in members:
                complement = complement * f.poly**f.exponent
        cols = _matrix_poly(complement, tm).columnspace()
        basis = sp.Matrix.hstack(*cols)
        dim = basis.cols
        check(dim == k * delta.degree, f"component of {delta} has dimension {dim}, expected {k * delta.degree}")
        primary = _matrix_poly(delta**k, tm)
        check((primary * basis).is_zero_matrix, f"image basis for {delta} is not killed by its primary factor")
        check(len(primary.nullspace()) == dim, f"kernel and image of the {delta}-primary part disagree")
        gram = basis.T * basis
        q_c = basis.T * sp.Matrix(s.Q) * basis
        t_c = gram.inv() * basis.T * tm * basis
        structure = IsometricStructure.from_matrices(q_c, t_c)
        check(char_poly(structure) == (delta**k).primitive(), f"restricted T for {delta} has the wrong characteristic polynomial")
        components.append(DeltaComponent(delta, k, structure, sp.ImmutableMatrix(basis), symmetric))
        logger.debug("component %s^%d has dimension %d", delta, k, dim)

    check(sum(c.dimension for c in components) == s.size, "component dimensions do not add up")
    check(
        sum(c.structure.signature for c in components) == s.signature,
        "components do not preserve the signature",
    )
    return components


def _restrict(s: IsometricStructure, idx: Sequence[int]) -> IsometricStructure:
    if not idx:
        return IsometricStructure.empty()
    return IsometricStructure(sp.ImmutableMatrix(s.Q.extract(idx, idx)), sp.ImmutableMatrix(s.T.extract(idx, idx)))


def blocks(s: IsometricStructure) -> list[list[int]]:
    """Index sets of the finest splitting of S into orthogonal T-invariant blocks."""
    if s.size == 0:
        return []
    pattern = s.Q.applyfunc(abs) + s.T.applyfunc(abs) + s.T.T.applyfunc(abs)
    return sorted(sorted(b) for b in sp.Matrix(pattern).connected_components())


def _opposite(a: IsometricStructure, b: IsometricStructure) -> bool:
    """b = (-c^2 Q, T) for a = (Q, T) and a rational c."""
    if a.size != b.size or a.T != b.T:
        return False
    i, j = next((i, j) for i in range(a.size) for j in range(a.size) if a.Q[i, j])
    ratio = -Rational(b.Q[i, j]) / Rational(a.Q[i, j])
    return bool(ratio > 0 and sp.sqrt(ratio).is_rational and b.Q == -ratio * a.Q)


def cancel_opposite_blocks(s: IsometricStructure) -> tuple[IsometricStructure, list[int]]:
    """Drop pairs of blocks (Q, T) and (-c^2 Q, T).

    The graph {(x, x / c)} of such a pair is a T-invariant lagrangian, so the
    remaining structure is Witt equivalent to S. Returns it with the indices
    of S it keeps.
    """
    found = blocks(s)
    pieces = [_restrict(s, b) for b in found]
    dropped: set[int] = set()
    for i, j in itertools.combinations(range(len(found)), 2):
        if i in dropped or j in dropped:
            continue
        if _opposite(pieces[i], pieces[j]):
            dropped.update((i, j))
    kept = sorted(k for n, b in enumerate(found) if n not in dropped for k in b)
    if dropped:
        logger.debug("cancelled %d pairs of opposite blocks", len(dropped) // 2)
    return _restrict(s, kept), kept


def relevant_primes(s: IsometricStructure, components: Sequence[DeltaComponent] | None = None) -> list[int]:
    """Primes at which a Witt class of S can be locally nontrivial.

    Always 2, the primes of det Q and of the discriminant of the square-free
    characteristic polynomial, and the primes in the diagonalised form of
    every primary component. Diagonal entries can carry primes that cancel
    out of det Q.
    """
    primes = {2}
    if s.size:
        det = Rational(s.Q.det())
        for n in (det.p, det.q):
            primes.update(sp.factorint(abs(int(n))))
        rad = radical(char_poly(s))
        if rad.degree >= 1:
            primes.update(sp.factorint(abs(discriminant(rad))))
        for c in decompose(s) if components is None else components:
            for e in diagonalize(c.structure.Q).entries:
                primes.update(sp.factorint(abs(e)))
    primes.discard(1)
    primes.discard(0)
    return sorted(primes)


# --- local analysis -------------------------------------------------------


def _has_monic_factor_mod(f: IntPoly, p: int, k: int, limit: int = 200_000) -> bool | None:
    """Whether f has a monic factor of positive degree modulo p^k (None when the search is too large)."""
    mod = p**k
    lead = f.leading % mod
    if lead % p == 0:
        return None
    inv = pow(lead, -1, mod)
    g = [(c * inv) % mod for c in f.coeffs]
    d = len(g) - 1
    if sum(mod**e for e in range(1, d // 2 + 1)) > limit:
        return None
    for e in range(1, d // 2 + 1):
        for tail in itertools.product(range(mod), repeat=e):
            h = list(tail) + [1]
            rem = list(g)
            for shift in range(d - e, -1, -1):
                q = rem[shift + e]
                if q:
                    for i, c in enumerate(h):
                        rem[shift + i] = (rem[shift + i] - q * c) % mod
            if not any(rem[:e]):
                return True
    return False


def _trace_splits_qp(trace: IntPoly, p: int) -> bool | None:
    """Whether the trace polynomial splits over Q_p (degree <= 2 only)."""
    if trace.degree == 1:
        return True
    if trace.degree == 2:
        return is_square_qp(discriminant(trace), p)
    return None


def _delta_irreducible_qp(delta: IntPoly, p: int) -> bool | None:
    k = 2 if p == 2 else 1
    found = _has_monic_factor_mod(delta, p, k)
    if found is False:
        return True
    if delta.leading % p == 0:
        return None
    if discriminant(delta) % p and _has_monic_factor_mod(delta, p, 1):
        return False
    return None


def _power_sums(delta: IntPoly, count: int) -> list[Rational]:
    lead = Rational(delta.leading)
    d = delta.degree
    companion = sp.zeros(d, d)
    for i in range(1, d):
        companion[i, i - 1] = 1
    for i in range(d):
        companion[i, d - 1] = -Rational(delta.coeffs[i]) / lead
    out, power = [], sp.eye(d)
    for _ in range(count):
        out.append(Rational(power.trace()))
        power = power * companion
    return out


def _hermitian_value(delta: IntPoly, s: IsometricStructure, v: sp.Matrix, w: sp.Matrix, tau: list[Rational]) -> list[Rational]:
    """Coefficients in 1, t, ... of h(v, w), where Q(x, y) = Tr h(x, y)."""
    d = delta.degree
    tm, q = sp.Matrix(s.T), sp.Matrix(s.Q)
    hankel = sp.Matrix(d, d, lambda j, i: tau[i + j])
    rhs = sp.Matrix([((tm**j * v).T * q * w)[0, 0] for j in range(d)])
    return list(hankel.LUsolve(rhs))


def _to_trace_basis(delta: IntPoly, coeffs: list[Rational]) -> list[Rational]:
    """Rewrite an element of Q[t]/delta fixed by t -> 1/t in powers of u = t + 1/t."""
    d = delta.degree
    m = d // 2
    modulus = Poly(delta.as_expr(), t, domain=QQ)
    inv_t = Poly(-sum(Rational(c) * t ** (i - 1) for i, c in enumerate(delta.coeffs) if i) / delta.constant, t, domain=QQ)
    u = (Poly(t, t, domain=QQ) + inv_t).rem(modulus)
    cols, power = [], Poly(1, t, domain=QQ)
    for _ in range(m):
        vec = list(reversed(power.all_coeffs()))
        cols.append(sp.Matrix([Rational(vec[i]) if i < len(vec) else 0 for i in range(d)]))
        power = (power * u).rem(modulus)
    system = sp.Matrix.hstack(*cols)
    sol, params = system.gauss_jordan_solve(sp.Matrix(coeffs))
    check(params.rows == 0, "trace basis is not independent")
    return [Rational(x) for x in sol]


def _padic_rep(coeffs: list[Rational], root: int, mod: int) -> tuple[int, int]:
    """Integer representative mod p^N of D * sum c_i root^i, with the denominator D."""
    denom = math.lcm(*[int(Rational(c).q) for c in coeffs]) if coeffs else 1
    value = sum(int(Rational(c) * denom) * pow(root, i, mod) for i, c in enumerate(coeffs)) % mod
    return value, denom


def _hermitian_local(c: DeltaComponent, p: int, precision: int = 24) -> TriState:
    """Rank-2 hermitian test at a prime where the trace polynomial splits."""
    delta, s = c.delta, c.structure
    if c.exponent != 2:
        return TriState.undetermined(f"hermitian test at {p} needs exponent 2")
    if not _matrix_poly(delta, sp.Matrix(s.T)).is_zero_matrix:
        return TriState.undetermined(f"T is not semisimple on the {delta} component")
    trace = trace_polynomial(delta)
    c0, c1, c2 = trace.coeffs
    disc_p = c1 * c1 - 4 * c0 * c2
    if p == 2 or (2 * c2 * disc_p) % p == 0:
        return TriState.undetermined(f"trace polynomial of {delta} is not separable mod {p}")

    d = delta.degree
    tau = _power_sums(delta, 2 * d - 1)
    v = sp.zeros(s.size, 1)
    v[0, 0] = 1
    a = _hermitian_value(delta, s, v, v, tau)
    if not any(a):
        return TriState.trivial(f"isotropic vector spans a lagrangian over Q_{p}")
    rows = sp.Matrix.vstack(*[(sp.Matrix(s.T) ** k * v).T * sp.Matrix(s.Q) for k in range(d)])
    perp = rows.nullspace()
    check(bool(perp), "orthogonal complement is empty")
    w = perp[0]
    b = _hermitian_value(delta, s, w, w, tau)
    if not any(b):
        return TriState.trivial(f"isotropic vector spans a lagrangian over Q_{p}")
    alpha, beta = _to_trace_basis(delta, a), _to_trace_basis(delta, b)

    mod = p**precision
    root = sqrt_mod(disc_p % mod, mod)
    if root is None:
        return TriState.undetermined(f"no square root of {disc_p} mod {p}^{precision}")
    half = pow(2 * c2, -1, mod)
    for sign in (1, -1):
        u_i = ((-c1 + sign * root) * half) % mod
        av, ad = _padic_rep(alpha, u_i, mod)
        bv, bd = _padic_rep(beta, u_i, mod)
        x = (-av * ad * bv * bd) % mod
        e = (u_i * u_i - 4) % mod
        if x == 0 or e == 0 or multiplicity(p, x) >= precision - 2 or multiplicity(p, e) >= precision - 2:
            return TriState.undetermined(f"insufficient {p}-adic precision")
        if hilbert_symbol(x, e, p) != 1:
            return TriState.nontrivial(f"hermitian determinant is not a norm at a place over {p}")
    return TriState.trivial(f"hermitian form is split at both places over {p}")


def local_verdict(c: DeltaComponent, p: int, qpart: DiagonalForm | None = None) -> TriState:
    """Witt class of a symmetric component over Q_p.

    When delta is irreducible over Q_p the class is decided by the Q-part.
    When only the trace polynomial splits, delta is a product of two
    quadratics over Q_p and the Q-part sees just their sum, so the verdict
    comes from the rank-2 hermitian test on each factor.
    """
    delta = c.delta
    qpart = qpart if qpart is not None else diagonalize(c.structure.Q)
    if delta.degree == 2:
        if is_square_qp(discriminant(delta), p):
            return TriState.trivial(f"{delta} splits into linear factors over Q_{p}")
        if trivial_over_qp(qpart, p):
            return TriState.trivial(f"Q-part is Witt trivial over Q_{p}")
        return TriState.nontrivial(witt_witness(qpart, [p]) or f"Q-part is nontrivial over Q_{p}")

    splits = _trace_splits_qp(trace_polynomial(delta), p)
    if splits is None:
        return TriState.undetermined(f"cannot factor the trace polynomial of {delta} over Q_{p}")
    if not splits:
        irreducible = _delta_irreducible_qp(delta, p)
        if irreducible is True:
            if trivial_over_qp(qpart, p):
                return TriState.trivial(f"{delta} irreducible over Q_{p} and Q-part Witt trivial")
            return TriState.nontrivial(witt_witness(qpart, [p]) or f"Q-part is nontrivial over Q_{p}")
        if irreducible is False:
            return TriState.trivial(f"{delta} factors into reciprocal pairs over Q_{p}")
        return TriState.undetermined(f"irreducibility of {delta} over Q_{p} not certified")
    if not trivial_over_qp(qpart, p):
        return TriState.nontrivial(witt_witness(qpart, [p]) or f"Q-part is nontrivial over Q_{p}")
    return _hermitian_local(c, p)


def component_trivial(c: DeltaComponent, primes: Iterable[int] | None = None) -> TriState:
    if not c.symmetric:
        return TriState.trivial("paired non-symmetric factors are metabolic")
    residual, kept = cancel_opposite_blocks(c.structure)
    if residual.size == 0:
        return TriState.trivial("opposite blocks pair off into a T-invariant lagrangian")
    if residual.size < c.dimension:
        basis = sp.Matrix(c.basis).extract(list(range(c.basis.rows)), kept)
        c = DeltaComponent(c.delta, residual.size // c.delta.degree, residual, sp.ImmutableMatrix(basis))
    qpart = diagonalize(c.structure.Q)
    sig = signature(qpart)
    if sig:
        return TriState.nontrivial(f"signature {sig} at the real place")
    if c.exponent % 2:
        return TriState.nontrivial(f"{c.delta} occurs with odd exponent {c.exponent}")
    plist = sorted(set(primes) if primes is not None else set(relevant_primes(c.structure)))
    verdicts = []
    for p in plist:
        v = local_verdict(c, p, qpart)
        logger.debug("component %s at p=%d: %s (%s)", c.delta, p, v.value, v.witness)
        if v.is_nontrivial:
            return TriState.nontrivial(f"p={p}: {v.witness}")
        verdicts.append((p, v))
    open_places = [(p, v) for p, v in verdicts if not v.is_trivial]
    if open_places:
        p, v = open_places[0]
        logger.warning("component %s undetermined at p=%d: %s", c.delta, p, v.witness)
        return TriState.undetermined(f"p={p}: {v.witness}")
    return TriState.trivial("trivial at the real place and at primes " + ", ".join(str(p) for p in plist))


def witt_trivial(s: IsometricStructure) -> TriState:
    if s.size == 0:
        return TriState.trivial("zero structure")
    residual, _ = cancel_opposite_blocks(s)
    if residual.size == 0:
        return TriState.trivial("opposite blocks pair off into a T-invariant lagrangian")
    components = decompose(residual)
    primes = relevant_primes(residual, components)
    undetermined: TriState | None = None
    for c in components:
        verdict = component_trivial(c, primes)
        if verdict.is_nontrivial:
            return TriState.nontrivial(f"{c.delta}: {verdict.witness}")
        if not verdict.is_trivial and undetermined is None:
            undetermined = TriState.undetermined(f"{c.delta}: {verdict.witness}")
    return undetermined or TriState.trivial("every primary component is Witt trivial")


@dataclass(frozen=True)
class SeifertRecovery:
    matrix: sp.ImmutableMatrix
    kind: Literal["seifert", "nonintegral", "integral_non_seifert"]


def seifert_from(s: IsometricStructure) -> SeifertRecovery:
    """Q (1 + T)^-1 classified as a Seifert matrix or not."""
    one_plus = sp.eye(s.size) + sp.Matrix(s.T)
    if one_plus.det() == 0:
        raise InputError("1 + T is singular: no representative via this formula")
    v = sp.ImmutableMatrix(sp.Matrix(s.Q) * one_plus.inv())
    if any(not Rational(x).is_integer for x in v):
        return SeifertRecovery(v, "nonintegral")
    try:
        sf.from_matrix(sp.Matrix(v))
    except InputError:
        return SeifertRecovery(v, "integral_non_seifert")
    return SeifertRecovery(v, "seifert")


def alg_concordant(v1: sf.SeifertMatrix, v2: sf.SeifertMatrix) -> TriState:
    return witt_trivial(direct_sum(from_seifert(v1), negate(from_seifert(v2))))
