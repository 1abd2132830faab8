"""Seifert matrices and the invariants read directly off them."""

from __future__ import annotations

import json
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import sympy as sp
from pydantic import TypeAdapter, ValidationError
from sympy import Poly, Rational

from app.core.errors import InputError, UndefinedSignatureError, UnknownKnotError, check
from app.schemas.base import KnotRecordIn
from app.services.poly import (
    IntPoly,
    factor_rational,
    fox_milnor_form,
    normalize_alexander,
    root_bound,
    sign_variations,
    sturm_isolate,
    t,
    trace_polynomial,
)
from app.services.witt import congruence_diagonal, sym_signature

if TYPE_CHECKING:
    from app.services.isometric import IsometricStructure

logger = logging.getLogger(__name__)

_s = sp.Symbol("s")


@dataclass(frozen=True)
class SeifertMatrix:
    """Integer square matrix V of even size with det(V - V^t) = +-1.

    ``orientation`` records that determinant; tables differ on its sign.
    """

    entries: tuple[tuple[int, ...], ...]
    orientation: int = 1

    @property
    def size(self) -> int:
        return len(self.entries)

    @property
    def genus(self) -> int:
        return self.size // 2

    def to_matrix(self) -> sp.Matrix:
        return sp.Matrix(self.size, self.size, lambda i, j: self.entries[i][j])

    def to_list(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    @property
    def det(self) -> int:
        return int(self.to_matrix().det()) if self.size else 1


def _det_skew(rows: Sequence[Sequence[int]]) -> int:
    n = len(rows)
    if n == 0:
        return 1
    m = sp.Matrix(n, n, lambda i, j: rows[i][j] - rows[j][i])
    return int(m.det())


def validate(rows: Sequence[Sequence[int]] | sp.MatrixBase) -> SeifertMatrix:
    if isinstance(rows, sp.MatrixBase):
        rows = rows.tolist()
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise InputError("not a Seifert matrix: matrix is not square")
    try:
        entries = tuple(tuple(int(x) for x in r) for r in rows)
    except (TypeError, ValueError):
        raise InputError("not a Seifert matrix: entries must be integers")
    if any(entries[i][j] != rows[i][j] for i in range(n) for j in range(n)):
        raise InputError("not a Seifert matrix: entries must be integers")
    if n % 2:
        raise InputError(f"not a Seifert matrix: odd size {n}")
    d = _det_skew(entries)
    if d not in (1, -1):
        raise InputError(f"not a Seifert matrix: det(V - V^t) = {d}")
    return SeifertMatrix(entries, d)


def from_matrix(m: sp.Matrix) -> SeifertMatrix:
    return validate([[int(m[i, j]) for j in range(m.cols)] for i in range(m.rows)])


def connected_sum(v: SeifertMatrix, w: SeifertMatrix) -> SeifertMatrix:
    if v.size == 0:
        return w
    if w.size == 0:
        return v
    return from_matrix(sp.diag(v.to_matrix(), w.to_matrix()))


def mirror(v: SeifertMatrix) -> SeifertMatrix:
    return from_matrix(-v.to_matrix().T) if v.size else v


def reverse(v: SeifertMatrix) -> SeifertMatrix:
    return from_matrix(v.to_matrix().T) if v.size else v


def alexander(v: SeifertMatrix) -> IntPoly:
    """det(V - t V^t), shifted to a positive constant term."""
    if v.size == 0:
        return IntPoly.of(1)
    m = v.to_matrix()
    det = (m - t * m.T).det(method="berkowitz")
    return normalize_alexander(IntPoly.from_sympy(Poly(sp.expand(det), t)))


def signature(v: SeifertMatrix) -> int:
    if v.size == 0:
        return 0
    m = v.to_matrix()
    return sym_signature(m + m.T)


@dataclass(frozen=True)
class CirclePoint:
    """omega = ((1 - s^2) + 2 s i) / (1 + s^2); ``s=None`` stands for omega = -1."""

    s: Rational | None

    def __post_init__(self) -> None:
        if self.s is not None:
            object.__setattr__(self, "s", Rational(self.s))
            if self.s <= 0:
                raise InputError("circle parameter must be positive (s = 0 is omega = 1)")

    @classmethod
    def minus_one(cls) -> CirclePoint:
        return cls(None)

    @property
    def omega(self) -> sp.Expr:
        if self.s is None:
            return sp.Integer(-1)
        s = self.s
        return ((1 - s**2) + 2 * s * sp.I) / (1 + s**2)

    @property
    def u(self) -> Rational:
        """omega + conj(omega)."""
        if self.s is None:
            return Rational(-2)
        return 2 * (1 - self.s**2) / (1 + self.s**2)


def lt_signature_at(v: SeifertMatrix, w: CirclePoint) -> int:
    """Signature of (1 - omega) V + (1 - conj omega) V^t.

    Up to the positive factor 2s/(1+s^2) this is the Hermitian matrix
    s(V + V^t) - i(V - V^t), whose realification has twice its signature.
    """
    if v.size == 0:
        return 0
    m = v.to_matrix()
    sym = m + m.T
    if w.s is None:
        diag = congruence_diagonal(sym)
        scale = 1
    else:
        skew = m - m.T
        real = sp.Matrix.vstack(
            sp.Matrix.hstack(w.s * sym, skew), sp.Matrix.hstack(-skew, w.s * sym)
        )
        diag = congruence_diagonal(real)
        scale = 2
    if any(d == 0 for d in diag):
        raise UndefinedSignatureError(
            "signature undefined at a root of the Alexander polynomial; use the one-sided plateau values"
        )
    value = sum(1 for d in diag if d > 0) - sum(1 for d in diag if d < 0)
    check(value % scale == 0, "Hermitian realification has odd signature")
    return value // scale


@dataclass(frozen=True)
class Plateau:
    lo: Rational
    hi: Rational | None
    value: int


@dataclass(frozen=True)
class SignatureProfile:
    """Levine-Tristram signature on the upper half circle, parameterised by s > 0.

    Plateaus are ordered from omega near 1 (s near 0) to omega = -1.
    """

    jump_roots: tuple[tuple[IntPoly, int], ...] = ()
    plateau_values: tuple[Plateau, ...] = (Plateau(Rational(0), None, 0),)
    sigma_minus_one: int = 0

    def jumps_for(self, factor: IntPoly) -> list[int]:
        f = factor.primitive()
        return [j for g, j in self.jump_roots if g == f]

    def jumps_at(self, factor: IntPoly) -> bool:
        return any(self.jumps_for(factor))

    def jump_map(self) -> dict[IntPoly, tuple[int, ...]]:
        out: dict[IntPoly, list[int]] = {}
        for g, j in self.jump_roots:
            if j:
                out.setdefault(g, []).append(j)
        return {g: tuple(js) for g, js in out.items()}

    @property
    def values(self) -> list[int]:
        return [p.value for p in self.plateau_values]

    @property
    def max_abs(self) -> int:
        return max(abs(v) for v in self.values)

    def is_identically_zero(self) -> bool:
        return all(v == 0 for v in self.values)


def _circle_polynomial(f: IntPoly) -> Poly:
    """R_f(s) = (1 + s^2)^m P_f(2(1 - s^2)/(1 + s^2)) for the trace polynomial P_f."""
    trace = trace_polynomial(f)
    m = trace.degree
    expr = sum(
        (c * (2 * (1 - _s**2)) ** k * (1 + _s**2) ** (m - k) for k, c in enumerate(trace.coeffs)),
        sp.Integer(0),
    )
    return Poly(sp.expand(expr), _s, domain=sp.QQ)


def _shrink_left(poly: Poly, seq: list[Poly], a: Rational, b: Rational) -> tuple[Rational, Rational]:
    """Move the left end of an isolating interval off zero."""
    while a == 0:
        k = 2
        mid = a + (b - a) / k
        while poly.eval(mid) == 0:
            k += 1
            mid = a + (b - a) / k
        if sign_variations(seq, a) - sign_variations(seq, mid) == 1:
            b = mid
        else:
            a = mid
    return a, b


def signature_profile(v: SeifertMatrix) -> SignatureProfile:
    delta = alexander(v)
    sigma = signature(v)
    factors = [
        f.poly for f in factor_rational(delta).symmetric_factors() if f.poly.degree >= 2
    ]
    if not factors:
        check(sigma == 0, "constant signature function must vanish")
        return SignatureProfile()

    circle = {f: _circle_polynomial(f) for f in factors}
    product = Poly(1, _s, domain=sp.QQ)
    for r in circle.values():
        product = product * r
    product = product.sqf_part()
    intervals = sturm_isolate(product, Rational(0), root_bound(product))
    if not intervals:
        check(sigma == 0, "signature without unit-circle roots must vanish")
        return SignatureProfile()

    seq = product.sturm()
    intervals[0] = _shrink_left(product, seq, *intervals[0])
    sturms = {f: r.sqf_part().sturm() for f, r in circle.items()}
    labels: list[IntPoly] = []
    for a, b in intervals:
        owner = [
            f for f, sq in sturms.items() if sign_variations(sq, a) - sign_variations(sq, b) == 1
        ]
        check(len(owner) == 1, f"root interval ({a}, {b}) is not owned by exactly one factor")
        labels.append(owner[0])

    first = lt_signature_at(v, CirclePoint(intervals[0][0]))
    check(first == 0, "signature near omega = 1 must vanish")
    plateaus = [Plateau(Rational(0), intervals[0][0], first)]
    jumps: list[tuple[IntPoly, int]] = []
    previous = first
    for i, (_, b) in enumerate(intervals):
        value = lt_signature_at(v, CirclePoint(b))
        hi = intervals[i + 1][0] if i + 1 < len(intervals) else None
        plateaus.append(Plateau(b, hi, value))
        jumps.append((labels[i], value - previous))
        previous = value
    check(previous == sigma, "last plateau disagrees with the signature at omega = -1")
    logger.debug("signature profile of size %d matrix: %s", v.size, [p.value for p in plateaus])
    return SignatureProfile(tuple(jumps), tuple(plateaus), sigma)


def isometric_structure(v: SeifertMatrix) -> IsometricStructure:
    from app.services.isometric import IsometricStructure

    if v.det == 0:
        raise InputError("singular Seifert matrix; call invertible_representative first")
    m = v.to_matrix()
    return IsometricStructure.from_matrices(m + m.T, m.inv() * m.T)


def _primitive_kernel_vector(m: sp.Matrix) -> list[int]:
    kernel = m.nullspace()
    check(bool(kernel), "expected a kernel vector")
    vec = kernel[0]
    denom = sp.ilcm(*[sp.Rational(x).q for x in vec])
    ints = [int(x * denom) for x in vec]
    g = sp.igcd(*ints)
    return [x // g for x in ints]


def _unimodular_to_e1(vec: Sequence[int]) -> sp.Matrix:
    """Unimodular U with U * vec = e1 for a primitive integer vector."""
    n = len(vec)
    x = list(vec)
    u = sp.eye(n)
    while True:
        nonzero = [i for i in range(n) if x[i]]
        check(bool(nonzero), "zero vector has no unimodular completion")
        piv = min(nonzero, key=lambda i: abs(x[i]))
        if piv != 0:
            x[0], x[piv] = x[piv], x[0]
            u.row_swap(0, piv)
        done = True
        for i in range(1, n):
            if x[i]:
                q = x[i] // x[0]
                x[i] -= q * x[0]
                u[i, :] = u[i, :] - q * u[0, :]
                if x[i]:
                    done = False
        if done:
            break
    check(abs(x[0]) == 1, "kernel vector is not primitive")
    if x[0] == -1:
        u[0, :] = -u[0, :]
    return u


def _split_off_pair(v: sp.Matrix) -> sp.Matrix:
    x = _primitive_kernel_vector(v)
    p = _unimodular_to_e1(x).inv()
    v1 = p.T * v * p
    check(all(v1[i, 0] == 0 for i in range(v1.rows)), "kernel vector did not clear the first column")
    row = [int(v1[0, j]) for j in range(1, v1.cols)]
    u2 = _unimodular_to_e1(row).T
    p2 = sp.diag(1, u2)
    v2 = p2.T * v1 * p2
    check(v2[0, 1] == 1 and all(v2[0, j] == 0 for j in range(2, v2.cols)), "partner row not normalised")
    return v2[2:, 2:]


def invertible_representative(v: SeifertMatrix) -> SeifertMatrix:
    """Algebraically concordant Seifert matrix with nonzero determinant.

    Each round moves a kernel vector of V to the first basis vector, uses
    unimodularity of V - V^t to normalise the first row to e2 and deletes
    the first two basis vectors; the deleted pair spans half of a
    metabolizer of V against the remainder.
    """
    current = v
    rounds = 0
    while current.size and current.det == 0:
        reduced = from_matrix(_split_off_pair(current.to_matrix()))
        check(reduced.size == current.size - 2, "reduction did not shrink the matrix")
        current = reduced
        rounds += 1
    if rounds:
        delta_v, delta_w = alexander(v), alexander(current)
        check(fox_milnor_form(delta_v * delta_w), "reduced matrix changed the concordance class of Delta")
        check(
            signature_profile(v).jump_map() == signature_profile(current).jump_map(),
            "reduced matrix changed the signature function",
        )
        logger.debug("reduced size %d Seifert matrix to size %d", v.size, current.size)
    return current


@dataclass(frozen=True)
class KnotRecord:
    name: str
    seifert: SeifertMatrix
    genus3: int | None = None
    g4_upper: int | None = None
    notes: str = ""
    tags: tuple[str, ...] = field(default_factory=tuple)

    def check_table(self) -> None:
        if self.genus3 is not None:
            degree = alexander(self.seifert).degree
            if 2 * self.genus3 < degree:
                raise InputError(
                    f"record {self.name!r}: genus {self.genus3} is below half of deg Delta = {degree}"
                )
        if self.g4_upper is not None and self.genus3 is not None and self.g4_upper > self.genus3:
            raise InputError(f"record {self.name!r}: g4 upper bound exceeds the genus")


_records_adapter = TypeAdapter(list[KnotRecordIn])


def ingest(source: str | Path) -> list[KnotRecord]:
    """Parse a knot file (a path, or the JSON text itself)."""
    if isinstance(source, Path) or not source.lstrip().startswith("["):
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read knot file {path}: {exc}")
    else:
        text = source
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"knot file parse error at line {exc.lineno}: {exc.msg}")
    try:
        items = _records_adapter.validate_python(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = first["loc"]
        where = f"record {loc[0]}" if loc else "knot file"
        if loc and isinstance(raw, list) and isinstance(loc[0], int) and isinstance(raw[loc[0]], dict):
            where = f"record {loc[0]} ({raw[loc[0]].get('name', '?')!r})"
        raise InputError(f"{where}: {first['msg']} at {'.'.join(str(p) for p in loc[1:])}")

    records = []
    for item in items:
        try:
            matrix = validate(item.seifert_matrix)
        except InputError as exc:
            raise InputError(f"record {item.name!r}: {exc}")
        record = KnotRecord(item.name, matrix, item.genus3, item.g4_upper, item.notes or "")
        record.check_table()
        records.append(record)
    logger.debug("ingested %d knot records", len(records))
    return records


def load_knots(path: Path | str) -> list[KnotRecord]:
    return ingest(Path(path))


def _find_single(records: Sequence[KnotRecord], name: str) -> KnotRecord:
    if name.startswith("-"):
        base = _find_single(records, name[1:])
        return KnotRecord(name, mirror(base.seifert), base.genus3, base.g4_upper, base.notes)
    for r in records:
        if r.name == name:
            return r
    raise UnknownKnotError(f"unknown knot {name!r}")


def _add(a: int | None, b: int | None) -> int | None:
    return None if a is None or b is None else a + b


def find_knot(records: Sequence[KnotRecord], name: str) -> KnotRecord:
    """Look a knot up by name; ``-K`` is the mirror and ``A#B`` the connected sum."""
    parts = [p.strip() for p in name.split("#")]
    if not all(parts):
        raise InputError(f"malformed knot name {name!r}")
    found = [_find_single(records, p) for p in parts]
    result = found[0]
    for other in found[1:]:
        result = KnotRecord(
            name,
            connected_sum(result.seifert, other.seifert),
            _add(result.genus3, other.genus3),
            _add(result.g4_upper, other.g4_upper),
            "connected sum",
        )
    if len(found) == 1 and result.name != name:
        result = KnotRecord(name, result.seifert, result.genus3, result.g4_upper, result.notes)
    return result
