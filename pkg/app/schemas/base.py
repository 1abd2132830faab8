from typing import Literal

from pydantic import BaseModel, Field


# Knot file schemas
class KnotRecordIn(BaseModel):
    name: str
    seifert_matrix: list[list[int]]
    genus3: int | None = None
    g4_upper: int | None = None
    notes: str | None = None


class KnotSummaryOut(BaseModel):
    name: str
    size: int
    genus3: int | None
    g4_upper: int | None
    notes: str | None = None


class MatrixFileIn(BaseModel):
    matrix: list[list[int]]
    notes: str | None = None


# Report building blocks
class TriStateOut(BaseModel):
    value: Literal["trivial", "nontrivial", "undetermined"]
    witness: str


class FactorOut(BaseModel):
    coeffs: list[int]
    text: str
    exponent: int
    symmetric: bool


class PlateauOut(BaseModel):
    lo: str
    hi: str | None
    value: int


class ObstructionOut(BaseModel):
    delta: list[int]
    delta_text: str
    reason: Literal["signature-jump", "witt-dp", "odd-exponent", "galois-cyclotomic"]
    certificate: str


class ComponentOut(BaseModel):
    delta: list[int]
    delta_text: str
    exponent: int
    dimension: int
    symmetric: bool = True
    verdict: TriStateOut


class CoverOut(BaseModel):
    p: int
    invariant_factors: list[int]
    order: int
    fox_order: int
    plans_halves: list[int] | None


class GaloisStepOut(BaseModel):
    factor: list[int]
    norm: list[int]
    norm_text: str
    norm_irreducible: bool
    galois: str | None
    obstructed: bool


# Reports
class GenusReportOut(BaseModel):
    name: str
    alexander: list[int]
    alexander_text: str
    factorization: list[FactorOut]
    signature: int
    profile: list[PlateauOut]
    g3_lower: int
    g3: int | None
    g4_lower: int
    g4_upper: int | None
    gc_lower: int
    gc_upper: int | None
    obstructions: list[ObstructionOut] = Field(default_factory=list)
    components: list[ComponentOut] = Field(default_factory=list)
    covers: list[CoverOut] = Field(default_factory=list)
    galois: list[GaloisStepOut] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)


class ComparisonOut(BaseModel):
    a: str
    b: str
    verdict: TriStateOut
    summary: str
    relevant_primes: list[int]
    components: list[ComponentOut] = Field(default_factory=list)


class WittReportOut(BaseModel):
    diagonal: list[int]
    signature: int
    cancelled: list[int]
    prime: int | None = None
    boundary: list[int] | None = None
    boundary_class: list[int] | None = None
    boundary_trivial: bool | None = None
    unit_boundary: list[int] | None = None
    unit_boundary_trivial: bool | None = None
    metabolizer: list[list[int]] | None = None
    trivial_over_q: bool
    verdict: str


class CoverReportOut(BaseModel):
    name: str
    covers: list[CoverOut]


class GaloisReportOut(BaseModel):
    name: str
    steps: list[GaloisStepOut]
    zeta8_ok: bool
    cover3: list[int]
    character_subgroups: int
    character_lattice_count: int
    character_counterexamples: int
    fires: bool
    summary: str


# Request bodies
class AnalyzeRequest(BaseModel):
    names: list[str]
    galois: bool | None = None


class CompareRequest(BaseModel):
    a: str
    b: str


class WittRequest(BaseModel):
    matrix: list[list[int]]
    dp: int | None = None


class CoversRequest(BaseModel):
    name: str
    primes: list[int] | None = None
