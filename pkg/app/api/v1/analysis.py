from fastapi import APIRouter, Depends, HTTPException, Query

from app.core.deps import get_records
from app.core.errors import InputError, UnknownKnotError
from app.schemas.base import (
    AnalyzeRequest,
    CompareRequest,
    ComparisonOut,
    CoverReportOut,
    CoversRequest,
    GaloisReportOut,
    GenusReportOut,
    KnotSummaryOut,
    WittReportOut,
    WittRequest,
)
from app.services import engine
from app.services.seifert import KnotRecord, find_knot

router = APIRouter(tags=["analysis"])


def _lookup(records: list[KnotRecord], name: str) -> KnotRecord:
    try:
        return find_knot(records, name)
    except UnknownKnotError as e:
        raise HTTPException(404, str(e))
    except InputError as e:
        raise HTTPException(400, str(e))


@router.get("/knots", response_model=list[KnotSummaryOut])
def list_knots(records: list[KnotRecord] = Depends(get_records)):
    """List the knots in the loaded table"""
    return [KnotSummaryOut(
        name=r.name,
        size=r.seifert.size,
        genus3=r.genus3,
        g4_upper=r.g4_upper,
        notes=r.notes
    ) for r in records]


@router.get("/knots/{name}", response_model=GenusReportOut)
def analyze_knot(
    name: str,
    galois: bool | None = Query(None),
    records: list[KnotRecord] = Depends(get_records),
):
    """Genus bounds and obstructions for a single knot"""
    record = _lookup(records, name)
    try:
        return engine.analyze(record, engine.AnalyzeOptions.from_settings(galois))
    except InputError as e:
        raise HTTPException(400, str(e))


@router.post("/analyze", response_model=list[GenusReportOut])
def analyze(data: AnalyzeRequest, records: list[KnotRecord] = Depends(get_records)):
    """Genus bounds for several knots"""
    if not data.names:
        raise HTTPException(400, "names must not be empty")
    chosen = [_lookup(records, n) for n in data.names]
    try:
        return engine.analyze_many(chosen, engine.AnalyzeOptions.from_settings(data.galois))
    except InputError as e:
        raise HTTPException(400, str(e))


@router.post("/compare", response_model=ComparisonOut)
def compare(data: CompareRequest, records: list[KnotRecord] = Depends(get_records)):
    """Decide algebraic concordance of two knots"""
    a = _lookup(records, data.a)
    b = _lookup(records, data.b)
    try:
        return engine.compare(a, b)
    except InputError as e:
        raise HTTPException(400, str(e))


@router.post("/witt", response_model=WittReportOut)
def witt(data: WittRequest):
    """Witt class of a symmetric integer matrix, with boundary maps at an odd prime"""
    try:
        return engine.witt_report(data.matrix, data.dp)
    except InputError as e:
        raise HTTPException(400, str(e))


@router.post("/covers", response_model=CoverReportOut)
def covers(data: CoversRequest, records: list[KnotRecord] = Depends(get_records)):
    """First homology of prime-power branched cyclic covers"""
    record = _lookup(records, data.name)
    try:
        return engine.covers_report(record, data.primes)
    except InputError as e:
        raise HTTPException(400, str(e))


@router.get("/galois/{name}", response_model=GaloisReportOut)
def galois(name: str, records: list[KnotRecord] = Depends(get_records)):
    """Norm, Galois group and character search for the cyclotomic obstruction"""
    record = _lookup(records, name)
    try:
        return engine.galois_report(record)
    except InputError as e:
        raise HTTPException(400, str(e))
