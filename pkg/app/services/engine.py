"""Genus reports, concordance comparisons and their rendering."""

from __future__ import annotations

import json
import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

from pydantic import BaseModel

from app.core.config import get_settings
from app.core.errors import InputError, check
from app.schemas.base import (
    ComparisonOut,
    ComponentOut,
    CoverOut,
    CoverReportOut,
    FactorOut,
    GaloisReportOut,
    GaloisStepOut,
    GenusReportOut,
    ObstructionOut,
    PlateauOut,
    TriStateOut,
    WittReportOut,
)
from app.services import covers, isometric, seifert, witt
from app.services.poly import IntPoly, factor_rational, min_concordant_degree
from app.services.seifert import KnotRecord

logger = logging.getLogger(__name__)

# H_1 of the 3-fold cover for which the cyclotomic obstruction chain is validated
VALIDATED_COVER_SHAPE = (8, 8)


@dataclass(frozen=True)
class AnalyzeOptions:
    galois: bool = False
    cover_primes: tuple[int, ...] = (3, 5)

    @classmethod
    def from_settings(cls, galois: bool | None = None) -> AnalyzeOptions:
        settings = get_settings()
        return cls(
            galois=settings.galois if galois is None else galois,
            cover_primes=tuple(settings.cover_primes),
        )


def _tristate_out(v: isometric.TriState) -> TriStateOut:
    return TriStateOut(value=v.value, witness=v.witness)


def _component_out(c: isometric.DeltaComponent, v: isometric.TriState) -> ComponentOut:
    return ComponentOut(
        delta=c.delta.to_list(),
        delta_text=str(c.delta),
        exponent=c.exponent,
        dimension=c.dimension,
        symmetric=c.symmetric,
        verdict=_tristate_out(v),
    )


def _cover_out(v: seifert.SeifertMatrix, delta: IntPoly, p: int) -> CoverOut:
    group = covers.cover_homology(v, p)
    fox = covers.cover_order(delta, p)
    check(group.order == fox, f"Smith normal form order {group.order} disagrees with Fox order {fox} at p={p}")
    halves = covers.plans_halves(group)
    return CoverOut(
        p=p,
        invariant_factors=list(group.invariant_factors),
        order=group.order,
        fox_order=fox,
        plans_halves=list(halves) if halves is not None else None,
    )


def _galois_step_out(step: covers.GaloisChain) -> GaloisStepOut:
    return GaloisStepOut(
        factor=step.factor.to_list(),
        norm=step.norm.to_list(),
        norm_text=str(step.norm),
        norm_irreducible=step.norm_irreducible,
        galois=step.galois.value if step.galois else None,
        obstructed=step.obstructed,
    )


@lru_cache(maxsize=1)
def _character_search() -> covers.CharacterSearchReport:
    return covers.character_search()


def analyze(record: KnotRecord, options: AnalyzeOptions | None = None) -> GenusReportOut:
    options = options or AnalyzeOptions.from_settings()
    v = record.seifert
    delta = seifert.alexander(v)
    fac = factor_rational(delta)
    profile = seifert.signature_profile(v)
    sigma = profile.sigma_minus_one
    notes: list[str] = []

    structure = isometric.from_seifert(v)
    components = isometric.decompose(structure)
    primes = isometric.relevant_primes(structure, components)
    verdicts = {c.delta: isometric.component_trivial(c, primes) for c in components if c.symmetric}

    obstructions: list[ObstructionOut] = []
    obstructed: set[IntPoly] = set()
    for f in fac.symmetric_factors():
        jumps = profile.jumps_for(f.poly)
        if any(jumps):
            obstructions.append(
                ObstructionOut(
                    delta=f.poly.to_list(),
                    delta_text=str(f.poly),
                    reason="signature-jump",
                    certificate=f"jumps {jumps} at the unit roots of {f.poly}",
                )
            )
            obstructed.add(f.poly)
            continue
        verdict = verdicts.get(f.poly)
        if verdict is None:
            continue
        if verdict.is_nontrivial:
            reason = "odd-exponent" if f.exponent % 2 else "witt-dp"
            obstructions.append(
                ObstructionOut(delta=f.poly.to_list(), delta_text=str(f.poly), reason=reason, certificate=verdict.witness)
            )
            obstructed.add(f.poly)
        elif not verdict.is_trivial:
            notes.append(f"bound not improved; undetermined at {f.poly}: {verdict.witness}")
            logger.warning("%s: undetermined at %s (%s)", record.name, f.poly, verdict.witness)

    mcd = min_concordant_degree(delta, obstructed)
    check(mcd <= delta.degree, "minimal concordant degree exceeds deg Delta")
    gc_lower = mcd // 2
    g3_lower = (delta.degree + 1) // 2
    g4_lower = max((abs(x) + 1) // 2 for x in profile.values + [sigma])

    cover_list = [_cover_out(v, delta, p) for p in options.cover_primes]

    galois_steps: list[GaloisStepOut] = []
    if options.galois:
        chain = covers.galois_chain(delta)
        galois_steps = [_galois_step_out(s) for s in chain]
        if any(s.obstructed for s in chain):
            shape = covers.cover_homology(v, 3).invariant_factors
            search = _character_search()
            if shape == VALIDATED_COVER_SHAPE and search.ok:
                forced = [f for f in fac.symmetric_factors() if f.poly not in {s.factor for s in chain}]
                for f in forced:
                    if f.poly not in obstructed:
                        obstructions.append(
                            ObstructionOut(
                                delta=f.poly.to_list(),
                                delta_text=str(f.poly),
                                reason="galois-cyclotomic",
                                certificate="N_3 norm of the odd quartic factor has nonabelian Galois group",
                            )
                        )
                        obstructed.add(f.poly)
                gc_lower = max(gc_lower, delta.degree // 2)
            else:
                notes.append("Casson-Gordon chain not validated for this shape")
                logger.warning("%s: galois escalation refused for cover shape %s", record.name, shape)

    if g4_lower > gc_lower:
        notes.append("concordance genus bound raised to the signature bound")
        gc_lower = g4_lower
    if record.genus3 is not None and not (g3_lower <= record.genus3 and gc_lower <= record.genus3):
        raise InputError(f"record {record.name!r}: table genus {record.genus3} is below a computed lower bound")
    if record.g4_upper is not None and g4_lower > record.g4_upper:
        raise InputError(f"record {record.name!r}: table g4 bound {record.g4_upper} is below the signature bound")

    report = GenusReportOut(
        name=record.name,
        alexander=delta.to_list(),
        alexander_text=str(delta),
        factorization=[
            FactorOut(coeffs=f.poly.to_list(), text=str(f.poly), exponent=f.exponent, symmetric=f.symmetric)
            for f in fac.factors
        ],
        signature=sigma,
        profile=[
            PlateauOut(lo=str(p.lo), hi=None if p.hi is None else str(p.hi), value=p.value)
            for p in profile.plateau_values
        ],
        g3_lower=g3_lower,
        g3=record.genus3,
        g4_lower=g4_lower,
        g4_upper=record.g4_upper,
        gc_lower=gc_lower,
        gc_upper=record.genus3,
        obstructions=sorted(obstructions, key=lambda o: (len(o.delta), o.delta)),
        components=[_component_out(c, verdicts.get(c.delta) or isometric.component_trivial(c, primes)) for c in components],
        covers=cover_list,
        galois=galois_steps,
        notes=notes,
    )
    logger.info("%s: g3 >= %d, gc >= %d, g4 >= %d", record.name, g3_lower, gc_lower, g4_lower)
    return report


def analyze_many(records: Sequence[KnotRecord], options: AnalyzeOptions | None = None, max_workers: int | None = None) -> list[GenusReportOut]:
    """Analyse records concurrently; results keep the input order."""
    options = options or AnalyzeOptions.from_settings()
    workers = max_workers or get_settings().max_workers
    if len(records) <= 1 or workers <= 1:
        return [analyze(r, options) for r in records]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: analyze(r, options), records))


def compare(a: KnotRecord, b: KnotRecord) -> ComparisonOut:
    difference = isometric.direct_sum(
        isometric.from_seifert(a.seifert), isometric.negate(isometric.from_seifert(b.seifert))
    )
    verdict = isometric.witt_trivial(difference)
    parts = isometric.decompose(difference)
    primes = isometric.relevant_primes(difference, parts)
    components = [_component_out(c, isometric.component_trivial(c, primes)) for c in parts]
    summary = {
        "trivial": "algebraically concordant",
        "nontrivial": "not algebraically concordant",
        "undetermined": "undetermined",
    }[verdict.value]
    return ComparisonOut(
        a=a.name,
        b=b.name,
        verdict=_tristate_out(verdict),
        summary=summary,
        relevant_primes=primes,
        components=components,
    )


def witt_report(matrix: Sequence[Sequence[int]], dp: int | None = None) -> WittReportOut:
    d = witt.diagonalize(matrix)
    cancelled = witt.cancel_hyperbolic(d)
    trivial_q = witt.trivial_over_q(d)
    report = WittReportOut(
        diagonal=d.to_list(),
        signature=witt.signature(d),
        cancelled=cancelled.to_list(),
        trivial_over_q=trivial_q,
        verdict="trivial" if trivial_q else "nontrivial",
    )
    if dp is not None:
        if dp == 2:
            raise InputError("boundary maps need an odd prime")
        c = witt.boundary_p(d, dp)
        e = witt.boundary_p_unit(d, dp)
        canon = witt.canonical_class(c)
        meta = witt.find_metabolizer(e) if e.rank <= 8 else None
        report.prime = dp
        report.boundary = list(c.entries)
        report.boundary_class = list(canon.entries)
        report.boundary_trivial = witt.finite_trivial(c)
        report.unit_boundary = list(e.entries)
        report.unit_boundary_trivial = witt.finite_trivial(e)
        report.metabolizer = [list(x) for x in meta] if meta else None
        if not report.boundary_trivial:
            entries = ",".join(str(x) for x in canon.entries)
            report.verdict = f"nontrivial: class ({entries}) in W(Z/{dp}Z)"
    return report


def covers_report(record: KnotRecord, primes: Sequence[int] | None = None) -> CoverReportOut:
    plist = list(primes) if primes else list(get_settings().cover_primes)
    delta = seifert.alexander(record.seifert)
    return CoverReportOut(name=record.name, covers=[_cover_out(record.seifert, delta, p) for p in plist])


def galois_report(record: KnotRecord) -> GaloisReportOut:
    delta = seifert.alexander(record.seifert)
    chain = covers.galois_chain(delta)
    shape = covers.cover_homology(record.seifert, 3).invariant_factors
    search = _character_search()
    fires = any(s.obstructed for s in chain) and shape == VALIDATED_COVER_SHAPE and search.ok
    if not chain:
        summary = "no odd-exponent symmetric quartic factor"
    elif fires:
        summary = "cyclotomic obstruction fires: the odd quartic factor forces every other factor"
    elif shape != VALIDATED_COVER_SHAPE:
        summary = "Casson-Gordon chain not validated for this shape"
    else:
        summary = "no obstruction from this test"
    return GaloisReportOut(
        name=record.name,
        steps=[_galois_step_out(s) for s in chain],
        zeta8_ok=covers.verify_zeta8_factorization(),
        cover3=list(shape),
        character_subgroups=search.subgroups,
        character_lattice_count=search.lattice_count,
        character_counterexamples=len(search.counterexamples),
        fires=fires,
        summary=summary,
    )


def render_json(report: BaseModel | Sequence[BaseModel]) -> str:
    if isinstance(report, BaseModel):
        data = report.model_dump(mode="json")
    else:
        data = [r.model_dump(mode="json") for r in report]
    return json.dumps(data, sort_keys=True, indent=2)


def _render_genus(r: GenusReportOut) -> list[str]:
    lines = [
        f"knot {r.name}",
        f"  alexander      {r.alexander_text}",
        f"  factors        " + " * ".join(f"({f.text})^{f.exponent}" for f in r.factorization),
        f"  signature      {r.signature}",
        f"  plateaus       {[p.value for p in r.profile]}",
        f"  g3_lower       {r.g3_lower}" + (f" (table g3 {r.g3})" if r.g3 is not None else ""),
        f"  g4_lower       {r.g4_lower}" + (f" (table g4 <= {r.g4_upper})" if r.g4_upper is not None else ""),
        f"  gc_lower       {r.gc_lower}" + (f" (gc <= {r.gc_upper})" if r.gc_upper is not None else ""),
    ]
    for o in r.obstructions:
        lines.append(f"  obstructed     {o.delta_text} [{o.reason}] {o.certificate}")
    for c in r.components:
        lines.append(f"  component      {c.delta_text}^{c.exponent} dim {c.dimension}: {c.verdict.value} ({c.verdict.witness})")
    for cv in r.covers:
        lines.append(f"  cover p={cv.p}     invariant factors {cv.invariant_factors} order {cv.order}")
    for g in r.galois:
        lines.append(f"  galois         N_3 = {g.norm_text}: {g.galois} obstructed={g.obstructed}")
    lines.extend(f"  note           {n}" for n in r.notes)
    return lines


def render_text(report: BaseModel | Sequence[BaseModel]) -> str:
    if not isinstance(report, BaseModel):
        return "\n\n".join(render_text(r) for r in report)
    if isinstance(report, GenusReportOut):
        return "\n".join(_render_genus(report))
    if isinstance(report, ComparisonOut):
        lines = [f"{report.a} vs {report.b}: {report.summary}", f"  witness: {report.verdict.witness}"]
        lines += [f"  {c.delta_text}^{c.exponent}: {c.verdict.value}" for c in report.components]
        return "\n".join(lines)
    if isinstance(report, WittReportOut):
        lines = [f"diagonal {report.diagonal} signature {report.signature} cancelled {report.cancelled}"]
        if report.prime is not None:
            lines.append(f"boundary at {report.prime}: {report.boundary} unit part {report.unit_boundary}")
        lines.append(report.verdict)
        return "\n".join(lines)
    if isinstance(report, CoverReportOut):
        return "\n".join(
            [f"covers of {report.name}"]
            + [f"  p={c.p}: {c.invariant_factors} (order {c.order}, Fox {c.fox_order})" for c in report.covers]
        )
    if isinstance(report, GaloisReportOut):
        lines = [f"galois chain for {report.name}: {report.summary}"]
        lines += [f"  N_3 = {s.norm_text}: {s.galois}" for s in report.steps]
        lines.append(f"  3-fold cover {report.cover3}; {report.character_subgroups} order-16 subgroups checked")
        return "\n".join(lines)
    return render_json(report)
