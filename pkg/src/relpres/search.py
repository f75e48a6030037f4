"""Desk-scale exhaustive enumeration of clean two-pole spherical diagrams.

Faces available to the search: copies of the relator face (both
orientations) and digon faces over the bottom slice, truncated by a
syllable bound.  Gluings are perfect matchings of along-arrow darts with
against-arrow darts; survivors must be connected spheres, pass the full
validation, keep digons apart, stay reduced, and have exactly two
nontrivially-labeled vertices (marked exterior).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .diagram import (Diagram, DiagramError, Slot, curvature_weights,
                      is_phi_reduced, validate_howie)
from .freeprod import FPWord
from .presentation import RelPresentation


class SearchBoundExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class EnumerationConfig:
    presentation: RelPresentation
    max_interior_faces: int = 2
    digon_syllables: int = 1
    symmetry_dedup: bool = True
    max_matchings_per_multiset: int = 2_000_000

    def __post_init__(self):
        if self.max_interior_faces < 1:
            raise ValueError("need at least one face")


@dataclass(frozen=True)
class FaceTemplate:
    kind: str                 # relator+ | relator- | digon
    signs: tuple[int, ...]
    corners: tuple[FPWord, ...]
    word: FPWord | None = None

    @property
    def plus_darts(self) -> int:
        return sum(1 for e in self.signs if e == 1)

    @property
    def minus_darts(self) -> int:
        return len(self.signs) - self.plus_darts


def face_templates(config: EnumerationConfig) -> list[FaceTemplate]:
    pres = config.presentation
    rel = pres.relator()
    assert rel.segments[-1].is_identity()
    plus = FaceTemplate("relator+", rel.signs,
                        tuple(rel.segments[1:-1]) + (rel.segments[0],))
    inv = rel.inv()
    inv_signs = inv.signs
    minus = FaceTemplate("relator-", inv_signs,
                         tuple(inv.segments[1:-1]) + (inv.segments[-1] * inv.segments[0],))
    out = [plus, minus]
    for p in pres.digon_alphabet(config.digon_syllables):
        out.append(FaceTemplate("digon", (-1, 1), (p, p.shift(1).inv()), word=p))
    return out


def _balanced_multisets(templates: list[FaceTemplate], max_faces: int):
    n = len(templates)
    for total in range(1, max_faces + 1):
        for combo in itertools.combinations_with_replacement(range(n), total):
            plus = sum(templates[i].plus_darts for i in combo)
            minus = sum(templates[i].minus_darts for i in combo)
            if plus == minus:
                yield [templates[i] for i in combo]


def _assemble(ambient, multiset: list[FaceTemplate], matching: dict[int, int],
              plus_info, minus_info) -> Diagram:
    faces = []
    dart = 0
    darts_of_face = []
    for tpl in multiset:
        ids = list(range(dart, dart + len(tpl.signs)))
        darts_of_face.append(ids)
        dart += len(tpl.signs)
        faces.append([Slot(d, c) for d, c in zip(ids, tpl.corners)])
    pairing = {}
    arrows = []
    for pi, mi in matching.items():
        a = plus_info[pi]
        b = minus_info[mi]
        pairing[a] = b
        pairing[b] = a
        arrows.append(a)
    return Diagram(ambient, faces, pairing, arrows)


def _dart_table(multiset: list[FaceTemplate]):
    plus_info = []
    minus_info = []
    dart = 0
    for tpl in multiset:
        for e in tpl.signs:
            (plus_info if e == 1 else minus_info).append(dart)
            dart += 1
    return plus_info, minus_info


def _survivor(diagram: Diagram, pres: RelPresentation) -> bool:
    if not diagram.is_connected() or diagram.chi != 2:
        return False
    nontrivial = [v for v in range(len(diagram.vertices))
                  if not diagram.vertex_label(v).is_identity()]
    if len(nontrivial) != 2:
        return False
    marked = Diagram(diagram.ambient, diagram.faces, diagram.pairing,
                     set(diagram.arrow_of_edge.values()),
                     {frozenset(e): diagram.edge_label[ei]
                      for ei, e in enumerate(diagram.edges)},
                     exterior_vertex_seeds=[min(diagram.vertices[v]) for v in nontrivial])
    if not validate_howie(marked, pres, allow_null_faces=False).ok:
        return False
    ok, _ = is_phi_reduced(marked, pres)
    return ok


def _mark_poles(diagram: Diagram) -> Diagram:
    nontrivial = [v for v in range(len(diagram.vertices))
                  if not diagram.vertex_label(v).is_identity()]
    return Diagram(diagram.ambient, diagram.faces, diagram.pairing,
                   set(diagram.arrow_of_edge.values()),
                   {frozenset(e): diagram.edge_label[ei]
                    for ei, e in enumerate(diagram.edges)},
                   exterior_vertex_seeds=[min(diagram.vertices[v]) for v in nontrivial])


@dataclass
class EnumerationResult:
    survivors: dict[str, Diagram] = field(default_factory=dict)
    counts_per_multiset: dict[tuple[str, ...], int] = field(default_factory=dict)
    matchings_tried: int = 0
    complete: bool = True

    def canonical_forms(self) -> set[str]:
        return set(self.survivors)


def enumerate_diagrams(config: EnumerationConfig, workers: int = 1
                       ) -> EnumerationResult:
    """Backtracking enumeration with closed-vertex pruning."""
    pres = config.presentation
    templates = face_templates(config)
    result = EnumerationResult()
    jobs = list(_balanced_multisets(templates, config.max_interior_faces))
    if workers > 1:
        import multiprocessing as mp
        with mp.Pool(workers) as pool:
            partials = pool.map(_enumerate_multiset_job,
                                [(config, ms) for ms in jobs])
        for ms, part in zip(jobs, partials):
            _merge_partial(result, ms, part, config.symmetry_dedup)
        return result
    for ms in jobs:
        part = _enumerate_multiset_job((config, ms))
        _merge_partial(result, ms, part, config.symmetry_dedup)
    return result


def _merge_partial(result: EnumerationResult, multiset, part,
                   dedup: bool = True) -> None:
    survivors, tried, complete = part
    key = tuple(t.kind + ("" if t.word is None else f"[{t.word}]") for t in multiset)
    count = 0
    for form, djson in survivors.items():
        name = form if dedup else f"{form}#{len(result.survivors)}"
        if name not in result.survivors:
            result.survivors[name] = Diagram.from_json(djson)
        count += 1
    result.counts_per_multiset[key] = count
    result.matchings_tried += tried
    result.complete = result.complete and complete


def _enumerate_multiset_job(job):
    config, multiset = job
    pres = config.presentation
    plus_info, minus_info = _dart_table(multiset)
    n = len(plus_info)
    survivors: dict[str, str] = {}
    tried = 0
    complete = True
    if n != len(minus_info):
        return survivors, tried, complete

    order = list(range(n))
    matching: dict[int, int] = {}
    used: set[int] = set()

    def backtrack(i: int):
        nonlocal tried, complete
        if tried > config.max_matchings_per_multiset:
            complete = False
            return
        if i == n:
            tried += 1
            d = _assemble(pres.ambient, multiset, matching, plus_info, minus_info)
            if _survivor(d, pres):
                marked = _mark_poles(d)
                survivors[marked.canonical_form()] = marked.to_json()
            return
        for mi in range(n):
            if mi in used:
                continue
            matching[order[i]] = mi
            used.add(mi)
            if _partial_ok(pres, multiset, matching, plus_info, minus_info):
                backtrack(i + 1)
            del matching[order[i]]
            used.discard(mi)

    backtrack(0)
    return survivors, tried, complete


def _partial_ok(pres, multiset, matching, plus_info, minus_info) -> bool:
    """Prune on closed vertex orbits: more than two nontrivial labels kill
    the branch; closed interior orbits must be trivial eventually, but we
    only count nontrivial ones here."""
    pairing = {}
    for pi, mi in matching.items():
        a, b = plus_info[pi], minus_info[mi]
        pairing[a] = b
        pairing[b] = a
    slot_of = {}
    faces = []
    dart = 0
    for fi, tpl in enumerate(multiset):
        ids = list(range(dart, dart + len(tpl.signs)))
        for si, d in enumerate(ids):
            slot_of[d] = (fi, si)
        dart += len(tpl.signs)
        faces.append((ids, tpl.corners))
    seen = set()
    nontrivial = 0
    for fi, (ids, corners) in enumerate(faces):
        for si in range(len(ids)):
            ref = (fi, si)
            if ref in seen:
                continue
            orbit = [ref]
            seen.add(ref)
            cur = ref
            closed = True
            while True:
                cf, cs = cur
                nxt_dart = faces[cf][0][(cs + 1) % len(faces[cf][0])]
                if nxt_dart not in pairing:
                    closed = False
                    break
                cur = slot_of[pairing[nxt_dart]]
                if cur == ref:
                    break
                orbit.append(cur)
                seen.add(cur)
            if closed:
                label = pres.ambient.one()
                for of, os_ in orbit:
                    label = label * faces[of][1][os_]
                if not label.is_identity():
                    nontrivial += 1
                    if nontrivial > 2:
                        return False
    return True


def brute_force_enumerate(config: EnumerationConfig) -> EnumerationResult:
    """Unpruned cross-check: try every permutation matching outright."""
    pres = config.presentation
    templates = face_templates(config)
    result = EnumerationResult()
    for multiset in _balanced_multisets(templates, config.max_interior_faces):
        plus_info, minus_info = _dart_table(multiset)
        n = len(plus_info)
        key = tuple(t.kind + ("" if t.word is None else f"[{t.word}]") for t in multiset)
        count = 0
        for perm in itertools.permutations(range(n)):
            result.matchings_tried += 1
            if result.matchings_tried > config.max_matchings_per_multiset:
                raise SearchBoundExceeded("brute force bound exceeded")
            matching = {i: perm[i] for i in range(n)}
            d = _assemble(pres.ambient, multiset, matching, plus_info, minus_info)
            if _survivor(d, pres):
                marked = _mark_poles(d)
                form = marked.canonical_form()
                if form not in result.survivors:
                    result.survivors[form] = marked
                count += 1
        result.counts_per_multiset[key] = count
    return result


@dataclass(frozen=True)
class AuditEntry:
    kind: str
    index: int
    value: str
    ok: bool


@dataclass(frozen=True)
class CurvatureAudit:
    ok: bool
    total: str
    entries: tuple[AuditEntry, ...]


def curvature_audit(diagram: Diagram, pres: RelPresentation) -> CurvatureAudit:
    """Check the curvature signs the weight rule forces on clean diagrams:
    nonpositive everywhere inside, exactly two at the two poles, the side
    count at least twice the negative-special count, total four."""
    ok_phi, witness = is_phi_reduced(diagram, pres)
    if not ok_phi:
        raise DiagramError(f"curvature audit needs a clean diagram: {witness}")
    rule = curvature_weights(diagram, pres)
    report = diagram.curvature(rule.weights)
    entries = []
    ok = True
    for v, kv in enumerate(report.vertex_curvatures):
        stats = rule.vertex_stats[v]
        if kv != stats.curvature_by_count:
            entries.append(AuditEntry("vertex-formula", v, f"{kv}!={stats.curvature_by_count}", False))
            ok = False
        if stats.large_side_corners < 2 * stats.negative_special:
            entries.append(AuditEntry("vertex-l2n", v,
                                      f"l={stats.large_side_corners},n={stats.negative_special}", False))
            ok = False
        if v in diagram.exterior_vertices:
            good = kv == 2
            entries.append(AuditEntry("exterior-vertex", v, str(kv), good))
            ok = ok and good
        else:
            good = kv <= 0
            entries.append(AuditEntry("interior-vertex", v, str(kv), good))
            ok = ok and good
    for fi, kf in enumerate(report.face_curvatures):
        good = kf <= 0
        entries.append(AuditEntry("face", fi, str(kf), good))
        ok = ok and good
    total_good = report.total == 4 and diagram.chi == 2
    entries.append(AuditEntry("total", -1, str(report.total), total_good))
    return CurvatureAudit(ok and total_good, str(report.total), tuple(entries))
