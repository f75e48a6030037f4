"""Labeled combinatorial maps on closed oriented surfaces.

A diagram is a set of faces, each a cyclic sequence of slots; a slot is a
pre-edge (dart) followed by the corner at its head.  Slots are listed
anticlockwise around the face.  A perfect matching on darts glues faces
with orientation reversal, so the resulting surface is closed and
oriented by construction.  Vertices are never stored: they are orbits of
the corner rotation derived from the pairing.

Each edge carries a geometric arrow (one of its two darts traverses it
along the arrow) and a label: the stable letter "t" or the identity "1"
(identity edges contribute nothing to labels).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .freeprod import FPWord, FreeProduct
from .groups import GroupTable
from .presentation import RelPresentation
from .words import TWord, cyclic_equal, from_items, word_str, parse_h_word

CornerRef = tuple[int, int]          # (face index, slot index)
WeightAssignment = Mapping[CornerRef, Fraction]


class DiagramError(ValueError):
    pass


@dataclass(frozen=True)
class Slot:
    dart: int
    corner: FPWord


class Diagram:
    """Immutable validated map; all derived structure computed up front."""

    def __init__(self,
                 ambient: FreeProduct,
                 faces: Sequence[Sequence[Slot]],
                 pairing: Mapping[int, int],
                 arrow_darts: Iterable[int],
                 edge_labels: Mapping[frozenset, str] | None = None,
                 exterior_faces: Iterable[int] = (),
                 exterior_vertex_seeds: Iterable[CornerRef] = ()):
        self.ambient = ambient
        self.faces: tuple[tuple[Slot, ...], ...] = tuple(tuple(f) for f in faces)
        if any(len(f) == 0 for f in self.faces):
            raise DiagramError("face with no corners")
        self.pairing = dict(pairing)
        self._validate_pairing()
        self.slot_of_dart: dict[int, CornerRef] = {}
        for fi, face in enumerate(self.faces):
            for si, slot in enumerate(face):
                if slot.dart in self.slot_of_dart:
                    raise DiagramError(f"dart {slot.dart} appears in two slots")
                if slot.corner.ambient != ambient:
                    raise DiagramError("corner label in wrong ambient")
                self.slot_of_dart[slot.dart] = (fi, si)
        missing = set(self.pairing) ^ set(self.slot_of_dart)
        if missing:
            raise DiagramError(f"dangling darts: {sorted(missing)}")

        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(
            (min(d, self.pairing[d]), max(d, self.pairing[d]))
            for d in self.pairing if d < self.pairing[d]))
        self.edge_of_dart = {}
        for ei, (d1, d2) in enumerate(self.edges):
            self.edge_of_dart[d1] = ei
            self.edge_of_dart[d2] = ei

        arrows = set(arrow_darts)
        self.arrow_of_edge: dict[int, int] = {}
        for ei, (d1, d2) in enumerate(self.edges):
            chosen = [d for d in (d1, d2) if d in arrows]
            if len(chosen) == 0:
                self.arrow_of_edge[ei] = d1
            elif len(chosen) == 1:
                self.arrow_of_edge[ei] = chosen[0]
            else:
                raise DiagramError(f"orientation conflict on edge {ei}: both darts marked")
        extra = arrows - set(self.pairing)
        if extra:
            raise DiagramError(f"orientation conflict: arrow darts {sorted(extra)} unknown")

        self.edge_label: dict[int, str] = {ei: "t" for ei in range(len(self.edges))}
        for key, lab in (edge_labels or {}).items():
            darts = frozenset(key)
            ds = sorted(darts)
            if len(ds) != 2 or self.pairing.get(ds[0]) != ds[1]:
                raise DiagramError(f"edge label on non-edge {sorted(darts)}")
            if lab not in ("t", "1"):
                raise DiagramError(f"unsupported edge label {lab!r}")
            self.edge_label[self.edge_of_dart[ds[0]]] = lab

        self.exterior_faces = frozenset(exterior_faces)
        if any(not (0 <= f < len(self.faces)) for f in self.exterior_faces):
            raise DiagramError("exterior face index out of range")

        self.vertices: tuple[tuple[CornerRef, ...], ...] = self._compute_vertices()
        self.vertex_of_corner: dict[CornerRef, int] = {}
        for vi, orbit in enumerate(self.vertices):
            for ref in orbit:
                self.vertex_of_corner[ref] = vi

        ext_vertices = set()
        for ref in exterior_vertex_seeds:
            ref = tuple(ref)
            if ref not in self.vertex_of_corner:
                raise DiagramError(f"exterior vertex seed {ref} is not a corner")
            ext_vertices.add(self.vertex_of_corner[ref])
        self.exterior_vertices = frozenset(ext_vertices)

        self.chi = len(self.vertices) - len(self.edges) + len(self.faces)
        if self.chi % 2 != 0:
            raise DiagramError(f"odd Euler characteristic {self.chi}")

    # -- structure ------------------------------------------------------

    def _validate_pairing(self) -> None:
        for d, e in self.pairing.items():
            if d == e:
                raise DiagramError(f"fixed-point pairing at dart {d}")
            if self.pairing.get(e) != d:
                raise DiagramError(f"pairing is not an involution at dart {d}")

    def _next_corner(self, ref: CornerRef) -> CornerRef:
        fi, si = ref
        face = self.faces[fi]
        next_dart = face[(si + 1) % len(face)].dart
        return self.slot_of_dart[self.pairing[next_dart]]

    def _compute_vertices(self) -> tuple[tuple[CornerRef, ...], ...]:
        seen = set()
        orbits = []
        for fi, face in enumerate(self.faces):
            for si in range(len(face)):
                ref = (fi, si)
                if ref in seen:
                    continue
                orbit = [ref]
                seen.add(ref)
                cur = self._next_corner(ref)
                while cur != ref:
                    orbit.append(cur)
                    seen.add(cur)
                    cur = self._next_corner(cur)
                orbits.append(tuple(orbit))
        return tuple(sorted(orbits, key=lambda o: min(o)))

    def corner(self, ref: CornerRef) -> FPWord:
        return self.faces[ref[0]][ref[1]].corner

    def sense(self, dart: int) -> int:
        """+1 when the face traversal follows the edge arrow."""
        return 1 if self.arrow_of_edge[self.edge_of_dart[dart]] == dart else -1

    def components(self) -> list[frozenset[int]]:
        parent = list(range(len(self.faces)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for d, e in self.pairing.items():
            a, b = find(self.slot_of_dart[d][0]), find(self.slot_of_dart[e][0])
            if a != b:
                parent[a] = b
        groups: dict[int, set[int]] = {}
        for f in range(len(self.faces)):
            groups.setdefault(find(f), set()).add(f)
        return [frozenset(g) for g in groups.values()]

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def genus(self) -> int:
        if not self.is_connected():
            raise DiagramError("genus of a disconnected diagram")
        return (2 - self.chi) // 2

    # -- labels ----------------------------------------------------------

    def vertex_label(self, v: int) -> FPWord:
        """Product of corner labels in the derived cyclic order (one
        representative of the conjugacy/cyclic-rotation class)."""
        out = self.ambient.one()
        for ref in self.vertices[v]:
            out = out * self.corner(ref)
        return out

    def face_label(self, fi: int, start: int = 0) -> TWord:
        """Label written starting with the pre-edge of the given slot."""
        face = self.faces[fi]
        items: list = []
        for off in range(len(face)):
            slot = face[(start + off) % len(face)]
            ei = self.edge_of_dart[slot.dart]
            if self.edge_label[ei] == "t":
                items.append(self.sense(slot.dart))
            items.append(slot.corner)
        return from_items(self.ambient, items)

    def face_label_ending(self, fi: int, end: int) -> TWord:
        """Label written so that the pre-edge of slot ``end`` is last."""
        face = self.faces[fi]
        items: list = []
        for off in range(1, len(face) + 1):
            slot = face[(end + off) % len(face)]
            ei = self.edge_of_dart[slot.dart]
            if self.edge_label[ei] == "t":
                items.append(self.sense(slot.dart))
            if off < len(face):
                items.append(slot.corner)
        lead = face[end].corner
        return from_items(self.ambient, [lead] + items)

    # -- corner combinatorics ---------------------------------------------

    def corner_type(self, ref: CornerRef) -> str:
        fi, si = ref
        face = self.faces[fi]
        d_in = face[si].dart
        d_out = face[(si + 1) % len(face)].dart
        a = "+" if self.sense(d_in) == 1 else "-"
        b = "+" if self.sense(d_out) == 1 else "-"
        return a + b

    def vertex_kind(self, v: int) -> str:
        types = {self.corner_type(ref) for ref in self.vertices[v]}
        if types == {"+-"}:
            return "sink"
        if types == {"-+"}:
            return "source"
        return "mixed"

    def corner_alternation_violations(self) -> list[int]:
        """Vertices where (++) and (--) corners fail to alternate."""
        bad = []
        for v, orbit in enumerate(self.vertices):
            heavy = [self.corner_type(ref) for ref in orbit
                     if self.corner_type(ref) in ("++", "--")]
            if any(heavy[i] == heavy[(i + 1) % len(heavy)] for i in range(len(heavy))) \
                    and len(heavy) > 1:
                bad.append(v)
            elif len(heavy) == 1:
                bad.append(v)  # a lone ++ or -- cannot close up around a vertex
        return bad

    # -- curvature ---------------------------------------------------------

    def curvature(self, weights: WeightAssignment) -> "CurvatureReport":
        for fi, face in enumerate(self.faces):
            for si in range(len(face)):
                if (fi, si) not in weights:
                    raise DiagramError(f"missing weight for corner {(fi, si)}")
        vertex_k = []
        for orbit in self.vertices:
            vertex_k.append(Fraction(2) - sum(Fraction(weights[r]) for r in orbit))
        face_k = []
        for fi, face in enumerate(self.faces):
            face_k.append(Fraction(2) - sum(1 - Fraction(weights[(fi, si)])
                                            for si in range(len(face))))
        total = sum(vertex_k) + sum(face_k)
        genus = self.genus() if self.is_connected() else None
        return CurvatureReport(tuple(vertex_k), tuple(face_k), total, self.chi, genus)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        edge_dir = {str(ei): self.arrow_of_edge[ei] for ei in range(len(self.edges))}
        labels = {str(ei): lab for ei, lab in self.edge_label.items() if lab != "t"}
        seeds = sorted(min(self.vertices[v]) for v in self.exterior_vertices)
        return {
            "ambient": {"names": list(self.ambient.group.names),
                        "table": [list(r) for r in self.ambient.group.table],
                        "s": self.ambient.s},
            "faces": [{"slots": [{"dart": s.dart, "corner": str(s.corner) if s.corner else ""}
                                 for s in face]} for face in self.faces],
            "pairing": [list(e) for e in self.edges],
            "edge_dir": edge_dir,
            "edge_labels": labels,
            "exterior": {"faces": sorted(self.exterior_faces),
                         "vertex_seeds": [list(s) for s in seeds]},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Diagram":
        amb_data = data["ambient"]
        group = GroupTable(amb_data["names"], amb_data["table"])
        ambient = FreeProduct(group, amb_data["s"])
        faces = []
        for f in data["faces"]:
            slots = []
            for s in f["slots"]:
                text = s.get("corner", "")
                corner = parse_h_word(text, ambient) if text else ambient.one()
                slots.append(Slot(s["dart"], corner))
            faces.append(slots)
        pairing = {}
        edge_list = [tuple(e) for e in data["pairing"]]
        for d1, d2 in edge_list:
            pairing[d1] = d2
            pairing[d2] = d1
        arrow_darts = []
        order = sorted((min(e), max(e)) for e in edge_list)
        for key, dart in data.get("edge_dir", {}).items():
            ei = int(key)
            if not (0 <= ei < len(order)) or dart not in order[ei]:
                raise DiagramError(f"orientation conflict in edge_dir entry {key}")
            arrow_darts.append(dart)
        edge_labels = {frozenset(order[int(k)]): v
                       for k, v in data.get("edge_labels", {}).items()}
        ext = data.get("exterior", {})
        return cls(ambient, faces, pairing, arrow_darts, edge_labels,
                   ext.get("faces", ()), [tuple(s) for s in ext.get("vertex_seeds", ())])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "Diagram":
        return cls.from_dict(json.loads(text))

    def canonical_form(self) -> str:
        """Lexicographically minimal serialization over dart relabelings.

        Exact and exponential in principle, fine at desk scale: every
        (face, rotation) seed starts a deterministic traversal.
        """
        if not self.faces:
            return '"empty"'
        comps = self.components()
        if len(comps) > 1:
            raise DiagramError("canonical form of a disconnected diagram")
        best: str | None = None
        for f0 in range(len(self.faces)):
            for r0 in range(len(self.faces[f0])):
                s = self._canonical_from(f0, r0)
                if best is None or s < best:
                    best = s
        assert best is not None
        return best

    def _canonical_from(self, f0: int, r0: int) -> str:
        dart_id: dict[int, int] = {}
        face_order: list[tuple[int, int]] = []
        queued = {f0}
        queue = [(f0, r0)]
        while queue:
            fi, rot = queue.pop(0)
            face_order.append((fi, rot))
            face = self.faces[fi]
            for off in range(len(face)):
                d = face[(rot + off) % len(face)].dart
                if d not in dart_id:
                    dart_id[d] = len(dart_id)
            for off in range(len(face)):
                d = face[(rot + off) % len(face)].dart
                p = self.pairing[d]
                pf, ps = self.slot_of_dart[p]
                if pf not in queued:
                    queued.add(pf)
                    queue.append((pf, ps))
        faces_out = []
        ext_faces = []
        for new_fi, (fi, rot) in enumerate(face_order):
            face = self.faces[fi]
            faces_out.append([
                {"d": dart_id[face[(rot + off) % len(face)].dart],
                 "c": str(face[(rot + off) % len(face)].corner)}
                for off in range(len(face))])
            if fi in self.exterior_faces:
                ext_faces.append(new_fi)
        pairing = sorted(sorted((dart_id[d], dart_id[e])) for d, e in self.edges)
        arrows = sorted(dart_id[self.arrow_of_edge[ei]] for ei in range(len(self.edges)))
        labels = sorted((min(dart_id[d] for d in self.edges[ei]), lab)
                        for ei, lab in self.edge_label.items() if lab != "t")
        ext_vertices = sorted(
            sorted(dart_id[self.faces[fi][si].dart] for fi, si in self.vertices[v])
            for v in self.exterior_vertices)
        doc = {"f": faces_out, "p": pairing, "a": arrows, "l": labels,
               "xf": sorted(ext_faces), "xv": ext_vertices}
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class CurvatureReport:
    vertex_curvatures: tuple[Fraction, ...]
    face_curvatures: tuple[Fraction, ...]
    total: Fraction
    chi: int
    genus: int | None = None

    @property
    def satisfies_identity(self) -> bool:
        return self.total == 2 * self.chi


def uniform_weights(diagram: Diagram, value: Fraction = Fraction(1)) -> dict[CornerRef, Fraction]:
    return {(fi, si): Fraction(value)
            for fi, face in enumerate(diagram.faces) for si in range(len(face))}


# -- Howie validation ---------------------------------------------------


@dataclass(frozen=True)
class FaceClass:
    kind: str                 # digon | large | null | exterior | invalid
    digon_word: FPWord | None = None
    reason: str = ""


def classify_face(diagram: Diagram, pres: RelPresentation, fi: int) -> FaceClass:
    if fi in diagram.exterior_faces:
        return FaceClass("exterior")
    label = diagram.face_label(fi)
    red = label.cyclic_free_reduce()
    if isinstance(red, FPWord):
        if red.is_identity():
            return FaceClass("null")
        return FaceClass("invalid", reason=f"t-free label {red} is not trivial")
    if red.t_count == 2 and red.exponent_sum() == 0:
        digon = _match_digon(diagram.ambient, red)
        if digon is not None:
            return FaceClass("digon", digon_word=digon)
    relator = pres.relator()
    if cyclic_equal(red, relator) or cyclic_equal(red, relator.inv()):
        return FaceClass("large")
    return FaceClass("invalid", reason=f"label {word_str(label)} matches no relator")


def _match_digon(ambient: FreeProduct, red: TWord) -> FPWord | None:
    """Match t^-1 p t (p^shift)^-1 for nontrivial bottom-slice p, in either
    rotation of the cyclic 2-t-letter word."""
    seam = red.segments[-1] * red.segments[0]
    segs = [red.segments[1], seam]
    signs = list(red.signs)
    for r in range(2):
        first, second = signs[r % 2], signs[(r + 1) % 2]
        p, q = segs[r % 2], segs[(r + 1) % 2]
        if first == -1 and second == 1:
            if p and p.in_bottom() and q == p.shift(1).inv():
                return p
    return None


@dataclass(frozen=True)
class HowieReport:
    ok: bool
    face_classes: tuple[FaceClass, ...]
    failures: tuple[str, ...]


def validate_howie(diagram: Diagram, pres: RelPresentation,
                   allow_null_faces: bool = True) -> HowieReport:
    """Check interior face labels against the relator set and interior
    vertex labels against the identity of H."""
    if diagram.ambient != pres.ambient:
        raise DiagramError("diagram and presentation live in different ambients")
    failures = []
    classes = []
    for fi in range(len(diagram.faces)):
        fc = classify_face(diagram, pres, fi)
        classes.append(fc)
        if fc.kind == "invalid":
            failures.append(f"face {fi}: {fc.reason}")
        elif fc.kind == "null" and not allow_null_faces:
            failures.append(f"face {fi}: trivial-label face not allowed here")
    for v in range(len(diagram.vertices)):
        if v in diagram.exterior_vertices:
            continue
        label = diagram.vertex_label(v)
        if not label.is_identity():
            failures.append(f"interior vertex {v} has label {label}")
    return HowieReport(not failures, tuple(classes), tuple(failures))


# -- weight rule and vertex classification -------------------------------


@dataclass(frozen=True)
class VertexStats:
    negative_special: int   # n
    large_side_corners: int  # l: (+-) and (-+) corners of large faces
    positive_special: int   # p
    kind: str               # sink | source | mixed

    @property
    def curvature_by_count(self) -> Fraction:
        return Fraction(2 + self.negative_special
                        - self.large_side_corners - self.positive_special)


@dataclass(frozen=True)
class WeightRuleResult:
    weights: dict[CornerRef, Fraction]
    vertex_stats: tuple[VertexStats, ...]
    special_digons: tuple[int, ...]


def curvature_weights(diagram: Diagram, pres: RelPresentation) -> WeightRuleResult:
    """The curvature-test weight rule for diagrams over the standard
    presentation: digons carry weight zero (special ones -1/+1 across
    their two corners), doubled-sign corners of large faces weigh zero,
    and everything else weighs one.
    """
    report = validate_howie(diagram, pres, allow_null_faces=False)
    if not report.ok:
        raise DiagramError("weight rule needs a valid diagram: " + "; ".join(report.failures))
    kinds = [fc.kind for fc in report.face_classes]
    if any(k == "exterior" for k in kinds):
        raise DiagramError("weight rule applies to diagrams without exterior faces")

    neighbor_types: dict[CornerRef, tuple[str, str]] = {}
    for v, orbit in enumerate(diagram.vertices):
        size = len(orbit)
        for idx, ref in enumerate(orbit):
            prev = diagram.corner_type(orbit[(idx - 1) % size])
            nxt = diagram.corner_type(orbit[(idx + 1) % size])
            neighbor_types[ref] = (prev, nxt)

    special: dict[int, tuple[CornerRef, CornerRef]] = {}
    for fi, kind in enumerate(kinds):
        if kind != "digon":
            continue
        positives = [(fi, si) for si in range(len(diagram.faces[fi]))
                     if set(neighbor_types[(fi, si)]) == {"++", "--"}]
        if len(positives) > 1:
            raise DiagramError(f"digon {fi} has two positive corners")
        if positives:
            pos = positives[0]
            neg = (fi, 1 - pos[1])
            special[fi] = (pos, neg)

    weights: dict[CornerRef, Fraction] = {}
    for fi, face in enumerate(diagram.faces):
        for si in range(len(face)):
            ref = (fi, si)
            ctype = diagram.corner_type(ref)
            if kinds[fi] == "digon":
                if fi in special:
                    pos, neg = special[fi]
                    weights[ref] = Fraction(1) if ref == pos else Fraction(-1)
                else:
                    weights[ref] = Fraction(0)
            elif ctype in ("++", "--"):
                weights[ref] = Fraction(0)
            else:
                weights[ref] = Fraction(1)

    stats = []
    for v, orbit in enumerate(diagram.vertices):
        n = sum(1 for ref in orbit
                if kinds[ref[0]] == "digon" and ref[0] in special and special[ref[0]][1] == ref)
        p = sum(1 for ref in orbit
                if kinds[ref[0]] == "digon" and ref[0] in special and special[ref[0]][0] == ref)
        l = sum(1 for ref in orbit
                if kinds[ref[0]] == "large" and diagram.corner_type(ref) in ("+-", "-+"))
        stats.append(VertexStats(n, l, p, diagram.vertex_kind(v)))
    return WeightRuleResult(weights, tuple(stats), tuple(sorted(special)))


# -- reducedness -----------------------------------------------------------


def reducible_pairs(diagram: Diagram, interior_only: bool = True
                    ) -> list[tuple[int, int, int]]:
    """Edges whose two (distinct, interior) faces carry mutually inverse
    labels read from that edge: (edge index, face1, face2)."""
    out = []
    for ei, (d1, d2) in enumerate(diagram.edges):
        f1, s1 = diagram.slot_of_dart[d1]
        f2, s2 = diagram.slot_of_dart[d2]
        if f1 == f2:
            continue
        if interior_only and (f1 in diagram.exterior_faces or f2 in diagram.exterior_faces):
            continue
        a = diagram.face_label(f1, start=s1).free_reduce()
        b_end = diagram.face_label_ending(f2, end=s2).free_reduce()
        if a == b_end.inv().free_reduce():
            out.append((ei, f1, f2))
    return out


def is_reduced(diagram: Diagram) -> tuple[bool, list[tuple[int, int, int]]]:
    pairs = reducible_pairs(diagram)
    return (not pairs, pairs)


def digon_adjacencies(diagram: Diagram, pres: RelPresentation) -> list[tuple[int, int, int]]:
    """Edges shared by two distinct digon faces (forbidden when reduced
    diagrams are required to keep digons apart)."""
    out = []
    for ei, (d1, d2) in enumerate(diagram.edges):
        f1 = diagram.slot_of_dart[d1][0]
        f2 = diagram.slot_of_dart[d2][0]
        if f1 == f2:
            continue
        c1 = classify_face(diagram, pres, f1)
        c2 = classify_face(diagram, pres, f2)
        if c1.kind == "digon" and c2.kind == "digon":
            out.append((ei, f1, f2))
    return out


def is_phi_reduced(diagram: Diagram, pres: RelPresentation
                   ) -> tuple[bool, list[tuple[int, int, int]]]:
    ok, pairs = is_reduced(diagram)
    adj = digon_adjacencies(diagram, pres)
    return (ok and not adj, pairs + adj)


def is_degenerate_digon(diagram: Diagram, pres: RelPresentation) -> bool:
    """One digon face whose two pre-edges are glued to each other, with
    two exterior vertices: the self-associated digon sphere."""
    if len(diagram.faces) != 1 or len(diagram.faces[0]) != 2:
        return False
    d1, d2 = (s.dart for s in diagram.faces[0])
    if diagram.pairing[d1] != d2:
        return False
    if len(diagram.vertices) != 2 or len(diagram.exterior_vertices) != 2:
        return False
    return classify_face(diagram, pres, 0).kind == "digon"
