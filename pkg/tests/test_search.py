import pytest

from relpres.diagram import DiagramError, is_degenerate_digon
from relpres.presentation import minimize
from relpres.search import (EnumerationConfig, brute_force_enumerate,
                            curvature_audit, enumerate_diagrams,
                            face_templates)

from fixtures import degenerate_digon, mirror_large_pair, pres_z3

PRES = pres_z3(2)


class TestTemplates:
    def test_relator_and_digons(self):
        cfg = EnumerationConfig(PRES, max_interior_faces=1, digon_syllables=1)
        tpls = face_templates(cfg)
        kinds = [t.kind for t in tpls]
        assert kinds.count("relator+") == 1 and kinds.count("relator-") == 1
        assert kinds.count("digon") == 2      # x and y in the bottom slice

    def test_digon_alphabet_respects_bound(self):
        # one copy level: the bottom slice is a single group copy
        assert len(PRES.digon_alphabet(1)) == 2
        assert len(PRES.digon_alphabet(2)) == 2

    def test_minimized_presentation_has_no_digons(self):
        p0 = minimize(PRES)
        assert p0.s == 0 and p0.digon_alphabet(2) == []


class TestEnumeration:
    def test_single_face_survivors_are_degenerate_digons(self):
        cfg = EnumerationConfig(PRES, max_interior_faces=1, digon_syllables=1)
        res = enumerate_diagrams(cfg)
        assert len(res.survivors) == 2
        for d in res.survivors.values():
            assert is_degenerate_digon(d, PRES)
        labels = sorted(tuple(sorted(str(d.vertex_label(v))
                                     for v in d.exterior_vertices))
                        for d in res.survivors.values())
        assert labels == [("x", "y@1"), ("x@1", "y")]

    def test_no_survivors_without_digon_alphabet(self):
        p0 = minimize(PRES)
        res = enumerate_diagrams(EnumerationConfig(p0, max_interior_faces=2,
                                                   digon_syllables=2))
        assert not res.survivors

    @pytest.mark.parametrize("k", [2, 3])
    def test_brute_force_agrees_at_two_faces(self, k):
        pres = pres_z3(k)
        cfg = EnumerationConfig(pres, max_interior_faces=2, digon_syllables=1)
        fast = enumerate_diagrams(cfg)
        slow = brute_force_enumerate(cfg)
        assert fast.canonical_forms() == slow.canonical_forms()
        assert fast.complete

    def test_three_faces_only_degenerate_digons(self):
        cfg = EnumerationConfig(PRES, max_interior_faces=3, digon_syllables=2)
        res = enumerate_diagrams(cfg)
        assert res.complete
        assert all(is_degenerate_digon(d, PRES) for d in res.survivors.values())
        assert len(res.survivors) == 2

    def test_counts_per_multiset_recorded(self):
        cfg = EnumerationConfig(PRES, max_interior_faces=1, digon_syllables=1)
        res = enumerate_diagrams(cfg)
        assert sum(res.counts_per_multiset.values()) >= 2


class TestDedup:
    def test_relabeling_hits_same_canonical_form(self):
        d = degenerate_digon(PRES, PRES.ambient.from_name("x"))
        base = d.canonical_form()
        data = d.to_dict()
        for f in data["faces"]:
            for s in f["slots"]:
                s["dart"] += 11
        data["pairing"] = [[a + 11, b + 11] for a, b in data["pairing"]]
        data["edge_dir"] = {k: v + 11 for k, v in data["edge_dir"].items()}
        from relpres.diagram import Diagram
        assert Diagram.from_dict(data).canonical_form() == base


class TestAudit:
    def test_degenerate_digon_audit(self):
        d = degenerate_digon(PRES, PRES.ambient.from_name("x"))
        audit = curvature_audit(d, PRES)
        assert audit.ok and audit.total == "4"
        exterior = [e for e in audit.entries if e.kind == "exterior-vertex"]
        assert len(exterior) == 2 and all(e.value == "2" for e in exterior)

    def test_audit_requires_clean_diagram(self):
        d = mirror_large_pair(PRES)
        with pytest.raises(DiagramError):
            curvature_audit(d, PRES)

    def test_survivor_audits_total_four(self):
        cfg = EnumerationConfig(PRES, max_interior_faces=2, digon_syllables=1)
        res = enumerate_diagrams(cfg)
        for d in res.survivors.values():
            audit = curvature_audit(d, PRES)
            assert audit.ok and audit.total == "4"

    def test_no_special_digons_in_survivors(self):
        # the weight rule finds no special digons at this scale; all corners
        # at the poles belong to plain digons
        from relpres.diagram import curvature_weights
        cfg = EnumerationConfig(PRES, max_interior_faces=2, digon_syllables=1)
        res = enumerate_diagrams(cfg)
        for d in res.survivors.values():
            rule = curvature_weights(d, PRES)
            assert rule.special_digons == ()
            assert all(s.positive_special == 0 and s.negative_special == 0
                       for s in rule.vertex_stats)
