import random

import pytest
from hypothesis import given, strategies as st

from relpres.freeprod import FreeProduct
from relpres.words import (WordParseError, cyclic_equal, cyclic_rotations,
                           from_items, h_word, is_cyclically_reduced,
                           is_unimodular, parse_h_word, parse_word,
                           t_exponent_residue, word_str)

from fixtures import Z3

BASE = FreeProduct(Z3, 0)
H1 = FreeProduct(Z3, 1)


def tword(text, ambient=BASE):
    return parse_word(text, ambient)


class TestParse:
    def test_simple(self):
        w = tword("x t")
        assert w.exponent_sum() == 1 and is_unimodular(w)

    def test_mixed_signs(self):
        w = tword("t x t^-1 y t")
        assert w.exponent_sum() == 1 and is_unimodular(w)

    def test_not_unimodular(self):
        w = tword("x t y t")
        assert w.exponent_sum() == 2 and not is_unimodular(w)

    def test_copy_suffix(self):
        w = parse_word("x@1 t", H1)
        assert w.segments[0].letters[0].copy_index == 1

    def test_powers(self):
        w = tword("(x t)^2")
        assert word_str(w) == "x t x t"
        winv = tword("(x t)^-1")
        assert word_str(winv) == "t^-1 y"

    def test_nested_parens(self):
        w = tword("((x t)^2 y)^2")
        assert w.exponent_sum() == 4

    def test_parse_errors_carry_position(self):
        with pytest.raises(WordParseError) as err:
            tword("x q t")
        assert err.value.position == 2
        with pytest.raises(WordParseError):
            tword("( x t")
        with pytest.raises(WordParseError):
            tword("x )^2")
        with pytest.raises(WordParseError):
            tword("(x t) y")  # parenthesized group needs an explicit power
        with pytest.raises(WordParseError):
            parse_word("x@3 t", H1)

    def test_h_word_parser(self):
        assert parse_h_word("x y x", BASE) == BASE.from_name("x")
        with pytest.raises(WordParseError):
            parse_h_word("x t", BASE)

    def test_roundtrip_word_str(self):
        for text in ("x t y t^-1 x t", "t t x", "x"):
            w = tword(text)
            assert word_str(parse_word(word_str(w), BASE)) == word_str(w)


class TestReduction:
    def test_free_reduce_cancels(self):
        w = tword("x t t^-1 x")
        red = w.free_reduce()
        assert red.t_count == 0 and str(red.h_value()) == "y"

    def test_free_reduce_keeps_blocked(self):
        w = tword("x t y t^-1")
        assert w.free_reduce().t_count == 2

    def test_cyclic_reduce_seam(self):
        w = tword("t^-1 x t")
        red = w.cyclic_free_reduce()
        # every t cancels cyclically; what remains is the group element
        from relpres.freeprod import FPWord
        assert isinstance(red, FPWord) and str(red) == "x"

    def test_cyclically_reduced_flag(self):
        assert is_cyclically_reduced(tword("x t y t^-1 x t"))
        assert not is_cyclically_reduced(tword("t^-1 x t"))

    def test_rotations_are_cyclic_equal(self):
        w = tword("x t y t^-1 x t")
        for r in cyclic_rotations(w):
            assert cyclic_equal(w, r)

    def test_cyclic_not_equal(self):
        assert not cyclic_equal(tword("x t"), tword("y t"))
        assert not cyclic_equal(tword("x t"), tword("x t x t"))


sign_lists = st.lists(st.sampled_from((1, -1)), max_size=6)
seg_elems = st.lists(st.integers(0, 2), max_size=6)


@st.composite
def twords(draw, ambient=BASE):
    signs = draw(sign_lists)
    items = []
    for i in range(len(signs) + 1):
        elem = draw(st.integers(-1, 2))
        if elem >= 0:
            items.append(ambient.word([(0, elem)]))
        if i < len(signs):
            items.append(signs[i])
    return from_items(ambient, items)


class TestExponentSum:
    @given(twords(), twords())
    def test_homomorphism(self, a, b):
        assert (a * b).exponent_sum() == a.exponent_sum() + b.exponent_sum()

    @given(twords())
    def test_inverse_negates(self, a):
        assert a.inv().exponent_sum() == -a.exponent_sum()

    @given(twords())
    def test_free_reduction_invariant(self, a):
        assert a.free_reduce().exponent_sum() == a.exponent_sum()


class TestResidue:
    def test_gt_obstruction(self):
        assert t_exponent_residue(tword("x t"), 2) == 1

    def test_power_has_no_obstruction(self):
        w = tword("x t y t^-1 x t")
        assert t_exponent_residue(w.pow(2), 2) == 0

    def test_k_validation(self):
        with pytest.raises(ValueError):
            t_exponent_residue(tword("x t"), 1)

    def test_products_of_conjugates_of_powers(self):
        # direct exponent-sum computation over 100 random products
        rng = random.Random(7)
        w = tword("x t y t^-1 x t")
        k = 3
        names = ["e", "x", "y"]
        for _ in range(100):
            word = h_word(BASE.one())
            for _ in range(rng.randint(1, 4)):
                conj_text = " ".join(rng.choice(["x", "y", "t", "t^-1"])
                                     for _ in range(rng.randint(0, 3)))
                v = tword(conj_text) if conj_text else h_word(BASE.one())
                power = w.pow(k) if rng.random() < 0.5 else w.pow(-k)
                word = word * v.inv() * power * v
            assert t_exponent_residue(word.free_reduce(), k) == 0
