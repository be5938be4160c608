"""Tests for normal-coordinate curves, intersections and multitwists."""

import pytest
from fractions import Fraction

from pillowcase.curves import (
    NAMED_CURVES,
    NormalCurve,
    WeightedMulticurve,
    apply_multitwist,
    class_words,
    curve_from_name,
    intersection_number,
    ivanov_bounds,
    trace_components,
    twist_limit,
)
from pillowcase.errors import InvalidCurve

ALPHA = curve_from_name("alpha")
BETA = curve_from_name("beta")
ETA = curve_from_name("eta")
NU = curve_from_name("nu")


class TestNamedCurves:
    def test_all_names_valid(self):
        for name in NAMED_CURVES:
            c = curve_from_name(name)
            assert isinstance(c, NormalCurve)

    def test_connected(self):
        for name in NAMED_CURVES:
            assert len(trace_components(curve_from_name(name))) == 1

    def test_invalid_weights_rejected(self):
        with pytest.raises(InvalidCurve):
            NormalCurve((1, 0, 0, 0, 0, 0, 0, 0, 0))


class TestIntersectionTable:
    """Pairwise geometric intersection numbers of the four core curves."""

    TABLE = {
        ("alpha", "beta"): 0,
        ("alpha", "eta"): 2,
        ("alpha", "nu"): 2,
        ("beta", "eta"): 0,
        ("beta", "nu"): 2,
        ("eta", "nu"): 0,
    }

    @pytest.mark.parametrize("pair", sorted(TABLE))
    def test_pair(self, pair):
        a, b = (curve_from_name(n) for n in pair)
        assert intersection_number(a, b) == self.TABLE[pair]
        assert intersection_number(b, a) == self.TABLE[pair]

    @pytest.mark.parametrize("name", sorted(NAMED_CURVES))
    def test_self_intersection_zero(self, name):
        c = curve_from_name(name)
        assert intersection_number(c, c) == 0


class TestMultitwist:
    def test_fixes_cores(self):
        for n in (-3, -1, 1, 2, 5):
            assert apply_multitwist(ALPHA, n) == ALPHA
            assert apply_multitwist(BETA, n) == BETA

    def test_identity(self):
        for c in (ETA, NU):
            assert apply_multitwist(c, 0) == c

    @pytest.mark.parametrize("m,n", [(1, 1), (2, 1), (1, -1), (-2, 3), (2, 2)])
    def test_group_law(self, m, n):
        for c in (ETA, NU):
            assert apply_multitwist(apply_multitwist(c, m), n) == \
                apply_multitwist(c, m + n)

    def test_inverse(self):
        for c in (ETA, NU):
            for n in (1, 2, 3):
                assert apply_multitwist(apply_multitwist(c, n), -n) == c

    def test_equivariance(self):
        # i(f(a), f(b)) == i(a, b) for the twist homeomorphism f
        for n in (-2, -1, 1, 2, 3):
            for a in (ETA, NU, ALPHA, BETA):
                for b in (ETA, NU):
                    assert intersection_number(
                        apply_multitwist(a, n), apply_multitwist(b, n)
                    ) == intersection_number(a, b)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_linear_growth_against_nu(self, n):
        # i(f^n eta, nu) = n * (i(eta,a) i(a,nu) + i(eta,b) i(b,nu)) = 4 n
        assert intersection_number(apply_multitwist(ETA, n), NU) == 4 * n

    def test_components_preserved(self):
        for c in (ETA, NU):
            for n in (-2, 1, 3):
                assert len(trace_components(apply_multitwist(c, n))) == 1


class TestIvanovBounds:
    @pytest.mark.parametrize("n", range(1, 11))
    @pytest.mark.parametrize("pair", [("eta", "nu"), ("eta", "eta"),
                                      ("nu", "nu"), ("eta", "beta")])
    def test_sandwich(self, pair, n):
        g, d = (curve_from_name(x) for x in pair)
        lo, hi = ivanov_bounds(g, d, n)
        value = intersection_number(apply_multitwist(g, n), d)
        assert lo <= value <= hi

    @pytest.mark.parametrize("pair", [("eta", "nu"), ("nu", "nu")])
    def test_rate(self, pair):
        # i(f^n g, d)/n converges to sum_c i(g,c) i(c,d)
        g, d = (curve_from_name(x) for x in pair)
        rate = sum(intersection_number(g, c) * intersection_number(c, d)
                   for c in (ALPHA, BETA))
        n = 12
        value = intersection_number(apply_multitwist(g, n), d)
        assert abs(value - n * rate) <= intersection_number(g, d)


class TestTwistLimit:
    def test_eta_limit(self):
        lim = twist_limit(ETA)
        weights = {tuple(c.weights): w for w, c in lim.terms}
        assert weights[tuple(ALPHA.weights)] == Fraction(2)
        assert weights.get(tuple(BETA.weights), Fraction(0)) == Fraction(0)

    def test_nu_limit(self):
        lim = twist_limit(NU)
        weights = {tuple(c.weights): w for w, c in lim.terms}
        assert weights[tuple(ALPHA.weights)] == Fraction(2)
        assert weights[tuple(BETA.weights)] == Fraction(2)

    def test_limit_is_twist_invariant(self):
        for c in (ETA, NU):
            for n in (1, 2, -1):
                a = twist_limit(apply_multitwist(c, n)).to_dict()
                b = twist_limit(c).to_dict()
                assert a == b


class TestClassWords:
    def test_word_lengths_even(self):
        for name in NAMED_CURVES:
            words = class_words(curve_from_name(name))
            assert len(words) == 1

    def test_word_twist_changes_class(self):
        def cyc_variants(w):
            out = set()
            for c in (tuple(w), tuple(-x for x in reversed(w))):
                for r in range(max(len(c), 1)):
                    out.add(c[r:] + c[:r])
            return out

        w0 = class_words(ETA)[0]
        w1 = class_words(apply_multitwist(ETA, 1))[0]
        assert tuple(w1) not in cyc_variants(w0)
