"""End-to-end numerical acceptance checks, one test per criterion.

These tests exercise the full pipeline (mesh, oracle, cutting plane,
extrapolation, certificates) against known closed forms, the anchor value
of Ext(alpha) on the unsheared surface, and the structural identities of
the shear family. They are slow by nature; the session-scoped evaluator
shares solver runs across tests.
"""

import math
from fractions import Fraction

import pytest

from pillowcase.cli import main as cli_main
from pillowcase.curves import (NAMED_CURVES, apply_multitwist,
                               curve_from_name, intersection_number,
                               ivanov_bounds, twist_limit)
from pillowcase.flatcurves import (named_polyline, oracle_flat_intersection,
                                   shear_polyline)
from pillowcase.gm import ExtremalEvaluator, divergence_certificate
from pillowcase.modulus import (SolverOptions, extremal_length,
                                rectangle_crossing_length,
                                torus_winding_length)

ANCHOR = 0.8196442
MAIN_LEVELS = (2, 4)       # shared ladder for the identity suites
ANCHOR_LEVELS = (3, 5)     # deeper ladder for the anchor criterion


@pytest.fixture(scope="session")
def ev():
    return ExtremalEvaluator(SolverOptions(levels=MAIN_LEVELS))


def combined(a, b):
    return a.error + b.error


class TestCriterion01Rectangle:
    """Rectangle crossing family equals a/b at level >= 5."""

    @pytest.mark.parametrize("a,b,expect", [
        (1, 1, 1.0), (2, 1, 2.0), (3, 5, 0.6)])
    def test_rectangle(self, a, b, expect):
        got = rectangle_crossing_length(a, b, level=5)
        assert abs(got - expect) <= 1e-3


class TestCriterion02Torus:
    """Horizontal family of the 3x5 torus equals 3/5 within 1%."""

    def test_torus(self):
        got = torus_winding_length(3, 5, (1, 0), level=4)
        assert abs(got - 0.6) <= 0.006


class TestCriterion03Anchor:
    """Extrapolated Ext(alpha, X_0) hits the anchor within 5e-3."""

    def test_anchor(self):
        rep = extremal_length(Fraction(0), "alpha",
                              SolverOptions(levels=ANCHOR_LEVELS))
        assert abs(rep.value - ANCHOR) <= 5e-3, \
            f"got {rep.value} +- {rep.error}, levels {rep.values}"


class TestCriterion04Horosphere:
    """Ext(alpha+beta, X_s) = 2 within 0.02 along the shear family."""

    @pytest.mark.parametrize("s", [Fraction(0), Fraction(1, 8),
                                   Fraction(1, 4), Fraction(1, 2)])
    def test_constant_two(self, ev, s):
        iv = ev.ext(s, [(1, "alpha"), (1, "beta")])
        assert abs(iv.value - 2.0) <= 0.02, f"s={s}: {iv.value}+-{iv.error}"


class TestCriterion05StrictMaximum:
    """Ext(alpha) is strictly larger at s=0 than at s in {1/8, 1/4}."""

    @pytest.mark.parametrize("s", [Fraction(1, 8), Fraction(1, 4)])
    def test_gap_exceeds_radii(self, ev, s):
        at0 = ev.ext(Fraction(0), "alpha")
        ats = ev.ext(s, "alpha")
        gap = at0.value - ats.value
        assert gap > combined(at0, ats), \
            f"s={s}: gap {gap} vs radii {combined(at0, ats)}"


class TestCriterion06Symmetries:
    """Evenness in s, periodicity s -> s+1, and alpha/beta symmetry."""

    @pytest.mark.parametrize("s", [Fraction(1, 8), Fraction(1, 4),
                                   Fraction(1, 2)])
    def test_even_in_s(self, ev, s):
        a, b = ev.ext(s, "alpha"), ev.ext(-s, "alpha")
        assert abs(a.value - b.value) <= 2 * combined(a, b)

    @pytest.mark.parametrize("s", [Fraction(1, 4), Fraction(1, 2)])
    def test_periodic_in_s(self, ev, s):
        a, b = ev.ext(s, "alpha"), ev.ext(s + 1, "alpha")
        assert abs(a.value - b.value) <= 2 * combined(a, b)

    @pytest.mark.parametrize("s", [Fraction(0), Fraction(1, 4)])
    def test_alpha_beta_symmetry(self, ev, s):
        a, b = ev.ext(s, "alpha"), ev.ext(s, "beta")
        assert abs(a.value - b.value) <= 2 * combined(a, b)


class TestCriterion07Intersections:
    """Pinned intersection numbers and flat-oracle agreement."""

    PINNED = [("alpha", "beta", 0), ("eta", "alpha", 2), ("eta", "beta", 0),
              ("nu", "alpha", 2), ("nu", "beta", 2)]

    @pytest.mark.parametrize("g,d,expect", PINNED)
    def test_pinned_values(self, g, d, expect):
        assert intersection_number(curve_from_name(g),
                                   curve_from_name(d)) == expect

    def test_flat_oracle_agreement(self):
        # Pairs over {alpha, beta, eta, nu, phi eta, phi^2 eta, phi nu}.
        specs = [("alpha", 0), ("beta", 0), ("eta", 0), ("nu", 0),
                 ("eta", 1), ("eta", 2), ("nu", 1)]
        combinatorial = [apply_multitwist(curve_from_name(n), k)
                         for n, k in specs]
        flat = [shear_polyline(named_polyline(n), k) for n, k in specs]
        for i in range(len(specs)):
            for j in range(len(specs)):
                want = intersection_number(combinatorial[i], combinatorial[j])
                got = oracle_flat_intersection(flat[i], flat[j])
                assert got == want, f"{specs[i]} x {specs[j]}"


class TestCriterion08Ivanov:
    """Two-sided twist bounds and the 1/n convergence rate."""

    NAMES = ("alpha", "beta", "eta", "nu")

    def test_sandwich_and_rate(self):
        alpha = curve_from_name("alpha")
        beta = curve_from_name("beta")
        for gname in self.NAMES:
            for dname in self.NAMES:
                g, d = curve_from_name(gname), curve_from_name(dname)
                limit = sum(intersection_number(g, a) *
                            intersection_number(a, d)
                            for a in (alpha, beta))
                rate_num = 2 * limit + 2 * intersection_number(g, d)
                for n in range(1, 11):
                    lo, hi = ivanov_bounds(g, d, n)
                    actual = intersection_number(apply_multitwist(g, n), d)
                    assert lo <= actual <= hi, (gname, dname, n)
                    assert abs(Fraction(actual, n) - limit) * n <= rate_num, \
                        (gname, dname, n)


class TestCriterion09MarkingEquivariance:
    """Ext(eta, X_{s+n}) = Ext(phi^n eta, X_s)."""

    @pytest.mark.parametrize("s,n", [(Fraction(0), 1),
                                     (Fraction(1, 4), 1),
                                     (Fraction(0), 2)])
    def test_equivariance(self, ev, s, n):
        marked = ev.ext(s + n, "eta")
        twisted = ev.ext(s, apply_multitwist(curve_from_name("eta"), n))
        assert abs(marked.value - twisted.value) <= combined(marked, twisted), \
            f"(s,n)=({s},{n}): {marked.value}+-{marked.error} vs " \
            f"{twisted.value}+-{twisted.error}"


class TestCriterion10TwistLimit:
    """n^-2 Ext(phi^n eta, X_0) approaches 4 Ext(alpha, X_0)."""

    def test_convergence_with_shrinking_residuals(self, ev):
        eta = curve_from_name("eta")
        limit = 4.0 * ev.ext(Fraction(0), "alpha").value
        residuals = []
        for n in range(1, 7):
            val = ev.ext(Fraction(0), apply_multitwist(eta, n))
            residuals.append(abs(val.value / n ** 2 - limit))
        assert residuals[-1] <= 0.10 * limit, residuals
        for a, b in zip(residuals, residuals[1:]):
            assert b <= a + 1e-9, residuals


class TestCriterion11Certificate:
    """Distinct limits for (0, 1/4); indistinguishable for (0, 1)."""

    def test_distinct_pair(self, ev):
        cert = divergence_certificate(0, Fraction(1, 4), ("eta", "nu"), ev)
        assert cert.verdict == "distinct"
        assert cert.distance_lower_bound > 0

    def test_periodic_pair(self, ev):
        cert = divergence_certificate(0, 1, ("eta", "nu"), ev)
        assert cert.verdict == "indistinguishable"

    def test_cli_exit_codes(self, tmp_path):
        lo, hi = MAIN_LEVELS
        base = ["certificate", "--level-min", str(lo),
                "--level-max", str(hi)]
        import io
        assert cli_main(base + ["--s-pair", "0,1/4"],
                        stdout=io.StringIO()) == 0
        assert cli_main(base + ["--s-pair", "0,1"],
                        stdout=io.StringIO()) == 2
