"""Tests for interval propagation, projective vectors and certificates."""

import json
import math
from fractions import Fraction

import pytest

from pillowcase.curves import curve_from_name
from pillowcase.errors import AllEntriesZero, WitnessMismatch
from pillowcase.gm import (Certificate, ExtremalEvaluator, Interval,
                           ProjectiveVector, divergence_certificate,
                           gm_limit_vector, kerckhoff_lower_bound,
                           projective_distance)
from pillowcase.modulus import SolverOptions


class StubEvaluator:
    """Evaluator returning canned intervals, keyed by shear only."""

    def __init__(self, table, error=0.0):
        self.table = table          # {s: {witness-ish key: value}}
        self.error = error
        self.opts = SolverOptions()
        self.calls = []

    def ext(self, s, target):
        s = Fraction(s)
        key = self._key(target)
        self.calls.append((s, key))
        return Interval(self.table[s][key], self.error)

    @staticmethod
    def _key(target):
        if isinstance(target, str):
            return target
        # Weighted lists arise from twist limits: reduce to the weight
        # pair (a, b) on (alpha, beta).
        a = b = Fraction(0)
        for c, g in target:
            if g == curve_from_name("alpha"):
                a = Fraction(c)
            else:
                b = Fraction(c)
        return (a, b)


class TestInterval:
    def test_bounds(self):
        iv = Interval(2.0, 0.5)
        assert (iv.lo, iv.hi) == (1.5, 2.5)

    def test_sqrt_encloses(self):
        iv = Interval(4.0, 0.4).sqrt()
        assert iv.lo <= math.sqrt(3.6) + 1e-12
        assert iv.hi >= math.sqrt(4.4) - 1e-12

    def test_exact_zero_is_structural(self):
        assert Interval(0.0, 0.0).is_exact_zero()
        assert not Interval(0.0, 1e-9).is_exact_zero()
        assert not Interval(1e-300, 0.0).is_exact_zero()

    def test_scalar_multiplication(self):
        iv = Interval(3.0, 0.1) * 2.0
        assert (iv.value, iv.error) == (6.0, 0.2)


class TestProjectiveVector:
    def test_distance_is_projective(self):
        v = ProjectiveVector({"a": Interval(1.0), "b": Interval(4.0)}, "b")
        w = ProjectiveVector({"a": Interval(3.0), "b": Interval(12.0)}, "b")
        assert projective_distance(v, w) == pytest.approx(0.0, abs=1e-12)

    def test_distance_symmetric(self):
        v = ProjectiveVector({"a": Interval(1.0), "b": Interval(4.0)}, "b")
        w = ProjectiveVector({"a": Interval(2.0), "b": Interval(4.0)}, "b")
        assert projective_distance(v, w) == pytest.approx(
            projective_distance(w, v))
        assert projective_distance(v, w) == pytest.approx(math.log(2.0))

    def test_witness_mismatch_raises(self):
        v = ProjectiveVector({"a": Interval(1.0)}, "a")
        w = ProjectiveVector({"b": Interval(1.0)}, "b")
        with pytest.raises(WitnessMismatch):
            projective_distance(v, w)

    def test_zero_support_mismatch_is_infinite(self):
        v = ProjectiveVector({"a": Interval(0.0), "b": Interval(1.0)}, "b")
        w = ProjectiveVector({"a": Interval(1.0), "b": Interval(1.0)}, "b")
        assert projective_distance(v, w) == math.inf

    def test_all_zero_rejected(self):
        with pytest.raises(AllEntriesZero):
            ProjectiveVector({"a": Interval(0.0)}, "a")


class TestLimitVector:
    HALF = (Fraction(1, 2), Fraction(1, 2))   # normalized nu limit
    FULL = (Fraction(1), Fraction(0))         # normalized eta limit

    def test_alpha_beta_entries_are_exact_zero(self):
        # Twist-invariant curves have zero intersection with both core
        # curves, so their limit entries vanish structurally.
        ev = StubEvaluator({Fraction(0): {self.HALF: 0.125}})
        v = gm_limit_vector(0, ("alpha", "beta", "nu"), ev)
        assert v.entries["alpha"].is_exact_zero()
        assert v.entries["beta"].is_exact_zero()
        assert v.entries["nu"].value > 0

    def test_proportional_limits_share_one_solver_run(self):
        table = {Fraction(0): {self.FULL: 0.8, self.HALF: 0.125}}
        ev = StubEvaluator(table)
        v = gm_limit_vector(0, ("eta", "nu"), ev)
        # eta limit is 2*alpha, nu limit is 2*alpha + 2*beta: two calls.
        assert len(ev.calls) == 2
        # Degree-2 homogeneity: Ext(2a) = 4 Ext(a), so the eta entry is
        # 2 sqrt(Ext(alpha)) and the nu entry 4 sqrt(Ext(a/2 + b/2)).
        assert v.entries["eta"].value == pytest.approx(2 * math.sqrt(0.8))
        assert v.entries["nu"].value == pytest.approx(4 * math.sqrt(0.125))


class TestCertificate:
    def _cert(self, e0, e1, err):
        full = (Fraction(1), Fraction(0))
        half = (Fraction(1, 2), Fraction(1, 2))
        table = {
            Fraction(0): {full: e0, half: 0.125},
            Fraction(1, 4): {full: e1, half: 0.125},
        }
        return divergence_certificate(0, Fraction(1, 4), ("eta", "nu"),
                                      StubEvaluator(table, error=err))

    def test_distinct_on_disjoint_intervals(self):
        cert = self._cert(0.82, 0.70, err=0.001)
        assert cert.verdict == "distinct"
        assert cert.distance_lower_bound > 0

    def test_indistinguishable_on_overlap(self):
        cert = self._cert(0.82, 0.81, err=0.2)
        assert cert.verdict == "indistinguishable"
        assert cert.distance_lower_bound == 0.0

    def test_distinct_requires_positive_bound(self):
        with pytest.raises(ValueError):
            Certificate((Fraction(0), Fraction(1)), ("nu",),
                        (None, None), 0.0, "distinct")

    def test_json_round_trip_with_stable_keys(self):
        cert = self._cert(0.82, 0.70, err=0.001)
        doc = json.loads(cert.to_json())
        assert doc["verdict"] == "distinct"
        assert list(doc) == sorted(doc)
        assert doc["budget"]["version"]


class TestKerckhoff:
    def test_lower_bound_from_witness_ratio(self):
        table = {Fraction(0): {"alpha": 0.8, "beta": 0.8},
                 Fraction(1, 2): {"alpha": 0.4, "beta": 0.8}}
        ev = StubEvaluator(table)
        got = kerckhoff_lower_bound(0, Fraction(1, 2), ("alpha", "beta"), ev)
        assert got == pytest.approx(0.5 * math.log(2.0))

    def test_identical_surfaces_give_zero(self):
        table = {Fraction(0): {"alpha": 0.8}}
        ev = StubEvaluator(table)
        assert kerckhoff_lower_bound(0, 0, ("alpha",), ev) == 0.0


class TestEvaluatorCache:
    def test_reports_are_memoized(self, monkeypatch):
        calls = []

        def fake(s, target, opts):
            calls.append((s, target))

            class R:
                value, error = 1.0, 0.1
            return R()

        monkeypatch.setattr("pillowcase.gm.extremal_length", fake)
        ev = ExtremalEvaluator()
        ev.ext(0, "alpha")
        ev.ext(Fraction(0), "alpha")
        assert len(calls) == 1
