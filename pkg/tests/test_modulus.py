"""Tests for meshes, the cycle oracle, the QP solvers and fixtures."""

from fractions import Fraction

import numpy as np
import pytest

from pillowcase.errors import ShearIncommensurate
from pillowcase.modulus import (ConstraintRows, SolverOptions,
                                build_pillowcase_mesh, build_torus_mesh,
                                rectangle_crossing_length, solve_qp,
                                torus_winding_length)
from pillowcase.modulus.qp import solve_qp_fista


# ---------------------------------------------------------------------------
# Meshes
# ---------------------------------------------------------------------------


class TestPillowcaseMesh:
    @pytest.mark.parametrize("s", [Fraction(0), Fraction(1, 4)])
    def test_area_is_two_minus_puncture_cells(self, s):
        # Removing the five puncture vertices deletes O(h^2) of mass.
        mesh = build_pillowcase_mesh(s, 3)
        h = float(mesh.h)
        assert 2.0 - 10 * h * h <= mesh.mu.sum() < 2.0

    def test_incommensurate_shear_rejected(self):
        with pytest.raises(ShearIncommensurate):
            build_pillowcase_mesh(Fraction(1, 3), 2)

    def test_punctures_removed(self):
        mesh = build_pillowcase_mesh(Fraction(0), 2)
        for (px, py) in [(0.0, 0.0), (0.0, 1.0), (0.0, -1.0),
                         (0.5, 1.0), (0.5, -1.0)]:
            d = np.hypot(mesh.xs - px, mesh.ys - py)
            assert d.min() > 1e-9

    def test_edge_midpoints_land_on_refined_vertices(self):
        # Folded midpoints, stored in half-spacing units, must coincide
        # with actual vertex positions of the once-refined mesh, except
        # on the fold lines y = +-1 where identified index pairs share a
        # single canonical coordinate.
        for s in (Fraction(0), Fraction(1, 4)):
            coarse = build_pillowcase_mesh(s, 2)
            fine = build_pillowcase_mesh(s, 3)
            W = fine.meta["W"]
            ids = fine.meta["order"][coarse.mid_i, coarse.mid_j + W]
            ok = ids >= 0
            h = float(fine.h)
            dy = np.abs(fine.ys[ids[ok]] - coarse.mid_j[ok] * h)
            assert dy.max() < 1e-12
            dx = np.abs(fine.xs[ids[ok]] - coarse.mid_i[ok] * h) % 1.0
            dx = np.minimum(dx, 1.0 - dx)
            interior = np.abs(coarse.mid_j[ok]) < W
            assert dx[interior].max() < 1e-12


class TestTorusMesh:
    def test_area(self):
        mesh = build_torus_mesh(3, 5, 2)
        assert mesh.mu.sum() == pytest.approx(15.0, abs=1e-9)


# ---------------------------------------------------------------------------
# QP solvers
# ---------------------------------------------------------------------------


def _random_problem(seed, n=40, m=25):
    rng = np.random.default_rng(seed)
    mu = rng.uniform(0.5, 2.0, n)
    rows = ConstraintRows(n)
    for _ in range(m):
        k = int(rng.integers(3, 8))
        idx = rng.choice(n, size=k, replace=False)
        val = rng.uniform(0.1, 1.0, k)
        rows.add(idx, val, float(rng.uniform(0.5, 1.5)))
    return mu, rows


class TestQP:
    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_fista_matches_active_set(self, seed):
        mu, rows = _random_problem(seed)
        _, _, _, area_exact = solve_qp(mu, rows)
        nu, lam, primal, dual = solve_qp_fista(mu, rows, tol=1e-10)
        assert dual <= area_exact + 1e-7
        assert primal >= area_exact - 1e-7
        assert primal - dual < 1e-7 * max(1.0, primal)

    def test_fista_density_is_feasible(self):
        mu, rows = _random_problem(7)
        nu, _, primal, _ = solve_qp_fista(mu, rows, tol=1e-9)
        A = rows.matrix()
        lens = A @ nu
        assert (lens >= np.asarray(rows.targets) - 1e-9).all()
        assert primal == pytest.approx(float(mu @ nu ** 2), rel=1e-12)

    def test_duality_sandwich_loose_tolerance(self):
        mu, rows = _random_problem(11)
        _, _, primal, dual = solve_qp_fista(mu, rows, tol=1e-3)
        assert dual <= primal


# ---------------------------------------------------------------------------
# Fixture families with known closed forms
# ---------------------------------------------------------------------------


class TestRectangle:
    @pytest.mark.parametrize("a,b,expect", [
        (1, 1, 1.0), (2, 1, 2.0), (3, 5, 0.6)])
    def test_crossing_family(self, a, b, expect):
        val = rectangle_crossing_length(a, b, level=4)
        assert val == pytest.approx(expect, abs=1e-3)


class TestTorusWinding:
    def test_horizontal_winding(self):
        val = torus_winding_length(3, 5, (1, 0), level=3)
        assert val == pytest.approx(3.0 / 5.0, rel=1e-2)

    def test_vertical_winding(self):
        val = torus_winding_length(3, 5, (0, 1), level=3)
        assert val == pytest.approx(5.0 / 3.0, rel=1e-2)


# ---------------------------------------------------------------------------
# Options plumbing
# ---------------------------------------------------------------------------


class TestOptions:
    def test_replace_returns_modified_copy(self):
        a = SolverOptions()
        b = a.replace(oracle_tol=0.5)
        assert b.oracle_tol == 0.5
        assert a.oracle_tol != 0.5

    def test_default_levels_in_range(self):
        lo, hi = SolverOptions().levels
        assert 2 <= lo <= hi <= 8
