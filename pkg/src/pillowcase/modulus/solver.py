"""Extremal length on meshes by cutting planes over homotopy classes.

The discrete extremal length of a family of cycles is 1/area of the
optimal vertex density; admissible cycles are generated on demand by the
cover oracle and accumulated as linear constraints.  Values computed at
a ladder of refinement levels are extrapolated in the mesh spacing, and
the reported error bar combines the extrapolation residual with the last
refinement increment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse.csgraph import dijkstra

from ..curves import NormalCurve, WeightedMulticurve, class_words, curve_from_name
from ..errors import IterationBudgetExceeded, ToleranceNotMet
from .cover import (AbelianClass, CoverGraph, FreeHomotopyClass, build_cover,
                    invert_word, shortest_cycle, shortest_cycles)
from .mesh import (MeshGraph, build_pillowcase_mesh, build_rectangle_mesh,
                   build_torus_mesh)
from .qp import ConstraintRows, solve_qp, solve_qp_fista


@dataclass
class SolverOptions:
    """Tunable knobs for the extremal-length solver."""

    levels: Tuple[int, int] = (3, 5)
    radius: int = 4
    slack: int = 1
    k_clamp: int = 1
    oracle_tol: float = 1e-3
    inner_tol: float = 1e-4
    final_inner_tol: float = 3e-8
    max_rounds: int = 2000
    max_constraints: int = 120000
    batch: int = 96
    max_exact: int = 4096
    widen_check: bool = True
    split_tol: float = 1e-3  # golden-section tolerance for weighted classes
    split: Optional[float] = None  # fixed length split for weighted classes
    verbose: bool = False

    def replace(self, **kw) -> "SolverOptions":
        d = self.__dict__.copy()
        d.update(kw)
        return SolverOptions(**d)


@dataclass
class SolverReport:
    """Result of a multilevel extremal-length computation."""

    value: float
    error: float
    levels: List[int]
    values: List[float]
    order: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def interval(self) -> Tuple[float, float]:
        return (self.value - self.error, self.value + self.error)


# ---------------------------------------------------------------------------
# Target normalization
# ---------------------------------------------------------------------------

Target = Union[str, NormalCurve, WeightedMulticurve,
               Sequence[Tuple[Fraction, Union[str, NormalCurve]]]]


def _as_terms(target: Target) -> List[Tuple[Fraction, NormalCurve]]:
    if isinstance(target, str):
        return [(Fraction(1), curve_from_name(target))]
    if isinstance(target, NormalCurve):
        return [(Fraction(1), target)]
    if isinstance(target, WeightedMulticurve):
        return [(Fraction(c), g) for (c, g) in target.terms]
    out = []
    for (c, g) in target:
        out.append((Fraction(c), curve_from_name(g) if isinstance(g, str) else g))
    return out


def _class_word(curve: NormalCurve) -> Tuple[int, ...]:
    words = class_words(curve)
    if len(words) != 1:
        raise ValueError("target curve must be connected")
    return tuple(words[0])


# ---------------------------------------------------------------------------
# Cutting-plane core
# ---------------------------------------------------------------------------


def _edge_weights(mesh: MeshGraph, nu: np.ndarray) -> np.ndarray:
    return mesh.lengths * 0.5 * (nu[mesh.tails] + nu[mesh.heads])


def _cycle_row(mesh: MeshGraph, base_edges: np.ndarray):
    le = mesh.lengths[base_edges]
    idx = np.concatenate([mesh.tails[base_edges], mesh.heads[base_edges]])
    val = np.concatenate([le, le]) * 0.5
    return idx, val


def _seed_rows(mesh: MeshGraph, word, rows: ConstraintRows, target: float) -> None:
    """Add the horizontal grid circles lying in an alpha/beta type class."""
    letters = {abs(x) for x in word}
    if mesh.kind != "pillowcase" or len(word) != 1 or letters - {1, 2}:
        return
    W = mesh.meta["W"]
    order = mesh.meta["order"]
    h = float(mesh.h)
    js = range(-W + 1, 0) if 1 in letters else range(1, W)
    for j in js:
        ids = order[np.arange(W), j + W]
        if (ids < 0).any():
            continue
        rows.add(ids, np.full(W, h), target)


def cutting_plane(mesh: MeshGraph, classes, targets: Sequence[float],
                  opts: SolverOptions, pools=None, harvest=None):
    """Optimize the density against cycle constraints in the given classes.

    ``classes`` is a list of class automata; ``targets`` the per-class
    length thresholds.  ``pools`` optionally carries (and accumulates)
    previously generated cycle rows per class, keyed by class position,
    so repeated solves with different targets reuse oracle work.  When
    ``harvest`` is a list, the mesh cycles supporting the optimum are
    appended to it as (class index, base edge array) pairs, usable to
    warm-start a refined mesh.  Returns (area, nu, rows, diagnostics).
    """
    rows = ConstraintRows(mesh.n_vertices)
    covers = [build_cover(mesh, c) for c in classes]
    if pools is None:
        pools = [[] for _ in classes]
    row_cycles: List[Optional[Tuple[int, np.ndarray]]] = []
    for ci, (cls, tgt) in enumerate(zip(classes, targets)):
        if hasattr(cls, "word"):
            _seed_rows(mesh, cls.word, rows, tgt)
        for (idx, val) in pools[ci]:
            rows.add(idx, val, tgt)
    row_cycles.extend([None] * len(rows))

    nu = np.zeros(mesh.n_vertices)
    lam = np.zeros(0)
    area = dual = 0.0
    widened = False
    tight = False
    rounds = 0
    # Best certified lower-bound factor over all rounds: any density with
    # shortest cycle length >= r * target proves value >= r^2 / area, so
    # the run may stop once this meets the dual upper bound, without
    # driving the oracle all the way to a clean sweep.
    best_cert = 0.0
    width_goal = 1.0 - 2.5 * opts.oracle_tol
    # Ramped oracle cutoffs keep early Dijkstra balls small; a class is
    # clean only once no short cycle exists below its full threshold.
    ramp = [0.4 * t for t in targets]
    while rounds < opts.max_rounds:
        rounds += 1
        if opts.verbose:
            import sys
            import time as _time
            _t0 = _time.time()
        if len(rows):
            tol = opts.final_inner_tol if tight else opts.inner_tol
            nu, lam, area, dual = solve_qp_fista(mesh.mu, rows, lam=lam,
                                                 tol=tol)
        weights = _edge_weights(mesh, nu)
        if opts.verbose:
            print(f"    [round {rounds}] rows={len(rows)} area={area:.6f} "
                  f"dual={dual:.6f} cert={best_cert * dual:.6f} "
                  f"tight={tight} solve={_time.time() - _t0:.2f}s "
                  f"t={_time.strftime('%H:%M:%S')}",
                  file=sys.stderr, flush=True)
        clean = True
        r_min = math.inf
        for ci, (cover, tgt) in enumerate(zip(covers, targets)):
            final = tgt * (1.0 - opts.oracle_tol)
            cutoff = min(final, ramp[ci])
            found, complete, length_bound = shortest_cycles(
                mesh, cover, weights, cutoff=cutoff,
                max_exact=opts.max_exact, max_results=opts.batch)
            r_min = min(r_min, length_bound / tgt)
            if not found:
                if not complete or cutoff < final:
                    ramp[ci] = min(final, 1.8 * ramp[ci])
                    clean = False
                continue
            if len(found) < opts.batch // 2:
                ramp[ci] = min(final, 1.3 * ramp[ci])
            for res in found:
                idx, val = _cycle_row(mesh, res.base_edges)
                pools[ci].append((idx, val))
                if rows.add(idx, val, tgt):
                    row_cycles.append((ci, res.base_edges))
                    clean = False
        if area > 0.0 and math.isfinite(r_min):
            best_cert = max(best_cert, r_min * r_min / area)
        if len(rows) > opts.max_constraints:
            raise IterationBudgetExceeded("constraint budget exhausted")
        if clean or (dual > 0.0 and best_cert * dual >= width_goal):
            if not tight:
                # Certify against a sharply solved density before accepting.
                tight = True
                continue
            if opts.widen_check and not widened:
                widened = True
                wide = [c.widened() for c in classes]
                covers = [build_cover(mesh, c) for c in wide]
                classes = wide
                # Bounds established on the narrow automaton do not carry
                # over; they must be re-certified on the widened class.
                best_cert = 0.0
                continue
            if clean:
                best_cert = max(best_cert,
                                (1.0 - opts.oracle_tol) ** 2 / area)
            if not clean and best_cert * dual < width_goal:
                continue
            n_active = int((lam > 1e-9 * max(lam.max(), 1e-30)).sum())
            if harvest is not None:
                thr = 1e-9 * max(lam.max(), 1e-30)
                for ri, rc in enumerate(row_cycles):
                    if rc is not None and lam[ri] > thr:
                        harvest.append(rc)
            diag = {"rounds": rounds, "n_rows": len(rows),
                    "n_active": n_active, "area_dual": dual,
                    "cert_factor": best_cert}
            return area, nu, rows, diag
    raise IterationBudgetExceeded(
        f"cutting plane did not certify within {opts.max_rounds} rounds")


def _refine_cycles(coarse: MeshGraph, fine: MeshGraph, cycles):
    """Re-express coarse-mesh cycles as rows on the once-refined mesh.

    Each coarse edge is split at its stored midpoint, which is a vertex
    of the refined mesh; the rows describe the same geometric curves and
    are therefore valid constraints there.  Rows touching a removed
    puncture vertex are dropped.
    """
    hc = float(coarse.h)
    WF = fine.meta["W"]
    orderF = fine.meta["order"]
    ci = np.round(coarse.xs / hc).astype(np.int64)
    cj = np.round(coarse.ys / hc).astype(np.int64)
    out = []
    for be in cycles:
        u, v = coarse.tails[be], coarse.heads[be]
        idu = orderF[2 * ci[u], 2 * cj[u] + WF]
        idv = orderF[2 * ci[v], 2 * cj[v] + WF]
        idm = orderF[coarse.mid_i[be], coarse.mid_j[be] + WF]
        if min(idu.min(), idv.min(), idm.min()) < 0:
            continue
        le = coarse.lengths[be]
        idx = np.concatenate([idu, idv, idm])
        val = np.concatenate([le / 4, le / 4, le / 2])
        out.append((idx, val))
    return out


# ---------------------------------------------------------------------------
# Richardson extrapolation
# ---------------------------------------------------------------------------


def _extrapolate(values: List[float]) -> Tuple[float, float, float]:
    """Extrapolated value, error bar and estimated order from level values."""
    if len(values) == 1:
        v = values[0]
        return v, 0.25 * abs(v) + 1e-12, 1.0
    if len(values) == 2:
        d = values[1] - values[0]
        return values[1] + d, 2 * abs(d) + 1e-12, 1.0
    v1, v2, v3 = values[-3], values[-2], values[-1]
    d1, d2 = v2 - v1, v3 - v2
    if d2 == 0.0 or d1 * d2 <= 0.0:
        # Non-monotone tail: do not extrapolate beyond the last value.
        err = max(abs(d2), 0.25 * abs(d1)) + 1e-12
        return v3, err, 1.0
    p = math.log2(abs(d1 / d2))
    p = min(2.0, max(0.5, p))
    q = 2.0 ** p - 1.0
    vinf = v3 + d2 / q
    err = max(abs(vinf - v3) * 0.5, 0.25 * abs(d2)) + 1e-12
    return vinf, err, p


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------


def discrete_extremal_length(mesh: MeshGraph, target: Target,
                             opts: Optional[SolverOptions] = None,
                             warm_pools=None, harvest=None):
    """Single-level extremal length of a (possibly weighted) class."""
    opts = opts or SolverOptions()
    terms = _as_terms(target)
    classes = [FreeHomotopyClass(_class_word(g), slack=opts.slack,
                                 k_clamp=opts.k_clamp) for _, g in terms]
    coefs = [float(c) for c, _ in terms]
    pools = [list(p) for p in warm_pools] if warm_pools else \
        [[] for _ in terms]
    if len(terms) == 1:
        area, nu, rows, diag = cutting_plane(mesh, classes, [1.0], opts,
                                             pools=pools, harvest=harvest)
        lo = coefs[0] ** 2 * diag["cert_factor"]
        hi = coefs[0] ** 2 / diag["area_dual"]
        diag["bounds"] = (lo, hi)
        return 0.5 * (lo + hi), nu, diag
    if len(terms) != 2:
        raise ValueError("weighted targets support at most two classes")

    cache: Dict[float, Tuple[float, np.ndarray, dict]] = {}

    def ratio(t: float, harvest_out=None):
        if t not in cache:
            area, nu, rows, diag = cutting_plane(
                mesh, classes, [t, 1.0 - t], opts, pools=pools,
                harvest=harvest_out)
            base = (coefs[0] * t + coefs[1] * (1.0 - t)) ** 2
            lo = base * diag["cert_factor"]
            hi = base / diag["area_dual"]
            diag["bounds"] = (lo, hi)
            cache[t] = (0.5 * (lo + hi), nu, diag)
        return cache[t]

    if opts.split is not None:
        # Caller-asserted optimal split (e.g. t = 1/2 when an isometry
        # of the surface exchanges the two classes).
        t_best = float(opts.split)
        ratio(t_best)
    else:
        # Golden-section maximization of the scale-invariant ratio over
        # the split of normalized lengths between the two classes.
        gr = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = 0.02, 0.98
        c, d = b - gr * (b - a), a + gr * (b - a)
        while b - a > opts.split_tol:
            if ratio(c)[0] >= ratio(d)[0]:
                b, d = d, c
                c = b - gr * (b - a)
            else:
                a, c = c, d
                d = a + gr * (b - a)
        t_best = max(cache, key=lambda t: cache[t][0])
    if harvest is not None:
        del cache[t_best]
        ratio(t_best, harvest_out=harvest)
    val, nu, diag = cache[t_best]
    diag = dict(diag)
    diag["split"] = t_best
    return val, nu, diag


def extremal_length(s: Fraction, target: Target,
                    opts: Optional[SolverOptions] = None) -> SolverReport:
    """Extremal length of a curve class on the pillowcase at shear s."""
    opts = opts or SolverOptions()
    lo, hi = opts.levels
    levels = list(range(lo, hi + 1))
    values = []
    diags = []
    n_terms = len(_as_terms(target))
    prev_mesh = None
    prev_harvest: List[Tuple[int, np.ndarray]] = []
    for level in levels:
        mesh = build_pillowcase_mesh(Fraction(s), level, radius=opts.radius)
        warm = None
        if prev_mesh is not None and prev_harvest:
            warm = [[] for _ in range(n_terms)]
            by_class: Dict[int, list] = {}
            for (ci, be) in prev_harvest:
                by_class.setdefault(ci, []).append(be)
            for ci, cycs in by_class.items():
                warm[ci] = _refine_cycles(prev_mesh, mesh, cycs)
        harvest: List[Tuple[int, np.ndarray]] = []
        val, _, diag = discrete_extremal_length(mesh, target, opts,
                                                warm_pools=warm,
                                                harvest=harvest)
        values.append(val)
        diags.append(diag)
        prev_mesh, prev_harvest = mesh, harvest
    vinf, err, p = _extrapolate(values)
    lo, hi = diags[-1].get("bounds", (values[-1], values[-1]))
    err = max(err, 0.5 * (hi - lo))
    return SolverReport(value=vinf, error=err, levels=levels, values=values,
                        order=p, diagnostics={"per_level": diags,
                                              "shear": Fraction(s)})


def extremal_density_field(s: Fraction, target: Target, level: int,
                           opts: Optional[SolverOptions] = None):
    """Optimal density by vertex at one level: arrays (x, y, rho)."""
    opts = opts or SolverOptions()
    mesh = build_pillowcase_mesh(Fraction(s), level, radius=opts.radius)
    _, nu, _ = discrete_extremal_length(mesh, target, opts)
    return mesh.xs, mesh.ys, nu


# ---------------------------------------------------------------------------
# Fixtures: rectangle crossing family and torus winding family
# ---------------------------------------------------------------------------


def rectangle_crossing_length(a, b, level: int,
                              opts: Optional[SolverOptions] = None) -> float:
    """Extremal length of left-right crossings of the a x b rectangle."""
    opts = opts or SolverOptions()
    mesh = build_rectangle_mesh(Fraction(a), Fraction(b), level,
                                radius=opts.radius)
    left = np.asarray(mesh.meta["left"])
    right = set(mesh.meta["right"])
    right_arr = np.asarray(mesh.meta["right"])

    pair_edge: Dict[Tuple[int, int], int] = {}
    for e in range(mesh.n_edges):
        key = (int(mesh.tails[e]), int(mesh.heads[e]))
        if key not in pair_edge or mesh.lengths[e] < mesh.lengths[pair_edge[key]]:
            pair_edge[key] = e
        key2 = (key[1], key[0])
        if key2 not in pair_edge or mesh.lengths[e] < mesh.lengths[pair_edge[key2]]:
            pair_edge[key2] = e

    rows = ConstraintRows(mesh.n_vertices)
    # Seed with the horizontal grid lines.
    nxp = int(Fraction(a) / mesh.h) + 1
    order = np.arange(mesh.n_vertices).reshape(nxp, -1)
    for j in range(order.shape[1]):
        ids = order[:, j]
        w = np.full(nxp, float(mesh.h))
        w[0] = w[-1] = float(mesh.h) / 2
        rows.add(ids, w, 1.0)

    nu = np.zeros(mesh.n_vertices)
    active: List[int] = []
    area = 0.0
    for _ in range(opts.max_rounds):
        nu, lam, active, area = solve_qp(mesh.mu, rows, active=active)
        weights = _edge_weights(mesh, nu)
        graph = mesh.adjacency(weights)
        dist, pred, src = dijkstra(graph, directed=False, indices=left,
                                   min_only=True, return_predecessors=True)
        best = int(right_arr[np.argmin(dist[right_arr])])
        if dist[best] >= 1.0 - opts.oracle_tol:
            return 1.0 / area
        path = [best]
        while pred[path[-1]] >= 0:
            path.append(int(pred[path[-1]]))
        edges = [pair_edge[(path[i], path[i + 1])] for i in range(len(path) - 1)]
        idx, val = _cycle_row(mesh, np.asarray(edges, dtype=np.int64))
        if not rows.add(idx, val, 1.0):
            raise IterationBudgetExceeded("rectangle oracle stalled")
    raise IterationBudgetExceeded("rectangle cutting plane did not converge")


def torus_winding_length(wu: int, hu: int, winding: Tuple[int, int],
                         level: int,
                         opts: Optional[SolverOptions] = None) -> float:
    """Extremal length of the (p, q) winding family on a flat torus."""
    opts = opts or SolverOptions()
    mesh = build_torus_mesh(wu, hu, level, radius=opts.radius)
    cls = AbelianClass(list(winding), slack=opts.slack)
    # Seed with the axis-parallel grid lines when the winding is primitive
    # along an axis; they are honest members of the family.
    h = float(mesh.h)
    nx, ny = round(wu / h), round(hu / h)
    order = np.arange(nx * ny).reshape(nx, ny)
    seeds = []
    if tuple(winding) == (1, 0):
        for j in range(ny):
            seeds.append((order[:, j].copy(), np.full(nx, h)))
    elif tuple(winding) == (0, 1):
        for i in range(nx):
            seeds.append((order[i, :].copy(), np.full(ny, h)))
    area, nu, rows, diag = cutting_plane(mesh, [cls], [1.0], opts,
                                         pools=[seeds])
    return 1.0 / area
