"""Mesh graphs for discrete extremal-length computations.

A mesh is a weighted graph embedded in a flat surface: the square-tiled
pillowcase quotient, a flat torus, or a plane rectangle.  Vertices carry
area weights and edges carry Euclidean lengths together with the word of
signed crossings with a fixed system of disjoint arcs joining punctures.
The crossing words let the cycle oracle pin curve families to a homotopy
class exactly, while all incidence tests are done in integer arithmetic
so no crossing is ever miscounted to rounding.

Coordinates are scaled so that one mesh spacing ``h`` equals 16 integer
units; the arcs are drawn as polylines whose interior vertices sit at
offsets chosen (and checked) to avoid every lattice line used by the
edge directions, which keeps all crossing tests strict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, sqrt
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import ShearIncommensurate

SCALE = 16


def _directions(radius: int) -> List[Tuple[int, int]]:
    """Half set of coprime step directions with entries bounded by radius."""
    out = []
    for p in range(0, radius + 1):
        for q in range(-radius, radius + 1):
            if (p, q) == (0, 0) or gcd(abs(p), abs(q)) != 1:
                continue
            if p > 0 or (p == 0 and q > 0):
                out.append((p, q))
    return sorted(out)


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


@dataclass
class MeshGraph:
    """Weighted graph with arc-crossing words on each edge."""

    kind: str
    level: int
    h: Fraction
    xs: np.ndarray
    ys: np.ndarray
    mu: np.ndarray
    tails: np.ndarray
    heads: np.ndarray
    lengths: np.ndarray
    words: List[Tuple[int, ...]]
    meta: dict = field(default_factory=dict)
    # Edge midpoints in half-spacing grid units (pillowcase only); they
    # are the new vertices the edge passes through at the next level.
    mid_i: Optional[np.ndarray] = None
    mid_j: Optional[np.ndarray] = None

    @property
    def n_vertices(self) -> int:
        return len(self.mu)

    @property
    def n_edges(self) -> int:
        return len(self.tails)

    def edges_crossing(self, letter: int) -> np.ndarray:
        """Indices of edges whose word uses the given arc letter."""
        out = [i for i, w in enumerate(self.words)
               if any(abs(x) == letter for x in w)]
        return np.asarray(out, dtype=np.int64)

    def adjacency(self, weights: np.ndarray):
        """Symmetric CSR adjacency with the given edge weights."""
        from scipy.sparse import coo_matrix

        n = self.n_vertices
        rows = np.concatenate([self.tails, self.heads])
        cols = np.concatenate([self.heads, self.tails])
        data = np.concatenate([weights, weights])
        return coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()


# ---------------------------------------------------------------------------
# Arc system on the pillowcase
# ---------------------------------------------------------------------------

# Candidate offsets for interior polyline vertices, in scaled units.  The
# builder keeps the first combination for which every degeneracy check
# passes; offsets are small so the arcs hug their straight representatives.
_OFFSETS = [(5, 3), (3, 5), (3, 7), (5, 7), (7, 3), (7, 5), (5, 9), (9, 5),
            (3, 11), (11, 3), (7, 9), (9, 7), (5, 11), (11, 5), (7, 11)]


class _Arc:
    """Oriented polyline arc with a crossing letter."""

    def __init__(self, letter: int, points: List[Tuple[int, int]]):
        self.letter = letter
        self.points = points
        self.pieces = [(points[i], points[i + 1]) for i in range(len(points) - 1)]


def _on_grid_line(pt: Tuple[int, int], dirs: Sequence[Tuple[int, int]]) -> bool:
    """Whether pt lies on a lattice line with one of the edge directions."""
    a, b = pt
    for p, q in dirs:
        if (q * a - p * b) % SCALE == 0:
            return True
    return False


def _lattice_on_segment(c: Tuple[int, int], d: Tuple[int, int]) -> bool:
    """Whether the open segment cd contains a point of (SCALE Z)^2."""
    dx, dy = d[0] - c[0], d[1] - c[1]
    g = gcd(abs(dx), abs(dy))
    if g == 0:
        return False
    sx, sy = dx // g, dy // g
    for m in range(1, g):
        if (c[0] + sx * m) % SCALE == 0 and (c[1] + sy * m) % SCALE == 0:
            return True
    return False


def _segments_cross(a, b, c, d) -> bool:
    """Strict interior crossing test for integer segments."""
    d1 = _cross(d[0] - c[0], d[1] - c[1], a[0] - c[0], a[1] - c[1])
    d2 = _cross(d[0] - c[0], d[1] - c[1], b[0] - c[0], b[1] - c[1])
    d3 = _cross(b[0] - a[0], b[1] - a[1], c[0] - a[0], c[1] - a[1])
    d4 = _cross(b[0] - a[0], b[1] - a[1], d[0] - a[0], d[1] - a[1])
    return (d1 > 0) != (d2 > 0) and (d3 > 0) != (d4 > 0) and 0 not in (d1, d2, d3, d4)


def _build_arcs(W: int, M: int, dirs: Sequence[Tuple[int, int]]) -> List[_Arc]:
    """Arc system joining the five punctures at shear M/(2W).

    The four arcs are the images under the shear marking of the standard
    system at square shape: two near-vertical arcs from the four-fold
    point of the quotient down/up to a fold puncture, and one staple arc
    along each fold seam joining its two punctures.  Interior polyline
    vertices are nudged off every lattice line so that all crossing tests
    against mesh edges are strict.
    """
    alldirs = list(dirs) + [(-p, -q) for (p, q) in dirs]
    Wx = SCALE * W
    Yt = SCALE * W
    Yb = -SCALE * W
    P0 = (0, 0)
    B1 = (-8 * M, Yb)
    B2 = (-8 * M + 8 * W, Yb)
    T1 = (8 * M, Yt)
    T2 = (8 * M + 8 * W, Yt)
    punctures = [P0, B1, B2, T1, T2]

    def ok_vertex(pt):
        return not _on_grid_line(pt, alldirs)

    def ok_piece(c, d, ends):
        if _lattice_on_segment(c, d):
            return False
        # No puncture in the open interior of the piece (period images too).
        for (px, py) in punctures:
            for k in range(-3 - abs(M) // W, 4 + abs(M) // W):
                q = (px + k * Wx, py)
                if q in (c, d) or q in ends:
                    continue
                dx, dy = d[0] - c[0], d[1] - c[1]
                if _cross(dx, dy, q[0] - c[0], q[1] - c[1]) == 0:
                    t1 = (q[0] - c[0]) * dx + (q[1] - c[1]) * dy
                    t2 = dx * dx + dy * dy
                    if 0 < t1 < t2:
                        return False
        return True

    def make_polyline(points):
        for i in range(len(points) - 1):
            if not ok_piece(points[i], points[i + 1], (points[0], points[-1])):
                return None
        for pt in points[1:-1]:
            if not ok_vertex(pt):
                return None
        return points

    def choose(candidates):
        for pts in candidates:
            made = make_polyline(pts)
            if made is not None:
                return made
        raise AssertionError("no admissible arc polyline found")

    a1 = choose([[P0, (ax, -ay), (B1[0] - ax2, Yb + ay2), B1]
                 for (ax, ay) in _OFFSETS for (ax2, ay2) in _OFFSETS])
    a2 = choose([[P0, (ax, ay), (T1[0] - ax2, Yt - ay2), T1]
                 for (ax, ay) in _OFFSETS for (ax2, ay2) in _OFFSETS])
    a3 = choose([[B1, (B1[0] + ax, Yb + ay), (B2[0] - ax, Yb + ay), B2]
                 for (ax, ay) in _OFFSETS])
    a4 = choose([[T1, (T1[0] + ax, Yt - ay), (T2[0] - ax, Yt - ay), T2]
                 for (ax, ay) in _OFFSETS])

    arcs = [_Arc(1, a1), _Arc(2, a2), _Arc(3, a3), _Arc(4, a4)]

    # The arc system must be embedded and pairwise disjoint away from the
    # shared puncture endpoints, across horizontal period images.
    pieces = []
    for arc in arcs:
        pieces.extend(arc.pieces)
    shift_range = range(-3 - abs(M) // W, 4 + abs(M) // W)
    for i, (c1, d1) in enumerate(pieces):
        for j, (c2, d2) in enumerate(pieces):
            if j <= i:
                continue
            for k in shift_range:
                cc = (c2[0] + k * Wx, c2[1])
                dd = (d2[0] + k * Wx, d2[1])
                if _segments_cross(c1, d1, cc, dd):
                    raise AssertionError("arc system is not embedded")
    return arcs


# ---------------------------------------------------------------------------
# Pillowcase mesh
# ---------------------------------------------------------------------------


def build_pillowcase_mesh(s: Fraction, level: int, radius: int = 4) -> MeshGraph:
    """Mesh on the five-punctured pillowcase at shear s.

    The fundamental domain is [0,1] x [-1,1] with the two horizontal
    boundaries folded by x -> +-2s - x and the vertical sides glued by a
    unit translation.  The spacing is 2**-(level+2); the shear must place
    the fold identification on the grid, otherwise the request is refused
    rather than silently snapped.
    """
    s = Fraction(s)
    W = 2 ** (level + 2)
    h = Fraction(1, W)
    m2 = 2 * s * W
    if m2.denominator != 1:
        raise ShearIncommensurate(
            f"shear {s} is not resolved by mesh spacing 1/{W}")
    M = int(m2)
    dirs = _directions(radius)
    arcs = _build_arcs(W, M, dirs)

    nrows = 2 * W + 1  # row index jj = j + W for j in [-W, W]

    def bot_partner(i):
        return (-M - i) % W

    def top_partner(i):
        return (M - i) % W

    # --- vertex numbering ------------------------------------------------
    keep = np.zeros((W, nrows), dtype=bool)
    keep[:, 1:2 * W] = True
    keep[0, W] = False  # four-fold puncture at (0, 0)
    ii = np.arange(W)
    keep[:, 0] = ii <= (-M - ii) % W
    keep[:, 2 * W] = ii <= (M - ii) % W

    removed_pairs = []
    # Fold punctures: nearest quotient vertex on each seam.
    for (base, row, partner) in (((-M) // 2, 0, bot_partner),
                                 (M // 2, 2 * W, top_partner)):
        for off in (0, W // 2):
            i0 = (base + off) % W
            ic = min(i0, partner(i0))
            keep[ic, row] = False
            removed_pairs.append((ic, row))

    order = np.full((W, nrows), -1, dtype=np.int64)
    order[keep] = np.arange(int(keep.sum()))
    # Non-canonical seam representatives point at their canonical partner.
    for i in range(W):
        for row, partner in ((0, bot_partner), (2 * W, top_partner)):
            if not keep[i, row]:
                p = partner(i)
                if p != i and keep[p, row]:
                    order[i, row] = order[p, row]

    n = int(keep.sum())
    iv, jv = np.nonzero(keep)
    xs = iv.astype(float) * float(h)
    ys = (jv.astype(float) - W) * float(h)
    mu = np.full(n, float(h) ** 2)

    Wx = SCALE * W
    tails_all: List[np.ndarray] = []
    heads_all: List[np.ndarray] = []
    len_all: List[np.ndarray] = []
    words_all: List[List[Tuple[int, ...]]] = []
    mi_all: List[np.ndarray] = []
    mj_all: List[np.ndarray] = []

    arc_pieces = []
    for arc in arcs:
        for (c, d) in arc.pieces:
            arc_pieces.append((c, d, arc.letter))
    arc_x = [x for c, d, _ in arc_pieces for x in (c[0], d[0])]
    # Edge x-coordinates live in [-16*radius, Wx + 16*radius]; cover them
    # with enough horizontal period images of the arcs.
    kmin = -((max(arc_x) + SCALE * radius) // Wx) - 1
    kmax = (SCALE * radius + Wx - min(arc_x)) // Wx + 1
    shifts = range(int(kmin), int(kmax) + 1)

    # --- bulk edges (no fold interaction possible) ------------------------
    margin = radius
    for (p, q) in dirs:
        J = np.arange(-W + margin + 1, W - margin)
        I = np.arange(W)
        Ig, Jg = np.meshgrid(I, J, indexing="ij")
        Ig = Ig.ravel()
        Jg = Jg.ravel()
        t_idx = order[Ig, Jg + W]
        h_idx = order[(Ig + p) % W, Jg + q + W]
        mask = (t_idx >= 0) & (h_idx >= 0)
        # Drop edges running through the four-fold puncture (0, 0).
        if q != 0:
            strad = (np.sign(Jg) != np.sign(Jg + q)) & (Jg != 0) & (Jg + q != 0)
            hit = strad & ((q * Ig - p * Jg) % (abs(q) * W) == 0)
            mask &= ~hit
        Ig, Jg, t_idx, h_idx = Ig[mask], Jg[mask], t_idx[mask], h_idx[mask]
        ax = SCALE * Ig
        ay = SCALE * Jg
        bx = ax + SCALE * p
        by = ay + SCALE * q
        m = len(Ig)
        events: List[Tuple[int, int, int, int]] = []  # (edge, letter, tn, td)
        for (c, d, letter) in arc_pieces:
            base_sign = _cross(d[0] - c[0], d[1] - c[1], p, q)
            if base_sign == 0:
                continue
            sgn = 1 if base_sign > 0 else -1
            lo = min(ay.min() if m else 0, by.min() if m else 0)
            hi = max(ay.max() if m else 0, by.max() if m else 0)
            if m == 0 or min(c[1], d[1]) > hi or max(c[1], d[1]) < lo:
                continue
            for k in shifts:
                cx, cy = c[0] + k * Wx, c[1]
                dx, dy = d[0] + k * Wx, d[1]
                ex, ey = dx - cx, dy - cy
                d1 = ex * (ay - cy) - ey * (ax - cx)
                d2 = ex * (by - cy) - ey * (bx - cx)
                cand = np.nonzero((d1 > 0) != (d2 > 0))[0]
                if len(cand) == 0:
                    continue
                rx, ry = SCALE * p, SCALE * q
                d3 = rx * (cy - ay[cand]) - ry * (cx - ax[cand])
                d4 = rx * (dy - ay[cand]) - ry * (dx - ax[cand])
                ok = (d3 > 0) != (d4 > 0)
                ok &= (d3 != 0) & (d4 != 0)
                sel = cand[ok]
                for e in sel:
                    tn = int(d1[e])
                    td = int(d1[e] - d2[e])
                    events.append((int(e), sgn * letter, tn, td))
        words = [()] * m
        if events:
            by_edge: Dict[int, List[Tuple[Fraction, int]]] = {}
            for (e, let, tn, td) in events:
                by_edge.setdefault(e, []).append((Fraction(tn, td), let))
            for e, evs in by_edge.items():
                evs.sort(key=lambda t: t[0])
                words[e] = tuple(let for _, let in evs)
        tails_all.append(t_idx)
        heads_all.append(h_idx)
        len_all.append(np.full(m, float(h) * sqrt(p * p + q * q)))
        words_all.append(words)
        mi_all.append((2 * Ig + p) % (2 * W))
        mj_all.append(2 * Jg + q)

    # --- near-boundary and seam edges (exact, python) ----------------------
    L = float(h)
    extra_t: List[int] = []
    extra_h: List[int] = []
    extra_len: List[float] = []
    extra_w: List[Tuple[int, ...]] = []
    extra_mi: List[int] = []
    extra_mj: List[int] = []
    seen = set()

    def fold_mid(ax, ay, p, q):
        """Edge midpoint folded into the domain, in half-spacing units."""
        mx, my = ax + 8 * p, ay + 8 * q
        if my > SCALE * W:
            mx, my = 16 * M - mx, 2 * SCALE * W - my
        elif my < -SCALE * W:
            mx, my = -16 * M - mx, -2 * SCALE * W - my
        return (mx // 8) % (2 * W), my // 8

    bot_punc = [(-8 * M) % Wx, (-8 * M + 8 * W) % Wx]
    top_punc = [(8 * M) % Wx, (8 * M + 8 * W) % Wx]

    def word_of_pieces(pieces):
        """Signed arc crossings of a chain of integer/Fraction segments."""
        evs = []
        t_base = 0
        for (A, B) in pieces:
            for (c, d, letter) in arc_pieces:
                for k in shifts:
                    cx, cy = c[0] + k * Wx, c[1]
                    dx, dy = d[0] + k * Wx, d[1]
                    ex, ey = dx - cx, dy - cy
                    d1 = ex * (A[1] - cy) - ey * (A[0] - cx)
                    d2 = ex * (B[1] - cy) - ey * (B[0] - cx)
                    if not ((d1 > 0) != (d2 > 0)):
                        continue
                    rx, ry = B[0] - A[0], B[1] - A[1]
                    d3 = rx * (cy - A[1]) - ry * (cx - A[0])
                    d4 = rx * (dy - A[1]) - ry * (dx - A[0])
                    if not ((d3 > 0) != (d4 > 0)) or 0 in (d3, d4):
                        continue
                    if d1 == 0 or d2 == 0:
                        raise AssertionError("degenerate arc crossing")
                    sgn = 1 if _cross(ex, ey, rx, ry) > 0 else -1
                    evs.append((t_base + Fraction(d1, d1 - d2), sgn * letter))
            t_base += 1
        evs.sort(key=lambda t: t[0])
        return tuple(let for _, let in evs)

    def add_edge(ti, hi, length, word, key, mid):
        if key in seen:
            return
        seen.add(key)
        extra_t.append(ti)
        extra_h.append(hi)
        extra_len.append(length)
        extra_w.append(word)
        extra_mi.append(mid[0])
        extra_mj.append(mid[1])

    def trace(i, j, p, q):
        """Trace one mesh step with fold reflections; None if it hits a puncture."""
        ax, ay = SCALE * i, SCALE * j
        bx, by = ax + SCALE * p, ay + SCALE * q
        fold_key = None
        if by > SCALE * W:  # top fold
            t = Fraction(SCALE * W - ay, by - ay)
            xc = ax + t * (bx - ax)
            if xc.denominator == 1 and int(xc) % Wx in top_punc:
                return None
            pieces = [((ax, ay), (xc, SCALE * W)),
                      ((16 * M - xc, SCALE * W), (16 * M - bx, 2 * SCALE * W - by))]
            hx, hy = 16 * M - bx, 2 * SCALE * W - by
            fold_key = ("t", min(xc % Wx, (16 * M - xc) % Wx))
        elif by < -SCALE * W:  # bottom fold
            t = Fraction(-SCALE * W - ay, by - ay)
            xc = ax + t * (bx - ax)
            if xc.denominator == 1 and int(xc) % Wx in bot_punc:
                return None
            pieces = [((ax, ay), (xc, -SCALE * W)),
                      ((-16 * M - xc, -SCALE * W), (-16 * M - bx, -2 * SCALE * W - by))]
            hx, hy = -16 * M - bx, -2 * SCALE * W - by
            fold_key = ("b", min(xc % Wx, (-16 * M - xc) % Wx))
        else:
            pieces = [((ax, ay), (bx, by))]
            hx, hy = bx, by
        assert hx == int(hx) and hy == int(hy)
        hx, hy = int(hx), int(hy)
        hi_i = (hx // SCALE) % W
        hi_j = hy // SCALE
        # Seam edges may pass through a fold puncture lying between vertices.
        if q == 0 and abs(j) == W:
            punc = bot_punc if j == -W else top_punc
            x0, x1 = sorted((ax, bx))
            for px in punc:
                for k in range(-1, 2 + abs(M) // W + abs(p)):
                    if x0 < px + k * Wx < x1:
                        return None
        return pieces, hi_i, hi_j, fold_key

    lo_rows = [j for j in range(-W, -W + margin + 1)]
    hi_rows = [j for j in range(W - margin, W + 1)]
    for j in lo_rows + hi_rows:
        for i in range(W):
            if abs(j) == W and not keep[i, j + W]:
                continue  # seam orbits are visited from their canonical rep
            ti = order[i, j + W]
            if ti < 0:
                continue
            dom_reps = [(i, j)]
            if abs(j) == W:
                partner = bot_partner(i) if j == -W else top_partner(i)
                if partner != i:
                    dom_reps.append((partner, j))
            for (di, dj) in dom_reps:
                for (p, q) in dirs:
                    if abs(dj) == W:
                        if dj == -W and q < 0:
                            continue
                        if dj == W and q > 0:
                            continue
                    res = trace(di, dj, p, q)
                    if res is None:
                        continue
                    pieces, hi_i, hi_j, fold_key = res
                    if abs(hi_j) > W:
                        continue
                    hidx = order[hi_i, hi_j + W]
                    if hidx < 0:
                        continue
                    # Re-check four-fold puncture passes.
                    bad = False
                    for (A, B) in pieces:
                        dx, dy = B[0] - A[0], B[1] - A[1]
                        for k in range(-1, 2):
                            qx = k * Wx
                            cr = dx * (0 - A[1]) - dy * (qx - A[0])
                            if cr == 0:
                                tt = ((qx - A[0]) * dx + (0 - A[1]) * dy)
                                t2 = dx * dx + dy * dy
                                if 0 < tt < t2:
                                    bad = True
                    if bad:
                        continue
                    word = word_of_pieces(pieces)
                    length = L * sqrt(p * p + q * q)
                    rw = tuple(-x for x in reversed(word))
                    wkey = min(word, rw)
                    key = (min(ti, hidx), max(ti, hidx), p * p + q * q,
                           wkey, fold_key)
                    add_edge(int(ti), int(hidx), length, word, key,
                             fold_mid(SCALE * di, SCALE * dj, p, q))

    # A direction in the half set determines which endpoint of an edge is
    # its generating tail, so the vectorized bulk (tail rows away from the
    # folds) and the exact band (tail rows near the folds) are disjoint;
    # duplicates only arise inside the band and are filtered by `seen`.
    tails = np.concatenate(tails_all + [np.asarray(extra_t, dtype=np.int64)])
    heads = np.concatenate(heads_all + [np.asarray(extra_h, dtype=np.int64)])
    lengths = np.concatenate(len_all + [np.asarray(extra_len, dtype=float)])
    mid_i = np.concatenate(
        [a.astype(np.int64) for a in mi_all]
        + [np.asarray(extra_mi, dtype=np.int64)])
    mid_j = np.concatenate(
        [a.astype(np.int64) for a in mj_all]
        + [np.asarray(extra_mj, dtype=np.int64)])
    words_flat: List[Tuple[int, ...]] = []
    for wl in words_all:
        words_flat.extend(wl)
    words_flat.extend(extra_w)

    # Fold bounces can close up into self-loops; those encircling a fold
    # puncture carry a crossing word and stay, word-free loops are useless.
    drop = (tails == heads) & np.asarray([not w for w in words_flat])
    if drop.any():
        sel = ~drop
        tails, heads, lengths = tails[sel], heads[sel], lengths[sel]
        mid_i, mid_j = mid_i[sel], mid_j[sel]
        words_flat = [w for w, k in zip(words_flat, sel) if k]

    mesh = MeshGraph(
        kind="pillowcase",
        level=level,
        h=h,
        xs=xs,
        ys=ys,
        mu=mu,
        tails=tails,
        heads=heads,
        lengths=lengths,
        words=words_flat,
        meta={"s": s, "W": W, "M": M, "radius": radius,
              "order": order, "arcs": arcs},
        mid_i=mid_i,
        mid_j=mid_j,
    )
    return mesh


# ---------------------------------------------------------------------------
# Rectangle and torus meshes (fixtures)
# ---------------------------------------------------------------------------


def build_rectangle_mesh(a: Fraction, b: Fraction, level: int,
                         radius: int = 4) -> MeshGraph:
    """Mesh on the a x b rectangle; area weights use boundary cell factors."""
    a = Fraction(a)
    b = Fraction(b)
    h = Fraction(1, 2 ** level)
    nx = a / h
    ny = b / h
    if nx.denominator != 1 or ny.denominator != 1:
        raise ShearIncommensurate("rectangle sides not resolved by spacing")
    nx, ny = int(nx), int(ny)
    dirs = _directions(radius)
    Iv, Jv = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="ij")
    Iv, Jv = Iv.ravel(), Jv.ravel()
    order = np.arange((nx + 1) * (ny + 1)).reshape(nx + 1, ny + 1)
    fx = np.where((Iv == 0) | (Iv == nx), 0.5, 1.0)
    fy = np.where((Jv == 0) | (Jv == ny), 0.5, 1.0)
    mu = (float(h) ** 2) * fx * fy
    xs = Iv * float(h)
    ys = Jv * float(h)
    tails, heads, lens = [], [], []
    for (p, q) in dirs:
        I = np.arange(max(0, -p), min(nx + 1, nx + 1 - p))
        J = np.arange(max(0, -q), min(ny + 1, ny + 1 - q))
        Ig, Jg = np.meshgrid(I, J, indexing="ij")
        Ig, Jg = Ig.ravel(), Jg.ravel()
        tails.append(order[Ig, Jg])
        heads.append(order[Ig + p, Jg + q])
        lens.append(np.full(len(Ig), float(h) * sqrt(p * p + q * q)))
    tails = np.concatenate(tails)
    heads = np.concatenate(heads)
    lengths = np.concatenate(lens)
    left = order[0, :].tolist()
    right = order[nx, :].tolist()
    bottom = order[:, 0].tolist()
    top = order[:, ny].tolist()
    return MeshGraph(
        kind="rectangle", level=level, h=h, xs=xs, ys=ys, mu=mu,
        tails=tails, heads=heads, lengths=lengths,
        words=[()] * len(tails),
        meta={"a": a, "b": b, "left": left, "right": right,
              "bottom": bottom, "top": top, "radius": radius},
    )


def build_torus_mesh(wu: int, hu: int, level: int, radius: int = 4) -> MeshGraph:
    """Mesh on the flat torus R^2 / (wu Z x hu Z).

    Crossing letters: 1 for the vertical cut x == 0, 2 for the horizontal
    cut y == 0, signed by crossing direction.
    """
    h = Fraction(1, 2 ** level)
    nx = int(wu / h)
    ny = int(hu / h)
    dirs = _directions(radius)
    order = np.arange(nx * ny).reshape(nx, ny)
    Iv, Jv = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    xs = Iv.ravel() * float(h)
    ys = Jv.ravel() * float(h)
    mu = np.full(nx * ny, float(h) ** 2)
    tails, heads, lens, words = [], [], [], []
    for (p, q) in dirs:
        Ig, Jg = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
        Ig, Jg = Ig.ravel(), Jg.ravel()
        t_idx = order[Ig, Jg]
        h_idx = order[(Ig + p) % nx, (Jg + q) % ny]
        wx = (Ig + p) // nx  # net signed wraps, -1/0/+1
        wy = (Jg + q) // ny
        tails.append(t_idx)
        heads.append(h_idx)
        lens.append(np.full(len(Ig), float(h) * sqrt(p * p + q * q)))
        # Order double crossings by parameter along the edge.
        for e in range(len(Ig)):
            w = []
            if wx[e] != 0:
                tx = Fraction(nx - Ig[e] if wx[e] > 0 else -int(Ig[e]), p)
                w.append((tx, int(np.sign(wx[e]))))
            if wy[e] != 0:
                ty = Fraction(ny - Jg[e] if wy[e] > 0 else -int(Jg[e]), q)
                w.append((ty, 2 * int(np.sign(wy[e]))))
            w.sort(key=lambda t: t[0])
            words.append(tuple(let for _, let in w))
    return MeshGraph(
        kind="torus", level=level, h=h, xs=xs, ys=ys, mu=mu,
        tails=np.concatenate(tails), heads=np.concatenate(heads),
        lengths=np.concatenate(lens), words=words,
        meta={"wu": wu, "hu": hu, "radius": radius},
    )
