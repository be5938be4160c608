"""Flat polyline representatives of curves on the square pillowcase.

This module is an independent cross-check of the combinatorial curve
machinery in :mod:`pillowcase.curves`.  Curves are exact rational
polylines inside the fundamental rectangle [0,1] x [-1,1] of the shear-0
pillowcase; consecutive segments are joined either at a common interior
point, across the vertical wrap x = 0 ~ x = 1, or through one of the two
boundary folds x ~ -x at y = +-1.

Intersection numbers are computed on the torus double cover (deck group
generated by (x, y) -> (-x, 2 - y)), where the folds disappear and every
identification is a translation.  There we count transverse crossings,
including crossings that sit exactly on a gluing circle, and cancel
bigons; a loop on the torus bounds a disk iff its total winding vector
vanishes, so the bigon test is exact integer arithmetic.  The count on
the pillowcase is half the minimal count upstairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import NotEmbedded, PointIsPuncture
from .geom import Point, cross, frac, on_segment, pt, segment_intersection, sub

__all__ = [
    "FlatCurve",
    "named_polyline",
    "shear_polyline",
    "crossing_word",
    "oracle_flat_intersection",
    "reduce_word",
]

Segment = Tuple[Point, Point]

_PUNCTURES = [pt(0, 0), pt(0, -1), pt(Fraction(1, 2), -1),
              pt(0, 1), pt(Fraction(1, 2), 1)]

# punctures of the torus double cover, in the cell [0,1] x [-1,3]
_TORUS_PUNCTURES = [pt(0, 0), pt(0, 2), pt(0, -1), pt(0, 3),
                    pt(Fraction(1, 2), -1), pt(Fraction(1, 2), 3),
                    pt(0, 1), pt(1, 1), pt(Fraction(1, 2), 1),
                    pt(1, 0), pt(1, 2), pt(1, -1), pt(1, 3)]


def _mod1(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


@dataclass(frozen=True)
class FlatCurve:
    """Closed polyline on the shear-0 pillowcase, as in-domain segments."""

    segments: Tuple[Segment, ...]

    def __post_init__(self):
        for (a, b) in self.segments:
            if a == b:
                raise NotEmbedded("zero-length segment")
            for p in (a, b):
                if not (0 <= p[0] <= 1 and -1 <= p[1] <= 1):
                    raise NotEmbedded(f"point {p} outside the fundamental domain")
        for k in range(len(self.segments)):
            _classify_junction(self.segments[k],
                               self.segments[(k + 1) % len(self.segments)])


def _classify_junction(seg_in: Segment, seg_out: Segment
                       ) -> Optional[Tuple[int, int]]:
    """Letter contributed where seg_in hands over to seg_out.

    Returns (arc, sign) or None for an interior vertex.  The arcs are
    a1 = {0} x [-1,0], a2 = {0} x [0,1] (crossed at the vertical wrap)
    and the seams a3 (bottom fold) and a4 (top fold).  Signs follow the
    cross product of the oriented arc direction with the direction of
    travel; a1 and a2 point away from (0,0), the seams run from x = 0
    towards x = 1/2 on their first preimage.
    """
    end = seg_in[1]
    start = seg_out[0]
    d = sub(seg_in[1], seg_in[0])
    if end == start:
        return None
    x, y = end
    if end in _PUNCTURES or start in _PUNCTURES:
        raise PointIsPuncture(f"polyline passes through a puncture at {end}")
    if y == start[1] and {x, start[0]} == {frac(0), frac(1)} and -1 < y < 1:
        if y == 0:
            raise PointIsPuncture("wrap junction at the puncture height y=0")
        arc = 1 if y < 0 else 2
        arc_dir = pt(0, -1) if y < 0 else pt(0, 1)
        sign = 1 if cross(arc_dir, d) > 0 else -1
        return arc, sign
    if y == -1 and start[1] == -1 and _mod1(-x) == _mod1(start[0]) and d[1] < 0:
        if x in (0, Fraction(1, 2), 1):
            raise PointIsPuncture("fold junction at a puncture")
        arc_dir = pt(1, 0) if x < Fraction(1, 2) else pt(-1, 0)
        sign = 1 if cross(arc_dir, d) > 0 else -1
        return 3, sign
    if y == 1 and start[1] == 1 and _mod1(-x) == _mod1(start[0]) and d[1] > 0:
        if x in (0, Fraction(1, 2), 1):
            raise PointIsPuncture("fold junction at a puncture")
        arc_dir = pt(1, 0) if x < Fraction(1, 2) else pt(-1, 0)
        sign = 1 if cross(arc_dir, d) > 0 else -1
        return 4, sign
    raise NotEmbedded(f"segments do not join: {seg_in} -> {seg_out}")


def _junction_kind(seg_in: Segment, seg_out: Segment) -> str:
    end, start = seg_in[1], seg_out[0]
    if end == start:
        return "interior"
    if end[1] in (-1, 1):
        return "fold"
    return "wrap"


_NAMED: Dict[str, Tuple[Segment, ...]] = {
    "alpha": (
        ((Fraction(1, 16), Fraction(-1, 2)), (Fraction(1), Fraction(-1, 2))),
        ((Fraction(0), Fraction(-1, 2)), (Fraction(1, 16), Fraction(-1, 2))),
    ),
    "beta": (
        ((Fraction(1, 16), Fraction(1, 2)), (Fraction(1), Fraction(1, 2))),
        ((Fraction(0), Fraction(1, 2)), (Fraction(1, 16), Fraction(1, 2))),
    ),
    # the crossbar of eta is slightly tilted so that sheared images of
    # eta stay in general position with respect to each other
    "eta": (
        ((Fraction(1, 8), Fraction(-1)), (Fraction(1, 8), Fraction(1, 16))),
        ((Fraction(1, 8), Fraction(1, 16)), (Fraction(0), Fraction(1, 24))),
        ((Fraction(1), Fraction(1, 24)), (Fraction(7, 8), Fraction(1, 16))),
        ((Fraction(7, 8), Fraction(1, 16)), (Fraction(7, 8), Fraction(-1))),
    ),
    "nu": (
        ((Fraction(5, 24), Fraction(-1)), (Fraction(5, 24), Fraction(1))),
        ((Fraction(19, 24), Fraction(1)), (Fraction(19, 24), Fraction(-1))),
    ),
}


def named_polyline(name: str) -> FlatCurve:
    segs = _NAMED.get(name)
    if segs is None:
        raise KeyError(f"unknown curve {name!r}")
    return FlatCurve(segs)


def _split_to_domain(p: Point, q: Point) -> List[Segment]:
    """Cut the plane segment pq at integer x values and translate each
    piece into x range [0,1]."""
    x1, x2 = p[0], q[0]
    lo, hi = min(x1, x2), max(x1, x2)
    cuts = []
    k = lo.numerator // lo.denominator + 1
    while k < hi:
        if lo < k < hi:
            cuts.append(Fraction(k))
        k += 1
    ts = [Fraction(0)]
    if x2 != x1:
        ts += sorted((c - x1) / (x2 - x1) for c in cuts)
    ts.append(Fraction(1))
    pieces = []
    for t0, t1 in zip(ts[:-1], ts[1:]):
        if t0 == t1:
            continue
        a = (x1 + t0 * (x2 - x1), p[1] + t0 * (q[1] - p[1]))
        b = (x1 + t1 * (x2 - x1), p[1] + t1 * (q[1] - p[1]))
        mid_x = (a[0] + b[0]) / 2
        cell = mid_x.numerator // mid_x.denominator
        pieces.append(((a[0] - cell, a[1]), (b[0] - cell, b[1])))
    return pieces


def shear_polyline(curve: FlatCurve, n: int) -> FlatCurve:
    """Image of a polyline under (x, y) -> (x + n y, y), re-wrapped.

    Integer shears are automorphisms of the shear-0 pillowcase, so the
    image is again a closed polyline on the same surface.
    """
    out: List[Segment] = []
    for (a, b) in curve.segments:
        p = (a[0] + n * a[1], a[1])
        q = (b[0] + n * b[1], b[1])
        out.extend(_split_to_domain(p, q))
    return FlatCurve(tuple(out))


def crossing_word(curve: FlatCurve) -> Tuple[int, ...]:
    """Signed arc letters read along the polyline (+-1..+-4)."""
    letters = []
    n = len(curve.segments)
    for k in range(n):
        lab = _classify_junction(curve.segments[k], curve.segments[(k + 1) % n])
        if lab is not None:
            arc, sign = lab
            letters.append(arc * sign)
    return tuple(letters)


def reduce_word(word: Sequence[int]) -> Tuple[int, ...]:
    out: List[int] = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


# ---------------------------------------------------------------------------
# torus double cover


def _involution_segment(seg: Segment) -> Segment:
    """Image of a lifted piece under the deck map (x,y) -> (1-x, 2-y)
    (the fold involution composed with the x-translation that returns
    the piece to the fundamental cell)."""
    (x1, y1), (x2, y2) = seg
    return ((1 - x1, 2 - y1), (1 - x2, 2 - y2))


def _lift_components(curve: FlatCurve) -> List[List[Segment]]:
    """Connected components of the preimage of the polyline in the torus
    double cover, each as a closed chain of pieces in [0,1] x [-1,3]."""
    segs = curve.segments
    n = len(segs)
    pieces: List[Segment] = []
    sheet = 0
    idx = 0
    while True:
        seg = segs[idx % n]
        pieces.append(seg if sheet == 0 else _involution_segment(seg))
        if _junction_kind(segs[idx % n], segs[(idx + 1) % n]) == "fold":
            sheet ^= 1
        idx += 1
        if idx % n == 0:
            if sheet == 0:
                break
            if idx >= 2 * n:
                raise AssertionError("lift did not close after two passes")
    comps = [pieces]
    if idx == n:
        comps.append([_involution_segment(s) for s in pieces])
    for comp in comps:
        for (a, b) in comp:
            for q in _TORUS_PUNCTURES:
                if on_segment(q, a, b):
                    raise PointIsPuncture(f"lifted segment hits puncture {q}")
    return comps


def _torus_junction(seg_in: Segment, seg_out: Segment):
    """Classify a junction upstairs.

    Returns None for a plain interior vertex, or (kind, letter) where
    kind is 'x' (vertical gluing circle x = 0 ~ 1), 'y' (horizontal
    circle y = -1 ~ 3) or 'mid' (interior crossing of the circle y = 1,
    the lift of the top seam).  The letter is a signed index into the
    eight lifted cut arcs; together those arcs cut the torus into two
    disks, so free reduction of letter words tests null-homotopy in the
    punctured torus.
    """
    end, start = seg_in[1], seg_out[0]
    d = sub(seg_in[1], seg_in[0])
    if end == start:
        if end[1] != 1:
            return None
        # crossing of the circle y = 1 (lifted top seam)
        x = end[0]
        if x in (0, Fraction(1, 2), 1):
            raise PointIsPuncture("junction at a lifted puncture")
        arc = 5 if x < Fraction(1, 2) else 6
        return ("mid", arc if d[1] > 0 else -arc)
    if end[1] == start[1] and {end[0], start[0]} == {frac(0), frac(1)}:
        y = end[1]
        if y in (0, 1, 2):
            raise PointIsPuncture("junction at a lifted puncture")
        if y < 0:
            arc = 1
        elif y < 1:
            arc = 2
        elif y < 2:
            arc = 3
        else:
            arc = 4
        return ("x", arc if d[0] > 0 else -arc)
    if end[0] == start[0] and {end[1], start[1]} == {frac(-1), frac(3)}:
        x = end[0]
        if x in (0, Fraction(1, 2), 1):
            raise PointIsPuncture("junction at a lifted puncture")
        arc = 7 if x < Fraction(1, 2) else 8
        return ("y", arc if d[1] > 0 else -arc)
    raise NotEmbedded(f"lifted segments do not join: {seg_in} -> {seg_out}")


def _in_ccw_sector(a: Point, b: Point, w: Point) -> bool:
    """Is direction w strictly inside the sector swept ccw from a to b?
    Raises on degenerate (parallel) configurations."""
    cab = cross(a, b)
    caw = cross(a, w)
    cwb = cross(w, b)
    if (caw == 0 and (a[0] * w[0] + a[1] * w[1]) != 0) or \
       (cwb == 0 and (b[0] * w[0] + b[1] * w[1]) != 0):
        raise NotEmbedded("tangential contact at a junction point")
    if cab > 0:
        return caw > 0 and cwb > 0
    if cab < 0:
        return caw > 0 or cwb > 0
    dot = a[0] * b[0] + a[1] * b[1]
    if dot < 0:  # straight passage: sector is the left half plane of a
        return caw > 0
    raise NotEmbedded("cusp at a junction point")


def _wedge_crossing_sign(u1: Point, u2: Point, v1: Point, v2: Point
                         ) -> Optional[int]:
    """Crossing sign of two strands through a common point.

    Strand A is the union of rays u1 (backwards) and u2 (forwards);
    likewise v1, v2 for strand B.  Returns None when B stays on one side
    of A, else the usual orientation sign (+1 when B passes from the
    right of A to the left)."""
    s1 = _in_ccw_sector(u1, u2, v1)
    s2 = _in_ccw_sector(u1, u2, v2)
    if s1 == s2:
        return None
    # the ccw sector from u1 to u2 is the right-hand side of A
    return 1 if s1 else -1


Position = Tuple[int, int, Fraction, int]  # (component, piece, t, rank)


class _LiftedCurve:
    """Lifted components plus junction bookkeeping used by the counter."""

    def __init__(self, curve: FlatCurve):
        self.components = _lift_components(curve)
        # junction records: key -> list of (position, u1, u2)
        self.junctions: Dict[Tuple, List[Tuple[Position, Point, Point]]] = {}
        self.letters: List[List[Tuple[Position, int]]] = []
        for ci, comp in enumerate(self.components):
            labels = []
            n = len(comp)
            for k in range(n):
                seg_in, seg_out = comp[k], comp[(k + 1) % n]
                lab = _torus_junction(seg_in, seg_out)
                if lab is None:
                    continue
                axis, letter = lab
                labels.append(((ci, k, Fraction(1), 0), letter))
                # crossing bookkeeping for intersections at this junction
                d_in = sub(seg_in[1], seg_in[0])
                d_out = sub(seg_out[1], seg_out[0])
                if axis == "x":
                    key = ("x", seg_in[1][1])
                    positive = d_in[0] > 0
                elif axis == "mid":
                    key = ("mid", seg_in[1][0])
                    positive = d_in[1] > 0
                else:
                    key = ("y", seg_in[1][0])
                    positive = d_in[1] > 0
                # perturbation convention: the crossing point sits just on
                # the negative side of the circle the junction lies on
                pos: Position = ((ci, k, Fraction(1), -1) if positive
                                 else (ci, (k + 1) % n, Fraction(0), 1))
                self.junctions.setdefault(key, []).append(
                    (pos, (-d_in[0], -d_in[1]), d_out))
            self.letters.append(labels)
        # interior bend vertices, for crossings located exactly at a corner
        self.wedges: Dict[Point, Tuple[Position, Point, Point]] = {}
        for ci, comp in enumerate(self.components):
            n = len(comp)
            for k in range(n):
                seg_in, seg_out = comp[k], comp[(k + 1) % n]
                if seg_in[1] != seg_out[0] or seg_in[1][1] == 1:
                    continue
                d_in = sub(seg_in[1], seg_in[0])
                d_out = sub(seg_out[1], seg_out[0])
                self.wedges[seg_in[1]] = ((ci, k, Fraction(1), 0),
                                          (-d_in[0], -d_in[1]), d_out)


def _interior_crossings(a: _LiftedCurve, b: _LiftedCurve):
    """Transverse crossings in the interior of pieces, plus loud failure
    on any degenerate contact."""
    out = []
    for ci, comp_a in enumerate(a.components):
        for i, (p1, p2) in enumerate(comp_a):
            for cj, comp_b in enumerate(b.components):
                for j, (q1, q2) in enumerate(comp_b):
                    hit = segment_intersection(p1, p2, q1, q2)
                    if hit is not None:
                        t, u, sign = hit
                        out.append(((ci, i, t, 0), (cj, j, u, 0), sign))
                        continue
                    r = sub(p2, p1)
                    if cross(r, sub(q2, q1)) == 0 and cross(r, sub(q1, p1)) == 0:
                        # collinear: overlapping means degenerate input
                        if (on_segment(q1, p1, p2) or on_segment(q2, p1, p2)
                                or on_segment(p1, q1, q2)):
                            raise NotEmbedded("overlapping collinear segments")
                        continue
                    s = sub(q2, q1)
                    for p in (q1, q2):
                        if p != p1 and p != p2 and on_segment(p, p1, p2) \
                                and not _on_gluing_circle(p):
                            if p not in b.wedges:
                                raise NotEmbedded(
                                    f"degenerate contact at vertex {p}")
                            if p != q1:
                                continue  # each bend is handled once, as a start
                            pos_b, v1, v2 = b.wedges[p]
                            sign = _wedge_crossing_sign(
                                (-r[0], -r[1]), r, v1, v2)
                            if sign is not None:
                                t = _param_on_segment(p, p1, r)
                                out.append(((ci, i, t, 0), pos_b, sign))
                    for p in (p1, p2):
                        if p != q1 and p != q2 and on_segment(p, q1, q2) \
                                and not _on_gluing_circle(p):
                            if p not in a.wedges:
                                raise NotEmbedded(
                                    f"degenerate contact at vertex {p}")
                            if p != p1:
                                continue
                            pos_a, u1, u2 = a.wedges[p]
                            sign = _wedge_crossing_sign(
                                u1, u2, (-s[0], -s[1]), s)
                            if sign is not None:
                                u = _param_on_segment(p, q1, s)
                                out.append((pos_a, (cj, j, u, 0), sign))
    return out


def _on_gluing_circle(p: Point) -> bool:
    return p[0] in (0, 1) or p[1] in (-1, 3)


def _param_on_segment(p: Point, origin: Point, direction: Point) -> Fraction:
    if direction[0] != 0:
        return (p[0] - origin[0]) / direction[0]
    return (p[1] - origin[1]) / direction[1]


def _vertex_crossings(a: _LiftedCurve, b: _LiftedCurve):
    """Crossings located exactly at a shared bend vertex of both curves."""
    out = []
    for p, (pos_a, u1, u2) in a.wedges.items():
        rec = b.wedges.get(p)
        if rec is None:
            continue
        pos_b, v1, v2 = rec
        sign = _wedge_crossing_sign(u1, u2, v1, v2)
        if sign is not None:
            out.append((pos_a, pos_b, sign))
    return out


def _junction_crossings(a: _LiftedCurve, b: _LiftedCurve):
    out = []
    for key, recs_a in a.junctions.items():
        recs_b = b.junctions.get(key, [])
        for pos_a, u1, u2 in recs_a:
            for pos_b, v1, v2 in recs_b:
                sign = _wedge_crossing_sign(u1, u2, v1, v2)
                if sign is not None:
                    out.append((pos_a, pos_b, sign))
    return out


Word = Tuple[int, ...]


def _wconcat(u: Word, v: Word) -> Word:
    return reduce_word(u + v)


def _winv(u: Word) -> Word:
    return tuple(-letter for letter in reversed(u))


class _Ring:
    """Cyclic order of crossings along one lifted component, with the
    reduced cut-arc words of the gaps between consecutive crossings."""

    def __init__(self, order: List[int], gaps: List[Word]):
        self.order = order
        self.gaps = gaps

    def index(self, cid: int) -> int:
        return self.order.index(cid)

    def next_of(self, cid: int) -> int:
        return self.order[(self.index(cid) + 1) % len(self.order)]

    def gap_from(self, cid: int) -> Word:
        return self.gaps[self.index(cid)]

    def remove_adjacent_pair(self, cid_a: int, cid_b: int):
        ia = self.index(cid_a)
        n = len(self.order)
        assert self.order[(ia + 1) % n] == cid_b
        ib = (ia + 1) % n
        prev = (ia - 1) % n
        merged = _wconcat(_wconcat(self.gaps[prev], self.gaps[ia]),
                          self.gaps[ib])
        if n == 2:
            self.order, self.gaps = [], []
            return
        keep = [k for k in range(n) if k not in (ia, ib)]
        new_gaps = []
        for k in keep:
            new_gaps.append(merged if k == prev else self.gaps[k])
        self.order = [self.order[k] for k in keep]
        self.gaps = new_gaps


def _build_rings(lifted: _LiftedCurve, crossings, which: int) -> Dict[int, _Ring]:
    rings: Dict[int, _Ring] = {}
    for ci in range(len(lifted.components)):
        events = []
        for cid, rec in enumerate(crossings):
            pos = rec[which]
            if pos[0] == ci:
                events.append((pos[1:], ("x", cid)))
        for pos, letter in lifted.letters[ci]:
            events.append((pos[1:], ("l", letter)))
        events.sort(key=lambda kv: kv[0])
        order = [payload for _, (tag, payload) in events if tag == "x"]
        if not order:
            continue
        gaps: List[Word] = []
        n = len(events)
        xs = [k for k in range(n) if events[k][1][0] == "x"]
        for a_i, b_i in zip(xs, xs[1:] + [xs[0] + n]):
            word = []
            for k in range(a_i + 1, b_i):
                tag, payload = events[k % n][1]
                if tag == "l":
                    word.append(payload)
            gaps.append(reduce_word(word))
        rings[ci] = _Ring(order, gaps)
    return rings


def oracle_flat_intersection(c1: FlatCurve, c2: FlatCurve) -> int:
    """Geometric intersection number of two flat polylines.

    Counts the transverse crossings of the lifted curves on the torus
    double cover, cancels every pair of crossings that is adjacent along
    both curves and has vanishing loop winding (a bigon), and returns
    half of what remains.  Raises NotEmbedded for degenerate input.
    """
    if c1 == c2:
        return 0  # a simple closed curve is disjoint from a pushoff of itself
    la, lb = _LiftedCurve(c1), _LiftedCurve(c2)
    for lifted in (la, lb):
        comps = [seg for comp in lifted.components for seg in comp]
        for i in range(len(comps)):
            for j in range(i + 1, len(comps)):
                if segment_intersection(*comps[i], *comps[j]) is not None:
                    raise NotEmbedded("polyline is not embedded")
    crossings = (_interior_crossings(la, lb) + _junction_crossings(la, lb)
                 + _vertex_crossings(la, lb))
    if not crossings:
        return 0
    rings1 = _build_rings(la, crossings, 0)
    rings2 = _build_rings(lb, crossings, 1)
    signs = {cid: rec[2] for cid, rec in enumerate(crossings)}
    comp1_of = {cid: rec[0][0] for cid, rec in enumerate(crossings)}
    comp2_of = {cid: rec[1][0] for cid, rec in enumerate(crossings)}

    changed = True
    while changed:
        changed = False
        for ci, ring1 in rings1.items():
            for cid_a in list(ring1.order):
                if cid_a not in ring1.order:
                    continue
                cid_b = ring1.next_of(cid_a)
                if cid_b == cid_a:
                    continue
                if signs[cid_a] == signs[cid_b]:
                    continue
                if comp2_of[cid_a] != comp2_of[cid_b]:
                    continue
                ring2 = rings2[comp2_of[cid_a]]
                u = ring1.gap_from(cid_a)
                if ring2.next_of(cid_b) == cid_a:
                    if _wconcat(u, ring2.gap_from(cid_b)) == ():
                        ring1.remove_adjacent_pair(cid_a, cid_b)
                        _remove_pair_any_order(ring2, cid_b, cid_a)
                        changed = True
                        continue
                if cid_b in ring2.order and cid_a in ring2.order \
                        and ring2.next_of(cid_a) == cid_b:
                    if _wconcat(u, _winv(ring2.gap_from(cid_a))) == ():
                        ring1.remove_adjacent_pair(cid_a, cid_b)
                        _remove_pair_any_order(ring2, cid_a, cid_b)
                        changed = True
    remaining = sum(len(r.order) for r in rings1.values())
    assert remaining % 2 == 0, "odd crossing count upstairs"
    return remaining // 2


def _remove_pair_any_order(ring: _Ring, first: int, second: int):
    if ring.next_of(first) == second:
        ring.remove_adjacent_pair(first, second)
    else:
        ring.remove_adjacent_pair(second, first)
