"""Simple closed curves on the five-punctured sphere, combinatorially.

Curves are stored as normal coordinates with respect to a fixed ideal
triangulation of the pillowcase: 5 punctures, 9 edges, 6 triangles.  In
the flat picture (shear 0) the punctures are

    P0 = (0, 0)      the cylinder gluing point
    P1 = (0, -1)     P2 = (1/2, -1)     bottom fold points
    P3 = (0, 1)      P4 = (1/2, 1)      top fold points

and the edges are

    b   = [0,1/2] x {-1}        (P1 P2, the bottom seam)
    t   = [0,1/2] x {+1}        (P3 P4, the top seam)
    l1  = {0} x [-1,0]          (P1 P0)
    l2  = {0} x [0,1]           (P0 P3)
    r   = {1/2} x [-1,1]        (P2 P4)
    dA1 = (0,0)-(1/2,-1)        (P0 P2)
    dA2 = (0,0)-(1/2,+1)        (P0 P4)
    dB1 = (1,0)-(1/2,-1)        (P0 P2, the other side)
    dB2 = (1,0)-(1/2,+1)        (P0 P4, the other side)

Every edge joins two punctures, so the lift of the dual graph to the
universal cover is a tree.  Consequently a cyclic sequence of edge
crossings with no backtrack (no immediate recrossing of the same edge) is
already in minimal position with respect to the edge system, which is
what makes the intersection and twist routines below exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple

from .errors import InvalidCurve

__all__ = [
    "NormalCurve",
    "WeightedMulticurve",
    "curve_from_name",
    "intersection_number",
    "apply_multitwist",
    "ivanov_bounds",
    "twist_limit",
    "class_words",
    "NAMED_CURVES",
]

EDGE_NAMES = ("b", "t", "l1", "l2", "r", "dA1", "dA2", "dB1", "dB2")
E_B, E_T, E_L1, E_L2, E_R, E_DA1, E_DA2, E_DB1, E_DB2 = range(9)

# Each triangle is a tuple of three (edge, reversed) sides in ccw order;
# side i runs from corner i to corner i+1.  An edge appears unreversed in
# exactly one triangle (its left side) and reversed in exactly one (right).
TRIANGLES: Tuple[Tuple[Tuple[int, bool], ...], ...] = (
    ((E_L1, True), (E_B, False), (E_DA1, True)),    # A1 = (P0 P1 P2)
    ((E_DA1, False), (E_R, False), (E_DA2, True)),  # A2 = (P0 P2 P4)
    ((E_DA2, False), (E_T, True), (E_L2, True)),    # A3 = (P0 P4 P3)
    ((E_DB1, False), (E_B, True), (E_L1, False)),   # B1 = (P0 P2 P1)
    ((E_DB2, False), (E_R, True), (E_DB1, True)),   # B2 = (P0 P4 P2)
    ((E_L2, False), (E_T, False), (E_DB2, True)),   # B3 = (P0 P3 P4)
)

N_EDGES = 9
N_TRIANGLES = 6

# LEFT[e] / RIGHT[e]: triangle where edge e appears unreversed / reversed.
LEFT = [-1] * N_EDGES
RIGHT = [-1] * N_EDGES
# SIDE_IN[(t, e)] = (side position, reversed)
SIDE_IN: Dict[Tuple[int, int], Tuple[int, bool]] = {}
for _t, _sides in enumerate(TRIANGLES):
    for _s, (_e, _rev) in enumerate(_sides):
        SIDE_IN[(_t, _e)] = (_s, _rev)
        if _rev:
            RIGHT[_e] = _t
        else:
            LEFT[_e] = _t
assert all(x >= 0 for x in LEFT + RIGHT)

Step = Tuple[int, int]  # (edge, direction); +1 crosses left->right triangle


def step_target(step: Step) -> int:
    e, d = step
    return RIGHT[e] if d > 0 else LEFT[e]


def step_source(step: Step) -> int:
    e, d = step
    return LEFT[e] if d > 0 else RIGHT[e]


def reverse_itinerary(itin: Sequence[Step]) -> List[Step]:
    return [(e, -d) for (e, d) in reversed(itin)]


def _shared_corner(t: int, e1: int, e2: int) -> int:
    """Corner position of triangle t where edges e1 and e2 meet."""
    s1, _ = SIDE_IN[(t, e1)]
    s2, _ = SIDE_IN[(t, e2)]
    if (s1 + 1) % 3 == s2:
        return s2
    if (s2 + 1) % 3 == s1:
        return s1
    raise AssertionError("edges do not meet in this triangle")


def _end_at_corner(t: int, e: int, corner: int) -> int:
    """Which end of edge e (0 = start, 1 = end of its orientation) sits
    at the given corner of triangle t."""
    s, rev = SIDE_IN[(t, e)]
    if corner == s:
        return 1 if rev else 0
    if corner == (s + 1) % 3:
        return 0 if rev else 1
    raise AssertionError("edge not adjacent to corner")


def _is_left_of_travel(end: int, step: Step) -> bool:
    """Is the given end of the crossed edge on the left of the travel
    direction through ``step``?  Crossing into the right triangle puts
    the edge's head on the traveller's left."""
    _, d = step
    return end == (1 if d > 0 else 0)


@dataclass(frozen=True)
class NormalCurve:
    """A multicurve in normal position, given by its 9 edge weights."""

    weights: Tuple[int, ...]

    def __post_init__(self):
        w = tuple(int(x) for x in self.weights)
        if len(w) != N_EDGES or any(x < 0 for x in w):
            raise InvalidCurve("need 9 nonnegative edge weights")
        object.__setattr__(self, "weights", w)
        for t in range(N_TRIANGLES):
            for c in range(3):
                if self._corner_count(t, c) < 0:
                    raise InvalidCurve(
                        f"triangle {t} corner {c}: matching condition fails")

    def _side_weight(self, t: int, s: int) -> int:
        return self.weights[TRIANGLES[t][s][0]]

    def _corner_count(self, t: int, c: int) -> int:
        a = self._side_weight(t, (c - 1) % 3)
        b = self._side_weight(t, c)
        opp = self._side_weight(t, (c + 1) % 3)
        n2 = a + b - opp
        if n2 % 2:
            raise InvalidCurve(f"triangle {t}: odd corner coordinate")
        return n2 // 2

    def is_empty(self) -> bool:
        return all(x == 0 for x in self.weights)

    def total_weight(self) -> int:
        return sum(self.weights)

    def components(self) -> List[List[Step]]:
        return trace_components(self)

    def to_dict(self) -> dict:
        return {"weights": list(self.weights)}

    @classmethod
    def from_dict(cls, d: dict) -> "NormalCurve":
        return cls(tuple(d["weights"]))

    def __repr__(self):
        pairs = ", ".join(f"{n}={w}" for n, w in zip(EDGE_NAMES, self.weights) if w)
        return f"NormalCurve({pairs or 'empty'})"


NAMED_CURVES: Dict[str, Tuple[int, ...]] = {
    # core of the lower horizontal cylinder, the circle y = -1/2
    "alpha": (0, 0, 1, 0, 1, 1, 0, 1, 0),
    # core of the upper horizontal cylinder, the circle y = +1/2
    "beta": (0, 0, 0, 1, 1, 0, 1, 0, 1),
    # small loop enclosing the punctures P0 and P1
    "eta": (1, 0, 0, 1, 0, 1, 1, 1, 1),
    # vertical circle x = 1/4 (closed up through both folds)
    "nu": (1, 1, 0, 0, 0, 1, 1, 1, 1),
}

# Oriented edge itineraries of the cylinder cores, traversed in the +x
# direction.  These drive the twist surgery.
ALPHA_LOOP: Tuple[Step, ...] = ((E_L1, 1), (E_DA1, -1), (E_R, 1), (E_DB1, -1))
BETA_LOOP: Tuple[Step, ...] = ((E_L2, 1), (E_DA2, 1), (E_R, 1), (E_DB2, 1))


def curve_from_name(name: str) -> NormalCurve:
    try:
        return NormalCurve(NAMED_CURVES[name])
    except KeyError:
        raise KeyError(f"unknown curve {name!r}; have {sorted(NAMED_CURVES)}")


def trace_components(curve: NormalCurve) -> List[List[Step]]:
    """Split a normal multicurve into its cyclic edge itineraries.

    Crossing points on edge e are indexed 0..w_e-1 from the edge's start;
    inside each triangle the points pair up around corners innermost
    first.  Each component is reported once, with an arbitrary but fixed
    orientation.
    """
    w = curve.weights
    corner = [[curve._corner_count(t, c) for c in range(3)] for t in range(N_TRIANGLES)]

    def advance(e: int, idx: int, d: int) -> Tuple[int, int, int]:
        t = step_target((e, d))
        s, rev = SIDE_IN[(t, e)]
        p = idx if not rev else w[e] - 1 - idx
        if p < corner[t][s]:
            s2 = (s - 1) % 3
            q = w[TRIANGLES[t][s2][0]] - 1 - p
        else:
            s2 = (s + 1) % 3
            q = w[e] - 1 - p
        e2, rev2 = TRIANGLES[t][s2]
        idx2 = q if not rev2 else w[e2] - 1 - q
        d2 = 1 if not rev2 else -1
        return e2, idx2, d2

    visited = set()
    comps: List[List[Step]] = []
    for e0 in range(N_EDGES):
        for i0 in range(w[e0]):
            for d0 in (1, -1):
                if (e0, i0, d0) in visited:
                    continue
                comp: List[Tuple[int, int, int]] = []
                state = (e0, i0, d0)
                while state not in visited:
                    visited.add(state)
                    comp.append(state)
                    state = advance(*state)
                assert state == comp[0], "trace did not close on its start"
                for (e, i, d) in comp:
                    visited.add((e, i, -d))
                comps.append([(e, d) for (e, i, d) in comp])
    assert sum(len(c) for c in comps) == curve.total_weight()
    return comps


def _corridor_sides(itin_i: Sequence[Step], itin_j: Sequence[Step],
                    i: int, j: int, length: int):
    """Analyse the maximal shared corridor starting at (i, j).

    Returns (crossed, left_at_entry) where ``crossed`` says whether the
    two strands exchange sides along the corridor (a genuine crossing)
    and ``left_at_entry`` whether strand I enters on the left of the
    common travel direction.
    """
    m, n = len(itin_i), len(itin_j)
    first = itin_i[i % m]
    t_b = step_source(first)
    prev_i = itin_i[(i - 1) % m]
    prev_j = itin_j[(j - 1) % n]
    corner_b_i = _shared_corner(t_b, first[0], prev_i[0])
    side = _end_at_corner(t_b, first[0], corner_b_i)
    left_entry = _is_left_of_travel(side, first)
    for k in range(length - 1):
        cur = itin_i[(i + k) % m]
        nxt = itin_i[(i + k + 1) % m]
        t = step_target(cur)
        x = _shared_corner(t, cur[0], nxt[0])
        if side == _end_at_corner(t, cur[0], x):
            side = _end_at_corner(t, nxt[0], x)
        else:
            side = 1 - _end_at_corner(t, nxt[0], x)
    last = itin_i[(i + length - 1) % m]
    t_f = step_target(last)
    next_i = itin_i[(i + length) % m]
    corner_f_i = _shared_corner(t_f, last[0], next_i[0])
    side_f = _end_at_corner(t_f, last[0], corner_f_i)
    return side != side_f, left_entry


def find_crossings(itin_i: Sequence[Step], itin_j: Sequence[Step],
                   same: bool = False) -> List[Tuple[int, int, int, int]]:
    """Essential crossings between two cyclic itineraries.

    Returns one record (i, j, orient, sign) per crossing, where i indexes
    the first shared step along ``itin_i`` of the corridor containing the
    crossing, j the matching position along ``itin_j`` (in the reversed
    itinerary when orient == -1), and sign is the crossing sign of J
    through I... sign = +1 when I passes from the right of J to the left
    of J, measured with J in its given orientation.
    """
    m, n = len(itin_i), len(itin_j)
    out: List[Tuple[int, int, int, int]] = []
    for orient in (1, -1):
        jo = list(itin_j) if orient == 1 else reverse_itinerary(itin_j)
        for i in range(m):
            for j in range(n):
                if itin_i[i] != jo[j]:
                    continue
                if itin_i[(i - 1) % m] == jo[(j - 1) % n]:
                    continue  # not the start of the corridor
                length = 1
                while length <= m + n and itin_i[(i + length) % m] == jo[(j + length) % n]:
                    length += 1
                if length > m + n:
                    continue  # parallel strands (same cyclic class), no crossing
                crossed, left_entry = _corridor_sides(itin_i, jo, i, j, length)
                if not crossed:
                    continue
                sign = (1 if not left_entry else -1) * orient
                out.append((i, j, orient, sign))
    return out


def intersection_number(c1, c2) -> Fraction:
    """Geometric intersection number.

    Accepts NormalCurve or WeightedMulticurve arguments; extends
    bilinearly over multicurve coefficients.  Parallel components (equal
    free homotopy classes) contribute zero, so i(c, c) == 0 for simple
    multicurves.
    """
    if isinstance(c1, WeightedMulticurve) or isinstance(c2, WeightedMulticurve):
        m1 = WeightedMulticurve.wrap(c1)
        m2 = WeightedMulticurve.wrap(c2)
        tot = Fraction(0)
        for a, u in m1.terms:
            for b, v in m2.terms:
                tot += a * b * intersection_number(u, v)
        return tot
    comps1 = trace_components(c1)
    if c1.weights == c2.weights:
        comps2 = comps1
        same_object = True
    else:
        comps2 = trace_components(c2)
        same_object = False
    total = 0
    for ci in comps1:
        for cj in comps2:
            total += len(find_crossings(ci, cj))
    if same_object:
        # every unordered self-crossing is seen once from each strand
        total //= 2
    return Fraction(total)


@dataclass(frozen=True)
class WeightedMulticurve:
    """Formal nonnegative combination of disjoint simple closed curves."""

    terms: Tuple[Tuple[Fraction, NormalCurve], ...]

    @classmethod
    def of(cls, *pairs) -> "WeightedMulticurve":
        return cls(tuple((Fraction(a), c) for a, c in pairs))

    @classmethod
    def wrap(cls, c) -> "WeightedMulticurve":
        if isinstance(c, WeightedMulticurve):
            return c
        return cls(((Fraction(1), c),))

    def scaled(self, k) -> "WeightedMulticurve":
        return WeightedMulticurve(tuple((Fraction(k) * a, c) for a, c in self.terms))

    def to_dict(self) -> dict:
        return {"terms": [[str(a), c.to_dict()] for a, c in self.terms]}

    @classmethod
    def from_dict(cls, d: dict) -> "WeightedMulticurve":
        return cls(tuple((Fraction(a), NormalCurve.from_dict(cd))
                         for a, cd in d["terms"]))


def _rotate_loop(loop: Sequence[Step], src_triangle: int) -> List[Step]:
    for k, step in enumerate(loop):
        if step_source(step) == src_triangle:
            return list(loop[k:]) + list(loop[:k])
    raise AssertionError("loop does not visit the requested triangle")


def _reduce_cyclic(itin: List[Step]) -> List[Step]:
    """Cancel immediate backtracks (crossing an edge and straight back),
    cyclically, until none remain."""
    steps = list(itin)
    changed = True
    while changed and steps:
        changed = False
        k = 0
        while k < len(steps) and len(steps) > 1:
            nxt = (k + 1) % len(steps)
            (e1, d1), (e2, d2) = steps[k], steps[nxt]
            if e1 == e2 and d1 == -d2:
                for idx in sorted((k, nxt), reverse=True):
                    steps.pop(idx)
                changed = True
                k = 0
            else:
                k += 1
    return steps


def _twist_component(itin: List[Step], n: int) -> List[Step]:
    """Image of one cyclic itinerary under the n-th power of the vertical
    shear (x, y) -> (x + n y, y), via loop insertion at each crossing
    with a cylinder core."""
    insertions: List[Tuple[int, List[Step]]] = []
    for loop in (ALPHA_LOOP, BETA_LOOP):
        for (i, j, orient, sign) in find_crossings(itin, loop):
            power = sign * n
            base = list(loop) if power > 0 else reverse_itinerary(loop)
            src = step_source(itin[i % len(itin)])
            rotated = _rotate_loop(base, src)
            insertions.append((i % len(itin), rotated * abs(power)))
    out: List[Step] = []
    for i, step in enumerate(itin):
        for pos, loop_steps in insertions:
            if pos == i:
                out.extend(loop_steps)
        out.append(step)
    return _reduce_cyclic(out)


def apply_multitwist(curve: NormalCurve, n: int) -> NormalCurve:
    """Act on a multicurve by the n-th power of the cylinder multitwist.

    The multitwist is the mapping class of the integer horizontal shear:
    one full right twist in each of the two horizontal cylinders per unit
    of n.  Exact, via itinerary surgery and backtrack reduction.
    """
    if n == 0 or curve.is_empty():
        return curve
    weights = [0] * N_EDGES
    for comp in trace_components(curve):
        reduced = _twist_component(comp, n)
        if not reduced:
            raise InvalidCurve("twist image of an essential curve vanished")
        for (e, _) in reduced:
            weights[e] += 1
    return NormalCurve(tuple(weights))


def ivanov_bounds(gamma: NormalCurve, delta: NormalCurve, n: int
                  ) -> Tuple[Fraction, Fraction]:
    """Two-sided bound for i(phi^n gamma, delta).

    With a = i(gamma, alpha), b = i(gamma, beta) and the same numbers for
    delta, the n-th multitwist power satisfies

        sum_j (|n|-2) i(gamma,c_j) i(c_j,delta) - i(gamma,delta)
            <= i(phi^n gamma, delta) <=
        sum_j |n| i(gamma,c_j) i(c_j,delta) + i(gamma,delta)

    where c_j runs over the two cylinder cores.
    """
    alpha = curve_from_name("alpha")
    beta = curve_from_name("beta")
    cross = sum(intersection_number(gamma, c) * intersection_number(c, delta)
                for c in (alpha, beta))
    direct = intersection_number(gamma, delta)
    lower = (abs(n) - 2) * cross - direct
    upper = abs(n) * cross + direct
    return lower, upper


def twist_limit(gamma: NormalCurve) -> WeightedMulticurve:
    """Limit of phi^n(gamma) / n: the cylinder cores weighted by their
    intersection numbers with gamma."""
    alpha = curve_from_name("alpha")
    beta = curve_from_name("beta")
    return WeightedMulticurve.of(
        (intersection_number(gamma, alpha), alpha),
        (intersection_number(gamma, beta), beta),
    )


# Crossing letters for the arc system that cuts the pillowcase to a disk:
# arc 1 = l1, arc 2 = l2, arc 3 = b, arc 4 = t.  The multiplier converts
# the itinerary direction into the geometric crossing sign used by the
# flat-picture routines (see flatcurves.crossing_word).
_ARC_OF_EDGE = {E_L1: (1, 1), E_L2: (2, -1), E_B: (3, -1), E_T: (4, -1)}


def class_words(curve: NormalCurve) -> List[Tuple[int, ...]]:
    """Free-group conjugacy words of the components of ``curve``.

    Each word is a tuple of signed arc letters (+-1..+-4) read along the
    component; the arcs cut the surface into a disk, so the word
    determines the free homotopy class up to conjugacy and inversion.
    """
    words = []
    for comp in trace_components(curve):
        letters = []
        for (e, d) in comp:
            if e in _ARC_OF_EDGE:
                arc, mult = _ARC_OF_EDGE[e]
                letters.append(arc * (d * mult))
        words.append(tuple(letters))
    return words
