"""Flat surfaces with polygon + edge-identification presentations.

The central object is the punctured pillowcase: a unit-circumference
cylinder of height 2 whose top and bottom boundary circles are sealed by
the orientation-reversing involutions

    top:     x  ~  2s - x   (mod 1)
    bottom:  x  ~  -2s - x  (mod 1)

for a shear parameter ``s``.  The two fixed points of each involution and
the midpoint of the gluing circle are punctures; the result is a sphere
with five punctures of total flat area exactly 2.  All coordinates are
``Fraction`` valued, so the construction is exact for rational ``s``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .errors import NotCylinderDecomposable, PointIsPuncture
from .geom import Point, frac, fraction_from_str, fraction_to_str, pt

__all__ = [
    "Mat2",
    "Pairing",
    "HalfTranslationSurface",
    "Cylinder",
    "build_pillowcase",
    "build_torus",
    "apply_matrix",
    "horizontal_cylinders",
    "normalize_point",
    "surface_to_json",
    "surface_from_json",
]


def mod1(x) -> Fraction:
    x = frac(x)
    n = x.numerator // x.denominator  # floor
    return x - n


@dataclass(frozen=True)
class Mat2:
    """2x2 matrix with exact rational entries."""

    a: Fraction
    b: Fraction
    c: Fraction
    d: Fraction

    @classmethod
    def of(cls, a, b, c, d) -> "Mat2":
        return cls(frac(a), frac(b), frac(c), frac(d))

    @classmethod
    def identity(cls) -> "Mat2":
        return cls.of(1, 0, 0, 1)

    @classmethod
    def shear(cls, t) -> "Mat2":
        """Horizontal shear (x, y) -> (x + t*y, y)."""
        return cls.of(1, t, 0, 1)

    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(self.a * other.a + self.b * other.c,
                    self.a * other.b + self.b * other.d,
                    self.c * other.a + self.d * other.c,
                    self.c * other.b + self.d * other.d)

    def apply(self, p: Point) -> Point:
        return (self.a * p[0] + self.b * p[1], self.c * p[0] + self.d * p[1])

    def is_shear(self) -> bool:
        return self.a == 1 and self.d == 1 and self.c == 0


@dataclass(frozen=True)
class Pairing:
    """Identification of two polygon edges.

    ``kind`` is "translation" (z -> z + c, mapping edge_a onto edge_b) or
    "flip" (z -> -z + c, a self-identification of edge_a, with
    edge_b == edge_a allowed and typical).
    """

    edge_a: int
    edge_b: int
    kind: str
    c: Point

    def map_point(self, p: Point) -> Point:
        if self.kind == "translation":
            return (p[0] + self.c[0], p[1] + self.c[1])
        return (self.c[0] - p[0], self.c[1] - p[1])

    def unmap_point(self, p: Point) -> Point:
        if self.kind == "translation":
            return (p[0] - self.c[0], p[1] - self.c[1])
        return (self.c[0] - p[0], self.c[1] - p[1])


@dataclass
class HalfTranslationSurface:
    """A single convex polygon with edge identifications and marked punctures.

    ``vertices`` run counterclockwise; edge k joins vertex k to vertex
    k+1 (cyclically).  ``family`` records how the surface was built so
    that downstream code (meshing, cylinder queries) can use exact
    structure instead of re-deriving it.
    """

    vertices: List[Point]
    pairings: List[Pairing]
    punctures: List[Point]
    family: Dict[str, object] = field(default_factory=dict)

    def edge(self, k: int) -> Tuple[Point, Point]:
        return self.vertices[k], self.vertices[(k + 1) % len(self.vertices)]

    def area(self) -> Fraction:
        tot = Fraction(0)
        n = len(self.vertices)
        for k in range(n):
            a, b = self.vertices[k], self.vertices[(k + 1) % n]
            tot += a[0] * b[1] - a[1] * b[0]
        return tot / 2

    def pairing_for_edge(self, k: int) -> Pairing:
        for pr in self.pairings:
            if pr.edge_a == k or pr.edge_b == k:
                return pr
        raise ValueError(f"edge {k} has no pairing")

    def to_dict(self) -> dict:
        def p2s(p: Point):
            return [fraction_to_str(p[0]), fraction_to_str(p[1])]

        fam = dict(self.family)
        for key, val in fam.items():
            if isinstance(val, Fraction):
                fam[key] = fraction_to_str(val)
        return {
            "vertices": [p2s(v) for v in self.vertices],
            "pairings": [{"edge_a": pr.edge_a, "edge_b": pr.edge_b,
                          "kind": pr.kind, "c": p2s(pr.c)} for pr in self.pairings],
            "punctures": [p2s(p) for p in self.punctures],
            "family": fam,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HalfTranslationSurface":
        def s2p(v) -> Point:
            return (fraction_from_str(v[0]), fraction_from_str(v[1]))

        fam = dict(d.get("family", {}))
        if "s" in fam and isinstance(fam["s"], str):
            fam["s"] = fraction_from_str(fam["s"])
        for key in ("width", "height"):
            if key in fam and isinstance(fam[key], str):
                fam[key] = fraction_from_str(fam[key])
        return cls(
            vertices=[s2p(v) for v in d["vertices"]],
            pairings=[Pairing(p["edge_a"], p["edge_b"], p["kind"], s2p(p["c"]))
                      for p in d["pairings"]],
            punctures=[s2p(p) for p in d["punctures"]],
            family=fam,
        )


def surface_to_json(surface: HalfTranslationSurface) -> str:
    return json.dumps(surface.to_dict(), indent=2, sort_keys=True)


def surface_from_json(text: str) -> HalfTranslationSurface:
    return HalfTranslationSurface.from_dict(json.loads(text))


def build_pillowcase(s) -> HalfTranslationSurface:
    """The five-punctured pillowcase with shear parameter ``s``.

    The fundamental polygon is the rectangle [0,1] x [-1,1].  The top and
    bottom edges fold onto themselves; the vertical sides are glued by a
    unit horizontal translation.  Punctures sit at the four fold fixed
    points and at (0, 0).
    """
    s = frac(s)
    x_t = mod1(2 * s)
    x_b = mod1(-2 * s)

    verts: List[Point] = [pt(0, -1)]
    if 0 < x_b < 1:
        verts.append((x_b, frac(-1)))
    verts.append(pt(1, -1))
    verts.append(pt(1, 1))
    if 0 < x_t < 1:
        verts.append((x_t, frac(1)))
    verts.append(pt(0, 1))

    def edge_index(a: Point, b: Point) -> int:
        for k in range(len(verts)):
            if verts[k] == a and verts[(k + 1) % len(verts)] == b:
                return k
        raise AssertionError("edge not found")

    pairings: List[Pairing] = []
    # bottom fold(s): x ~ -2s - x (mod 1)
    if 0 < x_b < 1:
        k = edge_index(pt(0, -1), (x_b, frac(-1)))
        pairings.append(Pairing(k, k, "flip", (x_b, frac(-2))))
        k = edge_index((x_b, frac(-1)), pt(1, -1))
        pairings.append(Pairing(k, k, "flip", (x_b + 1, frac(-2))))
    else:
        k = edge_index(pt(0, -1), pt(1, -1))
        pairings.append(Pairing(k, k, "flip", pt(1, -2)))
    # right side glued to left side by translation (0,y) -> (1,y)
    k_right = edge_index(pt(1, -1), pt(1, 1))
    k_left = edge_index(pt(0, 1), pt(0, -1))
    pairings.append(Pairing(k_left, k_right, "translation", pt(1, 0)))
    # top fold(s): x ~ 2s - x (mod 1)
    if 0 < x_t < 1:
        k = edge_index(pt(1, 1), (x_t, frac(1)))
        pairings.append(Pairing(k, k, "flip", (x_t + 1, frac(2))))
        k = edge_index((x_t, frac(1)), pt(0, 1))
        pairings.append(Pairing(k, k, "flip", (x_t, frac(2))))
    else:
        k = edge_index(pt(1, 1), pt(0, 1))
        pairings.append(Pairing(k, k, "flip", pt(1, 2)))

    punctures = [
        pt(0, 0),
        (mod1(-s), frac(-1)),
        (mod1(-s + Fraction(1, 2)), frac(-1)),
        (mod1(s), frac(1)),
        (mod1(s + Fraction(1, 2)), frac(1)),
    ]
    return HalfTranslationSurface(verts, pairings, punctures,
                                  family={"kind": "pillowcase", "s": s})


def build_torus(width, height) -> HalfTranslationSurface:
    """Flat torus [0,width] x [0,height] with opposite sides glued."""
    w, h = frac(width), frac(height)
    verts = [pt(0, 0), (w, frac(0)), (w, h), (frac(0), h)]
    pairings = [
        Pairing(0, 2, "translation", (frac(0), h)),   # bottom -> top
        Pairing(3, 1, "translation", (w, frac(0))),   # left -> right
    ]
    return HalfTranslationSurface(verts, pairings, [],
                                  family={"kind": "torus", "width": w, "height": h})


def apply_matrix(surface: HalfTranslationSurface, m: Mat2) -> HalfTranslationSurface:
    """Apply a linear map to the flat structure.

    Translation parameters transform by c -> m c and flip parameters
    likewise, so the identifications of the image polygon are exact.  For
    a horizontal shear of the pillowcase family the image is re-cut to
    the standard rectangular fundamental domain (the shear preserves
    horizontal lines, so re-wrapping x mod 1 is an isometry onto the
    standard picture with shear parameter s + t).
    """
    fam = surface.family
    if fam.get("kind") == "pillowcase" and m.is_shear():
        return build_pillowcase(frac(fam["s"]) + m.b)
    verts = [m.apply(v) for v in surface.vertices]
    pairings = [Pairing(p.edge_a, p.edge_b, p.kind, m.apply(p.c))
                for p in surface.pairings]
    punctures = [m.apply(p) for p in surface.punctures]
    new_fam = {"kind": "polygon", "parent": fam.get("kind", "polygon")}
    return HalfTranslationSurface(verts, pairings, punctures, new_fam)


@dataclass(frozen=True)
class Cylinder:
    """A maximal horizontal cylinder: a band of closed horizontal leaves."""

    y_low: Fraction
    y_high: Fraction
    circumference: Fraction
    core_y: Fraction

    @property
    def height(self) -> Fraction:
        return self.y_high - self.y_low

    @property
    def modulus(self) -> Fraction:
        return self.height / self.circumference


def _trace_horizontal(surface: HalfTranslationSurface, start: Point,
                      budget: int = 1000) -> Fraction:
    """Circumference of the closed horizontal leaf through ``start``.

    Follows the leaf to the right, hopping through edge identifications.
    Raises NotCylinderDecomposable if it fails to close within budget, and
    PointIsPuncture if the leaf runs into a puncture.
    """
    verts = surface.vertices
    n = len(verts)
    state = (start, 1)  # (point, direction)
    length = Fraction(0)
    for step in range(budget):
        p, direction = state
        y = p[1]
        # exact exit point of the horizontal ray from p
        best_x: Optional[Fraction] = None
        best_edge = -1
        for k in range(n):
            a, b = verts[k], verts[(k + 1) % n]
            if a[1] == b[1]:
                continue
            lo, hi = min(a[1], b[1]), max(a[1], b[1])
            if not (lo < y < hi):
                continue
            t = (y - a[1]) / (b[1] - a[1])
            x_e = a[0] + t * (b[0] - a[0])
            if direction > 0:
                if x_e > p[0] and (best_x is None or x_e < best_x):
                    best_x, best_edge = x_e, k
            else:
                if x_e < p[0] and (best_x is None or x_e > best_x):
                    best_x, best_edge = x_e, k
        if best_x is None:
            raise NotCylinderDecomposable("horizontal leaf left the polygon")
        if step > 0 and y == start[1] and direction == 1 \
                and min(p[0], best_x) <= start[0] <= max(p[0], best_x):
            return length + abs(start[0] - p[0])
        for q in surface.punctures:
            if q[1] == y and min(p[0], best_x) < q[0] < max(p[0], best_x):
                raise PointIsPuncture(f"leaf at height {y} hits puncture {q}")
        length += abs(best_x - p[0])
        hit = (best_x, y)
        pr = surface.pairing_for_edge(best_edge)
        if pr.kind == "translation":
            if pr.edge_a == best_edge:
                nxt = pr.map_point(hit)
            else:
                nxt = pr.unmap_point(hit)
            ndir = direction
        else:
            nxt = pr.map_point(hit)
            ndir = -direction
        for q in surface.punctures:
            if q == nxt:
                raise PointIsPuncture(f"leaf hits puncture {q}")
        state = (nxt, ndir)
        if nxt == start and ndir == 1:
            return length
    raise NotCylinderDecomposable("leaf did not close within step budget")


def horizontal_cylinders(surface: HalfTranslationSurface) -> List[Cylinder]:
    """Decompose the surface into maximal horizontal cylinders.

    Singular heights are those carrying a puncture or a polygon vertex in
    the interior height range.  Between consecutive singular heights every
    leaf is closed with the same circumference; adjacent bands merge when
    the level between them is nonsingular on the traced leaf.
    """
    ys = sorted({v[1] for v in surface.vertices} | {p[1] for p in surface.punctures})
    levels = list(ys)  # includes outer boundary levels
    bands: List[Cylinder] = []
    for lo, hi in zip(levels[:-1], levels[1:]):
        y_m = (lo + hi) / 2
        # start strictly inside the polygon on this level
        start = _level_interior_point(surface, y_m)
        circ = _trace_horizontal(surface, start)
        bands.append(Cylinder(lo, hi, circ, y_m))
    # merge bands across nonsingular levels
    merged: List[Cylinder] = []
    for band in bands:
        if merged and merged[-1].y_high == band.y_low \
                and merged[-1].circumference == band.circumference \
                and not _level_is_singular(surface, band.y_low):
            prev = merged.pop()
            merged.append(Cylinder(prev.y_low, band.y_high, band.circumference,
                                   (prev.y_low + band.y_high) / 2))
        else:
            merged.append(band)
    return merged


def _level_interior_point(surface: HalfTranslationSurface, y: Fraction) -> Point:
    xs = []
    verts = surface.vertices
    n = len(verts)
    for k in range(n):
        a, b = verts[k], verts[(k + 1) % n]
        if a[1] == b[1]:
            continue
        lo, hi = min(a[1], b[1]), max(a[1], b[1])
        if lo < y < hi:
            t = (y - a[1]) / (b[1] - a[1])
            xs.append(a[0] + t * (b[0] - a[0]))
    xs.sort()
    if len(xs) < 2:
        raise NotCylinderDecomposable(f"no interior at height {y}")
    bad = {p[0] for p in surface.punctures if p[1] == y}
    x0, x1 = xs[0], xs[-1]
    cand = (x0 + x1) / 2
    shift = (x1 - x0) / 4
    while cand in bad:
        cand = cand + shift
        shift /= 3
    return (cand, y)


def _level_is_singular(surface: HalfTranslationSurface, y: Fraction) -> bool:
    if any(p[1] == y for p in surface.punctures):
        return True
    y_all = sorted(v[1] for v in surface.vertices)
    if y in (y_all[0], y_all[-1]):
        return True
    return any(v[1] == y for v in surface.vertices)


def normalize_point(p, surface: HalfTranslationSurface) -> Point:
    """Canonical representative of a point of the pillowcase.

    Accepts any (x, y) in the plane, folds it into the fundamental
    rectangle, and returns the lexicographically smallest representative.
    Raises PointIsPuncture on punctures.
    """
    fam = surface.family
    if fam.get("kind") != "pillowcase":
        raise ValueError("normalize_point is defined for the pillowcase family")
    s = frac(fam["s"])
    x, y = frac(p[0]), frac(p[1])
    # fold y into [-1, 1] using the two boundary involutions
    while not (-1 <= y <= 1):
        if y > 1:
            x, y = 2 * s - x, 2 - y
        else:
            x, y = -2 * s - x, -2 - y
    x = mod1(x)
    if y == 1:
        alt = mod1(2 * s - x)
        x = min(x, alt)
    elif y == -1:
        alt = mod1(-2 * s - x)
        x = min(x, alt)
    cand = (x, y)
    for q in surface.punctures:
        if q == cand:
            raise PointIsPuncture(f"{cand} is a puncture")
    return cand
