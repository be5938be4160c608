"""Exact planar geometry helpers over the rationals.

Points are pairs of ``fractions.Fraction``.  Everything in this module is
exact; callers that need floats convert at the boundary.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Tuple

Point = Tuple[Fraction, Fraction]


def frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def pt(x, y) -> Point:
    return (frac(x), frac(y))


def sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1])


def cross(a: Point, b: Point) -> Fraction:
    return a[0] * b[1] - a[1] * b[0]


def orient(a: Point, b: Point, c: Point) -> Fraction:
    """Twice the signed area of triangle abc (positive for ccw)."""
    return cross(sub(b, a), sub(c, a))


def on_segment(p: Point, a: Point, b: Point) -> bool:
    """True if p lies on the closed segment ab."""
    if orient(a, b, p) != 0:
        return False
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def segment_intersection(a: Point, b: Point, c: Point, d: Point
                         ) -> Optional[Tuple[Fraction, Fraction, int]]:
    """Proper (interior-transverse) intersection of open segments ab and cd.

    Returns (t, u, sign) with intersection a + t*(b-a) = c + u*(d-c),
    0 < t < 1 and 0 < u < 1, or None.  ``sign`` is +1 when cd crosses ab
    from right to left as seen along ab.
    """
    r = sub(b, a)
    s = sub(d, c)
    denom = cross(r, s)
    if denom == 0:
        return None
    qp = sub(c, a)
    t = cross(qp, s) / denom
    u = cross(qp, r) / denom
    if not (0 < t < 1 and 0 < u < 1):
        return None
    return t, u, (1 if denom > 0 else -1)


def fraction_to_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def fraction_from_str(s: str) -> Fraction:
    return Fraction(s)
