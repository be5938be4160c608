from fractions import Fraction as F

import pytest

from pillowcase.errors import PointIsPuncture
from pillowcase.flat import (
    Mat2,
    apply_matrix,
    build_pillowcase,
    build_torus,
    horizontal_cylinders,
    normalize_point,
    surface_from_json,
    surface_to_json,
)


@pytest.mark.parametrize("s", [0, F(1, 8), F(1, 4), F(1, 2), F(3, 8), 1, F(-1, 8)])
def test_area_is_two(s):
    assert build_pillowcase(s).area() == 2


@pytest.mark.parametrize("s", [0, F(1, 8), F(1, 4)])
def test_punctures(s):
    surf = build_pillowcase(s)
    assert len(set(surf.punctures)) == 5
    # fold fixed points are fixed by the boundary involutions
    for (x, y) in surf.punctures:
        if y == 1:
            assert (2 * F(s) - x) % 1 == x % 1
        elif y == -1:
            assert (-2 * F(s) - x) % 1 == x % 1


def test_integer_shear_gives_same_identifications():
    a = build_pillowcase(0)
    b = build_pillowcase(1)
    # same punctures, same fold maps mod 1
    assert set(a.punctures) == set(b.punctures)
    for x in [F(1, 7), F(2, 5), F(9, 11)]:
        assert (2 * F(0) - x) % 1 == (2 * F(1) - x) % 1
        assert normalize_point((x, 1), a) == normalize_point((x, 1), b)
        assert normalize_point((x, -1), a) == normalize_point((x, -1), b)


def test_shear_composition():
    s0 = build_pillowcase(F(1, 8))
    m1 = Mat2.shear(F(1, 8))
    m2 = Mat2.shear(F(1, 4))
    once = apply_matrix(apply_matrix(s0, m1), m2)
    both = apply_matrix(s0, m2 @ m1)
    assert once.to_dict() == both.to_dict()
    assert once.family["s"] == F(1, 2)


@pytest.mark.parametrize("s", [0, F(1, 8), F(1, 4), F(1, 2)])
def test_two_horizontal_cylinders(s):
    cyls = horizontal_cylinders(build_pillowcase(s))
    assert len(cyls) == 2
    low, high = cyls
    assert (low.y_low, low.y_high) == (-1, 0)
    assert (high.y_low, high.y_high) == (0, 1)
    for c in cyls:
        assert c.circumference == 1
        assert c.height == 1
        assert c.modulus == 1


def test_torus_single_cylinder():
    cyls = horizontal_cylinders(build_torus(3, 5))
    assert len(cyls) == 1
    assert cyls[0].circumference == 3
    assert cyls[0].height == 5


def test_normalize_point_folds():
    surf = build_pillowcase(F(1, 8))
    # generic interior point is untouched up to x mod 1
    assert normalize_point((F(5, 4), F(1, 3)), surf) == (F(1, 4), F(1, 3))
    # reflection through the top fold: (x, y) ~ (2s - x, 2 - y)
    p = normalize_point((F(1, 16), F(17, 16)), surf)
    q = normalize_point((2 * F(1, 8) - F(1, 16), 2 - F(17, 16)), surf)
    assert p == q
    # boundary points use the smaller representative
    x = F(1, 16)
    alt = (2 * F(1, 8) - x) % 1
    assert normalize_point((max(x, alt), 1), surf) == (min(x, alt), F(1))


def test_normalize_point_rejects_punctures():
    surf = build_pillowcase(F(1, 8))
    with pytest.raises(PointIsPuncture):
        normalize_point((0, 0), surf)
    with pytest.raises(PointIsPuncture):
        normalize_point((F(1, 8), 1), surf)   # top fold fixed point
    with pytest.raises(PointIsPuncture):
        normalize_point((F(-1, 8), -1), surf)  # bottom fold fixed point


def test_involution_preserves_punctures():
    # (x, y) -> (-x, -y) followed by normalization permutes the punctures
    for s in [0, F(1, 8), F(1, 4)]:
        surf = build_pillowcase(s)
        images = set()
        for (x, y) in surf.punctures:
            try:
                images.add(normalize_point((-x, -y), surf))
            except PointIsPuncture:
                images.add("puncture")
        assert images == {"puncture"}


@pytest.mark.parametrize("s", [0, F(1, 8), F(1, 2)])
def test_json_roundtrip(s):
    surf = build_pillowcase(s)
    again = surface_from_json(surface_to_json(surf))
    assert again.to_dict() == surf.to_dict()
    assert again.family["s"] == F(s)
    assert again.area() == 2


def test_apply_matrix_generic_polygon():
    surf = build_torus(1, 1)
    m = Mat2.of(2, 1, 1, 1)
    image = apply_matrix(surf, m)
    assert image.area() == surf.area() * m.det()
    # translation vectors transform by the matrix
    assert image.pairings[0].c == m.apply(surf.pairings[0].c)
