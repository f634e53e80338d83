from fractions import Fraction

import numpy as np
import pytest

from causalcz.dyadic import (
    BoundaryCube,
    HalfCube,
    RegionKind,
    RegionSet,
    boundary_cube_at,
    children,
    covering_family,
    enclosing_halfcube,
    halfcube_at,
    region,
)

F = Fraction


def unit_cube(n=1):
    return HalfCube(BoundaryCube(0, (0,) * n), 0)


def test_children_tile_and_roundtrip():
    c = unit_cube(1)
    kids = children(c)
    assert len(kids) == 4
    assert sum(k.volume() for k in kids) == c.volume()
    for k in kids:
        assert k.parent() == c
        assert c.contains_cube(k)


def test_children_n0():
    c = unit_cube(0)
    kids = children(c)
    boxes = sorted(k.t_interval() for k in kids)
    assert boxes == [(F(0), F(1, 2)), (F(1, 2), F(1))]


def test_carleson_parent_is_carleson():
    c = HalfCube(BoundaryCube(3, (5,)), 0)
    assert c.is_carleson and c.parent().is_carleson


def test_region_upper_lower():
    c = unit_cube(1)
    up = region(c, RegionKind.UPPER)
    assert up.boxes == (((F(1, 2), F(1)), (F(0), F(1))),)
    lo = region(c, RegionKind.LOWER)
    assert lo.boxes == (((F(0), F(1, 2)), (F(0), F(1))),)
    assert up.volume() + lo.volume() == c.volume()


def test_region_t_box_shapes():
    c = unit_cube(1)
    t = region(c, RegionKind.T)
    assert t.boxes == (((F(1, 2), F(2)), (F(-1), F(2))),)
    box = region(c, RegionKind.BOX)
    assert box.volume() == 6
    ell = region(c, RegionKind.L)
    assert ell.volume() == F(3, 2)


def test_sqcap_at_above_midheight_is_t_region():
    c = unit_cube(1)
    got = region(c, RegionKind.SQCAP_AT, at=(F(3, 4), F(1, 2)))
    want = region(c, RegionKind.T)
    assert got.volume() == want.volume() == F(9, 2)
    diff = got
    for b in want.boxes:
        diff = diff.subtract_box(b)
    assert diff.volume() == 0


def test_sqcap_at_below_midheight_volume():
    # ((1/4,2) x 3Q) minus the closed lower half over Q
    c = unit_cube(1)
    got = region(c, RegionKind.SQCAP_AT, at=(F(1, 4), F(1, 2)))
    assert got.volume() == F(21, 4) - F(1, 4)
    assert not got.contains_point((F(3, 8), F(1, 2)))   # inside Q^l: removed
    assert got.contains_point((F(3, 8), F(3, 2)))       # beside Q: kept


def test_box_at_below_midheight():
    c = unit_cube(1)
    got = region(c, RegionKind.BOX_AT, at=(F(1, 4), F(1, 2)))
    assert got.boxes == (((F(1, 4), F(2)), (F(-1), F(2))),)


def test_at_outside_cube_rejected():
    c = unit_cube(1)
    with pytest.raises(ValueError):
        region(c, RegionKind.SQCAP_AT, at=(F(3, 2), F(1, 2)))


def test_region_volume_monotonicity_random():
    rng = np.random.default_rng(7)
    for _ in range(40):
        n = int(rng.integers(0, 3))
        level = int(rng.integers(-2, 4))
        offs = tuple(int(rng.integers(0, 6)) for _ in range(n))
        c = HalfCube(BoundaryCube(level, offs), int(rng.integers(0, 5)))
        ell = c.side
        t = c.t0 + ell * F(int(rng.integers(1, 16)), 16)
        at = (t,) + tuple(lo + (hi - lo) / 2 for lo, hi in c.base.box())
        v_t = region(c, RegionKind.T).volume()
        v_sq = region(c, RegionKind.SQCAP).volume()
        v_at = region(c, RegionKind.SQCAP_AT, at=at).volume()
        assert v_t <= v_at <= v_sq
        v_box = region(c, RegionKind.BOX).volume()
        v_bat = region(c, RegionKind.BOX_AT, at=at).volume()
        assert v_t <= v_bat <= v_box
        # monotone non-increasing in t
        t2 = c.t0 + ell * F(int(rng.integers(1, 16)), 16)
        at2 = (t2,) + at[1:]
        v_at2 = region(c, RegionKind.SQCAP_AT, at=at2).volume()
        if t2 >= t:
            assert v_at2 <= v_at
        else:
            assert v_at2 >= v_at


def test_sqcap_at_volume_against_monte_carlo():
    c = unit_cube(1)
    got = region(c, RegionKind.SQCAP_AT, at=(F(1, 4), F(1, 2)))
    rng = np.random.default_rng(3)
    pts = rng.uniform([0.0, -1.0], [2.0, 2.0], size=(200_000, 2))
    inside = np.fromiter(
        (got.contains_point((F(p[0]).limit_denominator(1 << 30),
                             F(p[1]).limit_denominator(1 << 30)))
         for p in pts[:4000]),
        dtype=bool,
    )
    est = inside.mean() * 6.0
    assert abs(est - float(got.volume())) < 0.25


def test_whitney_is_upper_half_of_carleson():
    q = BoundaryCube(1, (1,))
    ca = region(q, RegionKind.CARLESON)
    wh = region(q, RegionKind.WHITNEY)
    up_of_ca = ca.intersect_box(((q.side / 2, q.side), (F(0), F(10))))
    assert wh.volume() == up_of_ca.volume() == q.side ** 2 / 2


def test_whitney_regions_tile_carleson_box():
    root = BoundaryCube(0, (0,))
    total = F(0)
    level_cubes = [root]
    for _ in range(5):
        total += sum(region(q, RegionKind.WHITNEY).volume() for q in level_cubes)
        level_cubes = [c for q in level_cubes for c in q.children()]
    # tiles everything above t = 2^-5
    assert total == 1 - F(1, 32)


def test_tilde_whitney_region():
    q = BoundaryCube(0, (0,))
    tw = region(q, RegionKind.TILDE_W)
    assert tw.boxes == (((F(1, 2), F(3, 2)), (F(-1, 2), F(3, 2))),)


def test_enlarge3_of_carleson_cube():
    c = HalfCube(BoundaryCube(2, (1,)), 0)   # ell = 1/4, Q = (1/4, 1/2)
    got = region(c, RegionKind.ENLARGE3)
    assert got.boxes == (((F(0), F(1, 2)), (F(0), F(3, 4))),)


def test_covering_family_n0():
    sup = HalfCube(BoundaryCube(0, ()), 0)
    fam = covering_family(sup, 3)
    ivs = sorted(c.t_interval() for c in fam)
    assert ivs == [(0, 1), (1, 2), (2, 4), (4, 8)]
    # support within 3R for every member
    for c in fam:
        lo, hi = c.t_interval()
        ell = hi - lo
        assert lo - ell <= 0 and 1 <= hi + ell
    assert covering_family(sup, 0) == [sup]


def test_covering_family_disjoint_tiling():
    sup = HalfCube(BoundaryCube(1, (0, 1)), 2)
    fam = covering_family(sup, 3)
    vol = sum(c.volume() for c in fam)
    assert vol == sup.ancestor(sup.level - 3).volume()
    boxes = [c.box() for c in fam]
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            inter = RegionSet.from_box(boxes[i]).intersect_box(boxes[j])
            assert inter.volume() == 0


def test_locators_and_lca():
    p = (F(5, 8), F(3, 8))
    c = halfcube_at(2, p)
    assert c.contains_point(p)
    assert boundary_cube_at(3, (F(5, 8),)).offsets == (5,)
    a = halfcube_at(3, (F(1, 8), F(1, 8)))
    b = halfcube_at(3, (F(7, 8), F(1, 8)))
    lca = enclosing_halfcube([a, b])
    assert lca.contains_cube(a) and lca.contains_cube(b)
    assert lca.level == 0


def test_regionset_subtract_exact():
    r = RegionSet.from_box(((F(0), F(2)), (F(0), F(2))))
    r2 = r.subtract_box(((F(0), F(1)), (F(0), F(1))))
    assert r2.volume() == 3
    r3 = r2.subtract_box(((F(1), F(2)), (F(1), F(2))))
    assert r3.volume() == 2
    for i in range(len(r3.boxes)):
        for j in range(i + 1, len(r3.boxes)):
            assert RegionSet.from_box(r3.boxes[i]).intersect_box(
                r3.boxes[j]).volume() == 0


def test_offsets_must_be_nonnegative():
    with pytest.raises(ValueError):
        BoundaryCube(0, (-1,))
