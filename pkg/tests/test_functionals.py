from fractions import Fraction

import numpy as np
import pytest

from causalcz.dyadic import BoundaryCube
from causalcz.functionals import (
    BoundaryGridFunction,
    CubeSequence,
    area_functional,
    boundary_lp,
    carleson_dyadic,
    carleson_grid,
    carleson_multiplier_check,
    hl_maximal,
    nontangential_dyadic,
    tent_norms,
    whitney,
    whitney_sequence,
)
from causalcz.grid import GridFunction, ResolutionError, Window

F = Fraction


def win(n=1, J=4):
    return Window(BoundaryCube(0, (0,) * n), J)


def f_profile(window, N):
    """2^N on (0, 2^-N) x Q0, zero elsewhere."""
    box = ((F(0), F(1, 2 ** N)),) + window.root.box()
    return GridFunction.from_boxes(window, [(box, 2.0 ** N)])


def test_whitney_constant():
    w = win(1, 3)
    f = GridFunction.from_callable(lambda t, x: 2.5, w)
    for q in (1, 2, np.inf):
        for enlarged in (False, True):
            val = whitney(f, q, BoundaryCube(1, (0,)), enlarged=enlarged)
            if enlarged:
                # the enlarged region sticks out of the window where f = 0
                assert val <= 2.5 + 1e-12
            else:
                assert val == pytest.approx(2.5)


def test_whitney_profile_depths():
    N = 2
    w = win(1, 4)
    f = f_profile(w, N)
    # Whitney region at depth k < N is disjoint from the support
    for k in range(N):
        assert whitney(f, 2, BoundaryCube(k, (0,))) == 0.0
    # at depth k >= N the region sits inside the support
    for k in (N, N + 1):
        assert whitney(f, 2, BoundaryCube(k, (0,))) == pytest.approx(2.0 ** N)


def test_whitney_below_resolution_rejected():
    w = win(1, 3)
    f = GridFunction.zeros(w)
    with pytest.raises(ResolutionError):
        whitney(f, 2, BoundaryCube(3, (0,)))


def test_whitney_sequence_matches_single_and_is_monotone_in_q():
    rng = np.random.default_rng(0)
    w = win(1, 4)
    f = GridFunction(w, rng.uniform(0, 2, w.shape))
    s1 = whitney_sequence(f, 1)
    s2 = whitney_sequence(f, 2)
    sinf = whitney_sequence(f, np.inf)
    for cube, v2 in s2.data.items():
        assert v2 == pytest.approx(whitney(f, 2, cube), rel=1e-12)
        assert s1.get(cube) <= v2 + 1e-12 <= sinf.get(cube) + 2e-12
    # equality for cube-constant f
    g = GridFunction.from_callable(lambda t, x: 3.0, w)
    g1, ginf = whitney_sequence(g, 1), whitney_sequence(g, np.inf)
    for cube in g1.data:
        assert g1.get(cube) == pytest.approx(ginf.get(cube))


def test_carleson_of_ones_is_truncated_tiling():
    w = win(1, 4)
    ones = CubeSequence(w, {c: 1.0 for lvl in range(4)
                            for c in _cubes(w, lvl)})
    out = carleson_dyadic(ones)
    expected = 1.0 - 2.0 ** -w.depth   # Whitney regions tile above cell size
    assert np.allclose(out.values, expected)


def _cubes(w, depth):
    from causalcz.grid import window_boundary_cubes
    return window_boundary_cubes(w)[depth]


def test_carleson_single_entry():
    w = win(1, 4)
    s = CubeSequence(w, {w.root: 3.0})
    out = carleson_dyadic(s)
    # only the root contributes: value |Q0^w| * 3 / |Q0| = 3/2 everywhere
    assert np.allclose(out.values, 1.5)
    q = BoundaryCube(2, (1,))
    s2 = CubeSequence(w, {q: 1.0})
    out2 = carleson_dyadic(s2)
    # max at Q = q itself: |q^w|/|q| = ell/2 = 1/8
    on_cells = out2.values[4:8]
    assert np.allclose(on_cells, float(q.side / 2))
    assert out2.values.max() == pytest.approx(float(q.side / 2))


def test_carleson_profile_value():
    # C_D of the Whitney sequence of the concentrated profile is
    # 1 - 2^(N-J) at every boundary cell (truncated tail of the exact 1)
    N, J = 2, 5
    w = win(1, J)
    f = f_profile(w, N)
    out = carleson_dyadic(whitney_sequence(f, 2))
    assert np.allclose(out.values, 1.0 - 2.0 ** (N - J))


def test_nontangential_brute_force():
    rng = np.random.default_rng(4)
    w = win(1, 3)
    data = {}
    for depth in range(3):
        for c in _cubes(w, depth):
            data[c] = float(rng.uniform(0, 1))
    s = CubeSequence(w, data)
    out = nontangential_dyadic(s)
    for ix in range(w.cells_per_axis):
        x = (ix + 0.5) / w.cells_per_axis
        expected = max(
            v for c, v in data.items() if c.contains_point((x,))
        )
        assert out.values[ix] == pytest.approx(expected)


def test_nontangential_simple():
    w = win(1, 3)
    ones = CubeSequence(w, {c: 1.0 for d in range(3) for c in _cubes(w, d)})
    assert np.allclose(nontangential_dyadic(ones).values, 1.0)
    sides = CubeSequence(w, {c: float(c.side) for d in range(3)
                             for c in _cubes(w, d)})
    assert np.allclose(nontangential_dyadic(sides).values, 1.0)


def test_boundary_lp():
    w = win(1, 3)
    g = BoundaryGridFunction(w, np.ones(8))
    assert boundary_lp(g, 2) == pytest.approx(1.0)
    g2 = BoundaryGridFunction(w, 3 * np.ones(8))
    assert boundary_lp(g2, 2) == pytest.approx(3.0)
    rng = np.random.default_rng(1)
    vals = rng.uniform(0, 1, 8)
    g3 = BoundaryGridFunction(w, vals)
    assert boundary_lp(g3, 2) == pytest.approx(
        np.sqrt(np.sum(vals ** 2) / 8)
    )


def test_area_functional_center_value():
    w = win(1, 7)
    f = GridFunction.from_callable(lambda t, x: 1.0, w)
    out = area_functional(f, 1.0)
    ix = w.cells_per_axis // 2
    # exact cone integral at x = 1/2: 1 + ln 2
    assert out.values[ix] == pytest.approx(1.0 + np.log(2.0), rel=0.03)


def test_area_functional_crude_bound():
    w = win(1, 5)
    t0 = 0.5
    f = GridFunction.from_boxes(w, [(((F(1, 2), F(1)), (F(0), F(1))), 2.0)])
    out = area_functional(f, 1.0)
    mass = 2.0 * 0.5
    assert out.values.max() <= mass / t0 ** 1 + 1e-9


def test_hl_maximal_properties():
    w = win(1, 3)
    rng = np.random.default_rng(9)
    f = GridFunction(w, rng.uniform(0, 1, w.shape))
    m = hl_maximal(f)
    assert np.all(m.values >= f.values - 1e-15)
    c = GridFunction.from_callable(lambda t, x: 0.7, w)
    assert np.allclose(hl_maximal(c).values, 0.7)


def test_hl_maximal_single_cell_hand_computed():
    w = Window(BoundaryCube(0, ()), 2)
    vals = np.array([1.0, 0.0, 0.0, 0.0])
    m = hl_maximal(GridFunction(w, vals))
    assert np.allclose(m.values, [1.0, 0.5, 0.25, 0.25])


def test_tent_norms():
    w = win(1, 6)
    f = GridFunction.from_callable(lambda t, x: 1.0, w)
    tn = tent_norms(f)
    assert tn["Y"] == np.sqrt(0.5)  # the weighted sum underneath is exactly 1/2
    g = GridFunction(w, 3.0 * f.values)
    assert tent_norms(g)["Y"] == pytest.approx(3 * tn["Y"])
    rng = np.random.default_rng(2)
    h = GridFunction(w, rng.uniform(0, 1, w.shape))
    tnh = tent_norms(h)
    l2sq = np.sum(np.abs(h.values) ** 2) * float(w.cell_volume)
    assert tnh["Y"] * tnh["Ystar"] >= l2sq - 1e-12


def test_carleson_multiplier():
    w = win(1, 5)
    zero = GridFunction.zeros(w)
    assert carleson_multiplier_check(zero) == 0.0
    sqrt_t = GridFunction.from_callable(lambda t, x: np.sqrt(t), w, antialias=2)
    val = carleson_multiplier_check(sqrt_t)
    assert val == pytest.approx(1.0 - 2.0 ** -w.depth, rel=0.05)
    # E = 1 diverges logarithmically with J
    vals = []
    for J in (3, 4, 5):
        one = GridFunction.from_callable(lambda t, x: 1.0, Window(w.root, J))
        vals.append(carleson_multiplier_check(one))
    assert vals[0] < vals[1] < vals[2]


def test_carleson_norm_ordered_in_q():
    rng = np.random.default_rng(6)
    w = win(1, 4)
    f = GridFunction(w, rng.uniform(0, 1, w.shape))
    norms = [
        boundary_lp(carleson_dyadic(whitney_sequence(f, q)), 2)
        for q in (1, 2, np.inf)
    ]
    assert norms[0] <= norms[1] + 1e-12 <= norms[2] + 2e-12


def test_carleson_grid_matches_w1():
    rng = np.random.default_rng(8)
    w = win(1, 4)
    f = GridFunction(w, rng.uniform(0, 1, w.shape))
    a = carleson_grid(f)
    b = carleson_dyadic(whitney_sequence(f, 1))
    assert np.allclose(a.values, b.values)


def test_n0_functionals():
    w = win(0, 4)
    f = GridFunction.from_callable(lambda t: 1.0, w)
    s = whitney_sequence(f, 2)
    assert all(v == pytest.approx(1.0) for v in s.data.values())
    out = carleson_dyadic(s)
    assert float(out.values) == pytest.approx(1.0 - 2.0 ** -4)
    assert float(nontangential_dyadic(s).values) == pytest.approx(1.0)
