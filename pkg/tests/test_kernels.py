import math
from fractions import Fraction

import numpy as np
import pytest

from causalcz.dyadic import BoundaryCube, HalfCube
from causalcz.kernels import (
    SingularityError,
    beurling,
    cz_constants,
    hilbert_boundary,
    hormander_constant,
    lipgraph,
    sample_triples,
)

F = Fraction


def test_beurling_value():
    k = beurling()
    # z = i (target (t,x) = (1,0)), w = 2i (source (2,0)): -(1/pi) i^-2 = 1/pi
    assert k.evaluate_full((1.0, 0.0), (2.0, 0.0)) == pytest.approx(1 / math.pi)


def test_beurling_modulus_identity():
    k = beurling()
    rng = np.random.default_rng(0)
    for _ in range(10_000 // 10):
        xb = rng.uniform(0.1, 3.0, 2)
        yb = rng.uniform(0.1, 3.0, 2)
        if np.allclose(xb, yb):
            continue
        dist2 = float(np.sum((xb - yb) ** 2))
        val = abs(k.evaluate_full(tuple(xb), tuple(yb)))
        assert val * dist2 == pytest.approx(1 / math.pi, rel=1e-12)


def test_lipgraph_flat_is_half_beurling():
    k0 = lipgraph(lambda x: 0.0 * x, 0.0)
    kb = beurling()
    rng = np.random.default_rng(1)
    for _ in range(50):
        xb = tuple(rng.uniform(0.1, 2.0, 2))
        yb = tuple(rng.uniform(0.1, 2.0, 2))
        assert k0.evaluate_full(xb, yb) == pytest.approx(
            0.5 * kb.evaluate_full(xb, yb), rel=1e-13
        )


def test_singularity_raises():
    with pytest.raises(SingularityError):
        beurling().evaluate_full((1.0, 0.5), (1.0, 0.5))


def test_causal_truncation():
    km = beurling(sign="-")
    kp = beurling(sign="+")
    k = beurling()
    rng = np.random.default_rng(2)
    for _ in range(200):
        xb = tuple(rng.uniform(0.1, 2.0, 2))
        yb = tuple(rng.uniform(0.1, 2.0, 2))
        if xb[0] == yb[0]:
            continue
        full = k.evaluate_full(xb, yb)
        vm, vp = km.evaluate(xb, yb), kp.evaluate(xb, yb)
        if xb[0] < yb[0]:
            assert vm == full and vp == 0.0
        else:
            assert vp == full and vm == 0.0
        assert vm + vp == pytest.approx(full)
    # ties belong to neither part
    assert km.evaluate((1.0, 0.0), (1.0, 0.5)) == 0.0
    assert kp.evaluate((1.0, 0.0), (1.0, 0.5)) == 0.0


def test_evaluate_array_matches_scalar():
    phi = lambda x: 0.5 * (np.sqrt(x * x + 0.0625) - 0.25)
    for k in (beurling(sign="-"), lipgraph(phi, 0.5, sign="+"), hilbert_boundary()):
        rng = np.random.default_rng(3)
        xs = rng.uniform(0.2, 2.0, (40, k.point_dim))
        ys = rng.uniform(0.2, 2.0, (40, k.point_dim))
        arr = k.evaluate_array(xs, ys)
        for i in range(40):
            assert arr[i] == pytest.approx(
                k.evaluate(tuple(xs[i]), tuple(ys[i])), abs=1e-13
            )


def test_cz_constants_beurling():
    k = beurling()
    rng = np.random.default_rng(4)
    samples = sample_triples(k, 400, rng)
    out = cz_constants(k, samples)
    assert out["bound_const"] == pytest.approx(1 / math.pi, rel=1e-9)
    assert out["reg_const"] < 50.0
    # zero perturbation contributes nothing
    z = cz_constants(k, [(s[0], s[1], (0.0, 0.0)) for s in samples[:5]])
    assert z["reg_const"] == 0.0


def test_cz_constants_lipgraph_stable():
    phi = lambda x: 0.5 * (np.sqrt(np.asarray(x) ** 2 + 0.0625) - 0.25)
    k = lipgraph(lambda x: float(phi(x)) if np.isscalar(x) else phi(x), 0.5)
    rng = np.random.default_rng(5)
    a = cz_constants(k, sample_triples(k, 300, rng))
    b = cz_constants(k, sample_triples(k, 600, rng))
    assert 0 < a["bound_const"] <= b["bound_const"] < 5.0
    assert b["reg_const"] < 100.0


def test_hilbert_boundary_value():
    k = hilbert_boundary()
    assert k.evaluate_full((2.0,), (1.0,)) == pytest.approx(1 / math.pi)


def test_hormander_zero_separation():
    k = beurling(sign="-")
    q = HalfCube(BoundaryCube(0, (0,)), 1)
    y = (1.5, 0.5)
    out = hormander_constant(k, q, y, y)
    assert out.quadrature == 0.0 and out.tail_bound == 0.0


def test_hormander_window_stability():
    k = beurling(sign="-")
    q = HalfCube(BoundaryCube(0, (0,)), 1)  # unit cube at height 1
    y1, y2 = (1.125, 0.125), (1.875, 0.875)
    a = hormander_constant(k, q, y1, y2, outer_halfwidth=16)
    b = hormander_constant(k, q, y1, y2, outer_halfwidth=32)
    assert b.quadrature >= a.quadrature > 0
    assert (b.quadrature - a.quadrature) / a.quadrature < 0.05
    assert b.tail_bound < a.tail_bound


def test_hormander_dilation_invariance():
    k = beurling(sign="-")
    q = HalfCube(BoundaryCube(0, (0,)), 1)
    y1, y2 = (1.25, 0.25), (1.75, 0.75)
    a = hormander_constant(k, q, y1, y2, outer_halfwidth=6)
    q2 = HalfCube(BoundaryCube(-1, (0,)), 1)  # everything doubled
    b = hormander_constant(k, q2, (2.5, 0.5), (3.5, 1.5), outer_halfwidth=6)
    assert abs(a.quadrature - b.quadrature) <= 1e-10 * a.quadrature
