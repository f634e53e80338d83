import math
from fractions import Fraction

import numpy as np
import pytest

from causalcz.dyadic import BoundaryCube
from causalcz.experiments import (
    AppendixSpec,
    run_appendix,
    run_carleson_bound,
    run_domination,
    run_example_2_1,
    run_example_2_3,
    run_hormander,
    run_weak_l1,
)
from causalcz.experiments.exact_examples import (
    geom_linear_tail,
    geom_tail,
    hilbert_strip_integral,
    root_carleson_of_sparse,
    sparse_value_at_depth,
    staircase_carleson_winf_root,
)
from causalcz.functionals import carleson_dyadic, carleson_grid, whitney_sequence
from causalcz.grid import GridFunction, Window
from causalcz.kernels import beurling
from causalcz.operators import AveragingKind, sparse_apply_grid
from causalcz.sparse import SparseParams, build

F = Fraction


def test_geometric_tail_identities_against_partial_sums():
    for k0 in (1, 3, 7):
        partial = sum(F(2) ** -k for k in range(k0, k0 + 60))
        remainder = F(2) ** -(k0 + 59)
        assert partial < geom_tail(k0) <= partial + 2 * remainder
    for k0, off in ((5, 4), (8, 4), (3, 0)):
        partial = sum((k - off) * F(2) ** (-k - 1)
                      for k in range(k0, k0 + 80))
        tail_bound = (k0 + 80) * F(2) ** -(k0 + 75)
        assert partial < geom_linear_tail(k0, off) <= partial + tail_bound


def test_sparse_depth_value_spec_case():
    # depth 2 at N = 3: 2^3 - 1 = 7
    assert sparse_value_at_depth(3, 2) == 7


def test_root_carleson_exact_values():
    # derived closed form: N + 2, exact
    for n_exp in (2, 4, 8, 12):
        assert root_carleson_of_sparse(n_exp) == n_exp + 2


def test_example21_report():
    rep = run_example_2_1(range(4, 13), 2.0)
    assert rep.passed()
    assert rep.fitted["root_carleson_slope"] == 1
    # measurements are the exact rational root values, affine in N
    vals = [m["value"] for m in rep.measurements]
    assert vals == [float(n + 2) for n in range(4, 13)]


def test_example21_determinism():
    a = run_example_2_1(range(4, 9), 2.0)
    b = run_example_2_1(range(4, 9), 2.0)
    da, db = a.to_dict(), b.to_dict()
    da.pop("runtime_ms"), db.pop("runtime_ms")
    assert da == db


def test_strip_integral_j0_closed_form():
    # int_0^1 ln(1 + 1/x) dx = 2 ln 2
    assert hilbert_strip_integral(0) == pytest.approx(2 * math.log(2), rel=1e-12)


def test_staircase_carleson_is_n_plus_one():
    for n_exp in (2, 3, 5):
        assert staircase_carleson_winf_root(n_exp) == n_exp + 1


def test_example23_report():
    rep = run_example_2_3(range(3, 9))
    assert rep.passed()
    rr = rep.fitted["ratio_of_ratios_4_8"]
    assert 0.5 <= rr <= 2.0


def test_appendix_spec_validation():
    with pytest.raises(ValueError):
        AppendixSpec(center=0.2, width=0.5)  # support touches 0
    with pytest.raises(ValueError):
        AppendixSpec(amplitude=0.0)


def test_appendix_rhs_constant_to_1e12():
    rep = run_appendix(k_counts=(2, 4))
    rows = rep.tables["lhs_rhs"]
    norms = [r["rhs"] / math.sqrt(r["K"]) for r in rows]
    assert max(norms) - min(norms) <= 1e-12 * max(norms)
    assert rep.verdict("pointwise_lower_bound").passed


def test_domination_report_small():
    rep = run_domination(seed=1, trials=3, depth=5, refine_count=1)
    assert rep.passed(), [v for v in rep.verdicts if not v.passed]
    assert rep.fitted["max_ratio_overall"] > 0


def test_domination_zero_trials_edge():
    rep = run_domination(seed=0, trials=1, depth=4, refine_count=0)
    assert rep.verdict("sparsity_exact").passed


def test_weak_l1_determinism():
    a = run_weak_l1(seed=3, trials=2, depth=4)
    b = run_weak_l1(seed=3, trials=2, depth=4)
    da, db = a.to_dict(), b.to_dict()
    da.pop("runtime_ms"), db.pop("runtime_ms")
    assert da == db


def test_carleson_small():
    rep = run_carleson_bound(seed=2, trials=2, depth=4, refine_count=0)
    assert rep.verdict("norm_ratio_finite").passed
    assert rep.verdict("pointwise_ratio_finite").passed


def test_hormander_small():
    rep = run_hormander(seed=0, samples=8, dilation_checks=2)
    assert rep.passed()


def test_degenerate_covering_family_pointwise_bound():
    # covering cubes only, constant data: the sparse side is tiny against
    # the enlarged-Whitney-plus-Carleson side (recorded constant ~0.074)
    w = Window(BoundaryCube(0, (0,)), 5)
    f = GridFunction.from_callable(lambda t, x: 1.0, w)
    k = beurling(sign="-")
    fam = build(k, f, SparseParams(max_depth=0))
    shat = sparse_apply_grid(fam.cubes(), f, AveragingKind.BOX_AT)
    lhs = carleson_dyadic(whitney_sequence(shat, 2)).values
    rhs = (carleson_dyadic(whitney_sequence(f, 2, enlarged=True)).values
           + carleson_grid(f).values)
    assert float(np.max(lhs / rhs)) <= 0.1
