"""Seeded randomized experiments: domination constants for the sparse
construction, Carleson-norm and pointwise sparse bounds, the weak (1,1)
level-set constant, and stability of the integral regularity condition.

Random test functions are sums of random-cell indicators with random
amplitudes, specified as exact boxes at the base resolution so that the
same function can be rasterized onto refined grids.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ..dyadic import BoundaryCube, HalfCube, RegionSet
from ..functionals import (
    boundary_lp,
    carleson_dyadic,
    carleson_grid,
    whitney_sequence,
)
from ..grid import GridFunction, Window, integrate
from ..kernels import beurling, hilbert_boundary, hormander_constant, lipgraph
from ..operators import AveragingKind, apply_causal, sparse_apply_grid
from ..sparse import SparseParams, build, domination_ratio, verify_sparsity
from .report import ExperimentReport, Stopwatch

F = Fraction


def default_kernel(n: int, sign="-"):
    return beurling(sign=sign) if n == 1 else hilbert_boundary(sign=sign)


def random_cell_boxes(rng, n: int, base_depth: int, count: int):
    """(box, amplitude) pairs for random cells of the unit-root window at
    the base resolution; exact on any grid at least that fine."""
    m = 1 << base_depth
    items = []
    for _ in range(count):
        idx = [int(rng.integers(0, m)) for _ in range(n + 1)]
        box = tuple((F(i, m), F(i + 1, m)) for i in idx)
        amp = float(rng.uniform(0.5, 2.0))
        items.append((box, amp))
    return items


def rasterize(items, window: Window) -> GridFunction:
    return GridFunction.from_boxes(window, items)


def smooth_bumps(rng, n: int, count: int = 3):
    """A fixed random sum of compactly supported mollifier bumps (exactly
    zero outside their radius, so causal quotients are not polluted by
    resolution-dependent tail noise)."""
    centers = rng.uniform(0.3, 0.7, size=(count, n + 1))
    radii = rng.uniform(0.15, 0.28, size=count)
    amps = rng.uniform(0.5, 1.5, size=count)

    def fn(*coords):
        total = np.zeros_like(coords[0], dtype=float)
        for c, rad, a in zip(centers, radii, amps):
            u2 = sum((x - ci) ** 2 for x, ci in zip(coords, c)) / rad ** 2
            inside = u2 < 1.0
            vals = np.zeros_like(total)
            vals[inside] = a * np.exp(1.0 - 1.0 / (1.0 - u2[inside]))
            total += vals
        return total

    return fn


def _root_window(n: int, depth: int) -> Window:
    return Window(BoundaryCube(0, (0,) * n), depth)


def _run_trials(worker, count: int, jobs: int = 1):
    """Run independent seeded trials, merged deterministically by index."""
    if jobs <= 1:
        return [worker(t) for t in range(count)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, range(count)))


# ---------------------------------------------------------------------------
# domination of the causal operator by its sparse family


def run_domination(
    seed: int = 0,
    trials: int = 10,
    depth: int = 6,
    n: int = 1,
    refine_count: int = 3,
    params: Optional[SparseParams] = None,
    jobs: int = 1,
) -> ExperimentReport:
    rep = ExperimentReport(
        "sparse-domination",
        {"trials": trials, "depth": depth, "n": n, "refine_count": refine_count},
        seed=seed,
    )
    params = params or SparseParams()
    k = default_kernel(n)
    with Stopwatch() as sw:
        w = _root_window(n, depth)

        def one_trial(t):
            rng = np.random.default_rng([seed, t])
            f = rasterize(random_cell_boxes(rng, n, depth, 8), w)
            fam = build(k, f, params)
            srep = verify_sparsity(fam)
            res = domination_ratio(k, f, fam)
            return srep, res

        sparsity_ok = True
        ratios = []
        rows = []
        for t, (srep, res) in enumerate(_run_trials(one_trial, trials, jobs)):
            sparsity_ok &= srep.ok
            ratios.append(res.max_ratio)
            rows.append({"trial": t, "max_ratio": res.max_ratio,
                         "entries": srep.entry_count,
                         "worst_e_fraction": str(srep.worst_ratio),
                         "violations": len(res.violations)})
            rep.add_measurement(t, res.max_ratio)
        rep.tables["trials"] = rows
        rep.fitted["max_ratio_overall"] = max(ratios) if ratios else 0.0

        # Refinement stability, for smooth data: the family is a fixed
        # geometric object (built once on the coarse grid); both resolutions
        # measure its domination constant at their own cell centers, the
        # finer grid restricted to the subcells containing the coarse
        # centers.  Rebuilding the family at the finer grid would compare
        # two different (both valid) families, and evaluating off-center
        # would change the exclusion-ball geometry; either masks the
        # discretization convergence this verdict is about.
        refine_rows = []
        refine_ok = True
        for i in range(refine_count):
            rng = np.random.default_rng([seed, 10_000 + i])
            fn = smooth_bumps(rng, n)
            f0 = GridFunction.from_callable(fn, w, antialias=2)
            fam = build(k, f0, params)
            pair = []
            for d in (depth, depth + 1):
                wd = _root_window(n, d)
                fd = GridFunction.from_callable(fn, wd, antialias=2)
                lhs = np.abs(apply_causal(k, fd, params.pv).values)
                rhs = sparse_apply_grid(fam.cubes(), fd,
                                        AveragingKind.SQCAP_AT).values
                if d > depth:
                    sub = (slice(1, None, 2),) * (n + 1)
                    lhs, rhs = lhs[sub], rhs[sub]
                mask = (lhs > 0) & (rhs > 0)
                quot = np.where(mask, lhs / np.maximum(rhs, 1e-300), 0.0)
                pair.append(float(quot.max()))
            rel = abs(pair[1] - pair[0]) / pair[1]
            refine_ok &= rel < 0.10
            refine_rows.append({"smooth_trial": i, "ratio_coarse": pair[0],
                                "ratio_fine": pair[1], "rel_change": rel})
        rep.tables["refinement"] = refine_rows

        rep.add_verdict("sparsity_exact", sparsity_ok,
                        "all kept fractions >= 1/4, disjoint, exact counts")
        finite = all(np.isfinite(r) for r in ratios)
        none_violated = all(row["violations"] == 0 for row in rows)
        rep.add_verdict("ratio_finite", finite and none_violated,
                        f"overall constant {rep.fitted['max_ratio_overall']:.3f}")
        if refine_count:
            rep.add_verdict("refinement_stable", refine_ok,
                            "max_ratio moves < 10% under one refinement")
    rep.runtime_ms = sw.ms
    return rep


# ---------------------------------------------------------------------------
# Carleson-norm bound and the pointwise sparse bound


def run_carleson_bound(
    seed: int = 0,
    trials: int = 50,
    p: float = 2.0,
    q: float = 2.0,
    depth: int = 6,
    n: int = 1,
    refine_count: int = 2,
    params: Optional[SparseParams] = None,
    jobs: int = 1,
) -> ExperimentReport:
    rep = ExperimentReport(
        "carleson-bounds",
        {"trials": trials, "p": p, "q": q, "depth": depth, "n": n},
        seed=seed,
    )
    params = params or SparseParams()
    k = default_kernel(n)
    with Stopwatch() as sw:
        w = _root_window(n, depth)

        def both_ratios(f, window):
            sf = apply_causal(k, f, params.pv)
            num = boundary_lp(carleson_dyadic(whitney_sequence(sf, q)), p)
            den = boundary_lp(carleson_dyadic(whitney_sequence(f, q)), p)
            norm_ratio = num / den
            fam = build(k, f, params)
            shat = sparse_apply_grid(fam.cubes(), f, AveragingKind.BOX_AT)
            lhs = carleson_dyadic(whitney_sequence(shat, q)).values
            rhs = (
                carleson_dyadic(whitney_sequence(f, q, enlarged=True)).values
                + carleson_grid(f).values
            )
            ptw = float(np.max(lhs / rhs))
            return norm_ratio, ptw

        def one_trial(t):
            rng = np.random.default_rng([seed, t])
            f = rasterize(random_cell_boxes(rng, n, depth, 8), w)
            return both_ratios(f, w)

        rows = []
        for t, (norm_ratio, ptw) in enumerate(
            _run_trials(one_trial, trials, jobs)
        ):
            rows.append({"trial": t, "norm_ratio": norm_ratio,
                         "pointwise_ratio": ptw})
            rep.add_measurement(t, norm_ratio)
        rep.tables["trials"] = rows
        norm_max = max(r["norm_ratio"] for r in rows)
        ptw_max = max(r["pointwise_ratio"] for r in rows)
        rep.fitted["norm_ratio_max"] = norm_max
        rep.fitted["pointwise_ratio_max"] = ptw_max

        # Refinement stability is a statement about the operator and the
        # functionals, so it is measured on smooth test functions
        # (indicator data has genuinely resolution-dependent Whitney norms
        # near its jumps), and the sparse family is built once on the
        # coarse grid (rebuilding would compare two different families).
        refine_rows = []
        refine_ok = True
        for i in range(refine_count):
            rng = np.random.default_rng([seed, 20_000 + i])
            fn = smooth_bumps(rng, n)
            f0 = GridFunction.from_callable(fn, w, antialias=2)
            fam = build(k, f0, params)
            vals = []
            for d in (depth, depth + 1):
                wd = _root_window(n, d)
                fd = GridFunction.from_callable(fn, wd, antialias=2)
                sf = apply_causal(k, fd, params.pv)
                num = boundary_lp(carleson_dyadic(whitney_sequence(sf, q)), p)
                den = boundary_lp(carleson_dyadic(whitney_sequence(fd, q)), p)
                shat = sparse_apply_grid(fam.cubes(), fd, AveragingKind.BOX_AT)
                lhs = carleson_dyadic(whitney_sequence(shat, q)).values
                rhs = (
                    carleson_dyadic(
                        whitney_sequence(fd, q, enlarged=True)).values
                    + carleson_grid(fd).values
                )
                vals.append((num / den, float(np.max(lhs / rhs))))
            rel_norm = abs(vals[1][0] - vals[0][0]) / vals[1][0]
            rel_ptw = abs(vals[1][1] - vals[0][1]) / vals[1][1]
            refine_ok &= rel_norm < 0.15 and rel_ptw < 0.15
            refine_rows.append({"trial": i, "norm_rel_change": rel_norm,
                                "pointwise_rel_change": rel_ptw})
        rep.tables["refinement"] = refine_rows

        rep.add_verdict(
            "norm_ratio_finite", math.isfinite(norm_max),
            f"max Carleson-norm quotient {norm_max:.3f}",
        )
        rep.add_verdict(
            "pointwise_ratio_finite", math.isfinite(ptw_max),
            f"max pointwise quotient {ptw_max:.3f}",
        )
        if refine_count:
            rep.add_verdict("refinement_stable", refine_ok,
                            "both quotients move < 15% under one refinement")
    rep.runtime_ms = sw.ms
    return rep


# ---------------------------------------------------------------------------
# weak (1,1) level sets


def run_weak_l1(
    seed: int = 0,
    trials: int = 10,
    depth: int = 6,
    n: int = 1,
    decades: float = 4.0,
    lambdas_per_decade: int = 10,
) -> ExperimentReport:
    rep = ExperimentReport(
        "weak-l1",
        {"trials": trials, "depth": depth, "n": n, "decades": decades},
        seed=seed,
    )
    k = default_kernel(n)
    with Stopwatch() as sw:
        def weak_constant(f, window, collect=None):
            g = np.abs(apply_causal(k, f).values)
            mass = float(abs(integrate(f.abs(),
                                       RegionSet.from_box(window.box()))))
            lam_max = float(g.max())
            cellvol = float(window.cell_volume)
            count = int(round(decades * lambdas_per_decade))
            lams = lam_max * 10.0 ** (-decades * np.arange(count) / (count - 1))
            best = 0.0
            for lam in lams:
                vol = float(np.count_nonzero(g > lam)) * cellvol
                val = lam * vol / mass
                if collect is not None:
                    collect.append({"lambda": lam, "lambda_vol": val})
                best = max(best, val)
            return best

        rows = []
        overall = {}
        lam_profile = []
        for d in (depth, depth + 1):
            wd = _root_window(n, d)
            m = wd.cells_per_axis
            center = tuple(
                (F(m // 2, m), F(m // 2 + 1, m)) for _ in range(n + 1)
            )
            point_mass = GridFunction.from_boxes(
                wd, [(center, float(m ** (n + 1)))]
            )
            consts = [
                weak_constant(point_mass, wd,
                              collect=lam_profile if d == depth else None)
            ]
            if d == depth:
                rows.append({"trial": "point_mass", "depth": d,
                             "constant": consts[0]})
            for t in range(trials):
                rng = np.random.default_rng([seed, t])
                f = rasterize(random_cell_boxes(rng, n, depth, 8), wd)
                c = weak_constant(f, wd)
                consts.append(c)
                if d == depth:
                    rows.append({"trial": t, "depth": d, "constant": c})
                    rep.add_measurement(t, c)
            overall[d] = max(consts)
        rep.tables["trials"] = rows
        rep.tables["point_mass_levels"] = lam_profile
        rep.fitted["constant_overall"] = overall[depth]
        rep.fitted["constant_refined"] = overall[depth + 1]
        rel = abs(overall[depth + 1] - overall[depth]) / overall[depth + 1]
        refine_ok = rel < 0.15
        rep.tables["refinement"] = [
            {"coarse": overall[depth], "fine": overall[depth + 1],
             "rel_change": rel}
        ]

        rep.add_verdict("constant_bounded", math.isfinite(overall[depth]),
                        f"recorded constant {overall[depth]:.4f}")
        # point-mass level sets have explicit inverse-square tails: the
        # level product plateaus (it drops at the small-lambda end only
        # because the window truncates the tail); require at least one full
        # decade within a factor 2 of the sup
        vals = [r["lambda_vol"] for r in lam_profile]
        top = max(vals)
        run = best = 0
        for v in vals:
            run = run + 1 if v >= top / 2 else 0
            best = max(best, run)
        flat = best >= lambdas_per_decade
        rep.add_verdict("point_mass_levels_flat", flat,
                        f"{best} consecutive levels within factor 2 of the sup")
        rep.add_verdict("refinement_stable", refine_ok,
                        f"overall constant moves {rel:.1%} under one refinement")
    rep.runtime_ms = sw.ms
    return rep


# ---------------------------------------------------------------------------
# integral regularity condition


def _default_graph():
    def phi(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * (np.sqrt(x * x + 1.0 / 16.0) - 0.25)

    return phi


def run_hormander(
    seed: int = 0,
    samples: int = 100,
    outer_halfwidth: int = 24,
    resolution: int = 4,
    dilation_checks: int = 10,
) -> ExperimentReport:
    """Stability of the integral regularity constant for the flat and
    Lipschitz-graph inverse-square kernels, both causal parts."""
    rep = ExperimentReport(
        "integral-regularity",
        {"samples": samples, "outer_halfwidth": outer_halfwidth,
         "resolution": resolution},
        seed=seed,
    )
    phi = _default_graph()
    kernel_makers = {
        "flat-": lambda: beurling(sign="-"),
        "flat+": lambda: beurling(sign="+"),
        "graph-": lambda: lipgraph(phi, 0.5, sign="-"),
        "graph+": lambda: lipgraph(phi, 0.5, sign="+"),
    }
    with Stopwatch() as sw:
        rng = np.random.default_rng(seed)
        per = max(1, samples // len(kernel_makers))
        rows = []
        stable_ok = True
        worst_rel = 0.0
        for name, mk in kernel_makers.items():
            k = mk()
            for _ in range(per):
                level = int(rng.integers(0, 3))
                cube = HalfCube(
                    BoundaryCube(level, (int(rng.integers(0, 3)),)),
                    int(rng.integers(0, 4)),
                )
                box = cube.box()
                y1 = tuple(float(lo) + rng.uniform(0.05, 0.95) * float(hi - lo)
                           for lo, hi in box)
                y2 = tuple(float(lo) + rng.uniform(0.05, 0.95) * float(hi - lo)
                           for lo, hi in box)
                a = hormander_constant(k, cube, y1, y2, outer_halfwidth,
                                       resolution)
                b = hormander_constant(k, cube, y1, y2, 2 * outer_halfwidth,
                                       resolution)
                rel = (abs(b.quadrature - a.quadrature) / a.quadrature
                       if a.quadrature else 0.0)
                worst_rel = max(worst_rel, rel)
                stable_ok &= rel < 0.05
                rows.append({"kernel": name, "quadrature": a.quadrature,
                             "doubled": b.quadrature, "rel_change": rel,
                             "tail_bound": a.tail_bound})
        rep.tables["samples"] = rows
        rep.fitted["worst_rel_change"] = worst_rel
        rep.fitted["max_quadrature"] = max(r["quadrature"] for r in rows)

        dil_ok = True
        worst_dil = 0.0
        k = beurling(sign="-")
        for _ in range(dilation_checks):
            level = int(rng.integers(0, 3))
            cube = HalfCube(BoundaryCube(level, (int(rng.integers(0, 3)),)),
                            int(rng.integers(0, 4)))
            box = cube.box()
            y1 = tuple(float(lo) + float(hi - lo) * 0.25 for lo, hi in box)
            y2 = tuple(float(lo) + float(hi - lo) * 0.75 for lo, hi in box)
            a = hormander_constant(k, cube, y1, y2, outer_halfwidth, resolution)
            big = HalfCube(BoundaryCube(cube.level - 1, cube.base.offsets),
                           cube.time_index)
            y1d = tuple(2 * v for v in y1)
            y2d = tuple(2 * v for v in y2)
            b = hormander_constant(k, big, y1d, y2d, outer_halfwidth, resolution)
            rel = abs(a.quadrature - b.quadrature) / max(a.quadrature, 1e-300)
            worst_dil = max(worst_dil, rel)
            dil_ok &= rel <= 1e-10
        rep.fitted["worst_dilation_change"] = worst_dil

        rep.add_verdict("quadrature_stable", stable_ok,
                        f"worst change {worst_rel:.4%} on window doubling")
        rep.add_verdict("dilation_invariant", dil_ok,
                        f"worst relative change {worst_dil:.2e}")
    rep.runtime_ms = sw.ms
    return rep
