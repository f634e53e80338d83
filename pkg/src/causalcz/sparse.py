"""Construction of the causal 1/4-sparse family dominating a downward
singular operator, with exact integer-cell sparsity verification.

The construction refines a covering family of the support: at each cube the
exceptional set where the local operator or its maximal variant exceeds an
adaptive multiple of the top-region average is covered by maximal stopping
cubes in the upper half; the lower-half children and the stopping cubes are
recursed into.  Exceptional-set membership is materialized on grid cells
(virtual cells outside the window when covering cubes stick out), so the
sparsity bound |E_Q| >= |Q|/4 is an exact integer-cell statement.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from .dyadic import (
    BoundaryCube,
    HalfCube,
    RegionKind,
    covering_family,
    enclosing_halfcube,
    region,
)
from .grid import GridFunction, Window, integrate
from .kernels import KernelSpec
from .operators import (
    AveragingKind,
    PvParams,
    _sparse_region,
    apply_causal,
    apply_pointwise,
    cube_cells,
    pairwise_raw,
    source_arrays,
    sparse_apply_grid,
    window_cells,
)


class ThresholdSearchError(RuntimeError):
    pass


@dataclass(frozen=True)
class SparseParams:
    """Parameters of the stopping-time construction.

    alpha is the stopping-density threshold (default 2^(-2-n), resolved at
    build time); the threshold multiplier c is searched upward by factors of
    c_growth until the removed cubes occupy at most 3/4 of the cube.
    """

    alpha: Optional[Fraction] = None
    c_init: float = 1.0
    c_growth: float = 2.0
    max_depth: Optional[int] = None
    eta_target: Fraction = Fraction(1, 4)
    cover_levels: int = 3
    c_cap_factor: float = float(2 ** 40)
    pv: PvParams = field(default_factory=PvParams)

    def resolved_alpha(self, n: int) -> Fraction:
        return self.alpha if self.alpha is not None else Fraction(1, 2 ** (2 + n))


@dataclass(frozen=True)
class SparseEntry:
    cube: HalfCube
    e_cells: np.ndarray  # (count, 1+n) global integer cell coordinates
    c_used: float


@dataclass(frozen=True)
class SparseFamily:
    window: Window
    kernel_name: str
    params: SparseParams
    entries: List[SparseEntry]

    def cubes(self) -> List[HalfCube]:
        return [e.cube for e in self.entries]

    # -- serialization ------------------------------------------------------

    def to_json(self, path) -> None:
        w = self.window
        doc = {
            "window": {
                "root_level": w.root.level,
                "root_offsets": list(w.root.offsets),
                "depth": w.depth,
            },
            "kernel": self.kernel_name,
            "params": {
                "alpha": str(self.params.resolved_alpha(w.n)),
                "c_init": self.params.c_init,
                "c_growth": self.params.c_growth,
                "cover_levels": self.params.cover_levels,
                "max_depth": self.params.max_depth,
                "eta_target": str(self.params.eta_target),
            },
            "entries": [
                {
                    "level": int(e.cube.level),
                    "offsets": [int(v) for v in e.cube.base.offsets],
                    "time_index": int(e.cube.time_index),
                    "c_used": float(e.c_used),
                    "e_cells": _cells_to_runs(e.e_cells),
                }
                for e in self.entries
            ],
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1)

    @staticmethod
    def from_json(path) -> "SparseFamily":
        with open(path) as fh:
            doc = json.load(fh)
        wd = doc["window"]
        window = Window(
            BoundaryCube(wd["root_level"], tuple(wd["root_offsets"])), wd["depth"]
        )
        pd = doc["params"]
        params = SparseParams(
            alpha=Fraction(pd["alpha"]),
            c_init=pd["c_init"],
            c_growth=pd["c_growth"],
            cover_levels=pd["cover_levels"],
            max_depth=pd["max_depth"],
            eta_target=Fraction(pd["eta_target"]),
        )
        entries = []
        for ed in doc["entries"]:
            cube = HalfCube(
                BoundaryCube(ed["level"], tuple(ed["offsets"])), ed["time_index"]
            )
            entries.append(
                SparseEntry(cube, _runs_to_cells(ed["e_cells"], window.n + 1),
                            ed["c_used"])
            )
        return SparseFamily(window, doc["kernel"], params, entries)


def _cells_to_runs(cells: np.ndarray) -> list:
    """Encode sorted cell coordinates as (prefix..., start, length) runs
    along the last axis."""
    if len(cells) == 0:
        return []
    order = np.lexsort(cells.T[::-1])
    cells = cells[order]
    runs = []
    start = cells[0]
    length = 1
    for prev, cur in zip(cells[:-1], cells[1:]):
        if np.array_equal(cur[:-1], prev[:-1]) and cur[-1] == prev[-1] + 1:
            length += 1
        else:
            runs.append([int(v) for v in start] + [length])
            start, length = cur, 1
    runs.append([int(v) for v in start] + [length])
    return runs


def _runs_to_cells(runs: list, dim: int) -> np.ndarray:
    out = []
    for run in runs:
        *coords, length = run
        base = np.tile(coords, (length, 1)).astype(np.int64)
        base[:, -1] += np.arange(length)
        out.append(base)
    if not out:
        return np.zeros((0, dim), dtype=np.int64)
    return np.concatenate(out, axis=0)


# ---------------------------------------------------------------------------
# local decomposition step


@dataclass(frozen=True)
class LocalStep:
    r_list: List[HalfCube]
    qj_list: List[HalfCube]
    e_cells: np.ndarray
    c_used: float


def _cell_bounds(window: Window, cube: HalfCube):
    """Global integer cell ranges (per axis) covered by the cube."""
    h = window.cell_size
    return [(int(lo / h), int(hi / h)) for lo, hi in cube.box()]


def _select_sources(sources, bounds):
    coords, gints, weights = sources
    keep = np.ones(len(weights), dtype=bool)
    for axis, (lo, hi) in enumerate(bounds):
        keep &= (gints[:, axis] >= lo) & (gints[:, axis] < hi)
    return coords[keep], gints[keep], weights[keep]


def _t_region_bounds(window: Window, cube: HalfCube):
    """Integer cell bounds of the top region (midheight to double height,
    over the tripled base)."""
    h = window.cell_size
    a, ell = cube.t0, cube.side
    bounds = [(int((a + ell / 2) / h), int((a + 2 * ell) / h))]
    for lo, hi in cube.base.box():
        bounds.append((int((lo - ell) / h), int((hi + ell) / h)))
    return bounds


def _upper_cells(window: Window, cube: HalfCube):
    """Coordinates/indices of the cells tiling the upper half of the cube,
    as a dense block; returns (coords, gints, origin, shape)."""
    h = window.cell_size
    side = int(cube.side / h)
    bounds = _cell_bounds(window, cube)
    t0 = bounds[0][0] + side // 2
    ranges = [np.arange(t0, bounds[0][1], dtype=np.int64)]
    for lo, hi in bounds[1:]:
        ranges.append(np.arange(lo, hi, dtype=np.int64))
    gints = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1)
    shape = gints.shape[:-1]
    gints = gints.reshape(-1, cube.n + 1)
    coords = (gints + 0.5) * float(h)
    origin = tuple(r[0] for r in ranges)
    return coords, gints, origin, shape


def local_step(
    k: KernelSpec,
    f: GridFunction,
    cube: HalfCube,
    params: Optional[SparseParams] = None,
    sources=None,
) -> LocalStep:
    """One stopping-time step on a cube: exceptional set on the upper-half
    cells, maximal stopping cubes, lower-half children, and the kept set.

    The threshold multiplier is doubled until the removed cubes occupy at
    most 3/4 of the cube (exact cell counts).
    """
    params = params or SparseParams()
    if k.causal_sign != -1:
        raise ValueError("the construction requires a downward kernel (sign -)")
    w = f.window
    h = w.cell_size
    side = int(cube.side / h)
    if side < 2:
        raise ValueError("cube must be at least one level above cell resolution")
    if sources is None:
        sources = source_arrays(f)
    n = cube.n
    alpha = params.resolved_alpha(n)
    cube_cellcount = side ** (n + 1)

    t_bounds = _t_region_bounds(w, cube)
    st, si, sw = _select_sources(sources, t_bounds)
    t_reg = region(cube, RegionKind.T)
    avg = float(np.abs(sw).sum() / float(t_reg.volume())) if len(sw) else 0.0
    # (weights already carry the cell volume, so their sum is the integral)

    lower = cube.lower_children()
    if avg == 0.0:
        _, up_ints, _, _ = _upper_cells(w, cube)
        return LocalStep(lower, [], up_ints, params.c_init)

    up_coords, up_ints, up_origin, up_shape = _upper_cells(w, cube)
    full_up = pairwise_raw(k, (st, si, sw), up_coords, up_ints, params.pv).reshape(
        up_shape
    )
    svals = np.abs(full_up)
    mvals = _subtree_maximal(k, (st, si, sw), cube, w, params.pv, full_up, up_origin)

    c = params.c_init
    cap = params.c_init * params.c_cap_factor
    while True:
        thr = c * avg
        e_mask = (svals > thr) | (mvals > thr)
        qj, covered = _stopping_cubes(w, cube, e_mask, up_origin, alpha)
        removed = sum(int(q.side / h) ** (n + 1) for q in qj)
        if 4 * removed <= cube_cellcount:
            break
        c *= params.c_growth
        if c > cap:
            raise ThresholdSearchError("threshold search diverged")
    keep = ~covered
    e_cells = up_ints[keep.ravel()]
    return LocalStep(lower, qj, e_cells, c)


def _subtree_maximal(k, t_sources, cube, window, pv, full_up, up_origin):
    """Maximal truncated values sup_R max_{R cells} |S(1_{(3R)^c} f_T)| over
    the subcubes R of the cube's upper half containing each upper cell.

    Computed as the precomputed full sum minus the near-field sum over the
    sources in the tripled cube; a subtree is pruned when the tripled cube
    no longer meets the sources (all deeper truncations then equal the full
    sum, whose block maximum already covers them).
    """
    st, si, sw = t_sources
    h = window.cell_size
    out = np.zeros(full_up.shape)

    def block(c):
        b = _cell_bounds(window, c)
        return tuple(
            slice(lo - up_origin[i], hi - up_origin[i]) for i, (lo, hi) in enumerate(b)
        )

    stack = list(cube.upper_children())
    while stack:
        r = stack.pop()
        rb = block(r)
        e3 = region(r, RegionKind.ENLARGE3)
        near = np.zeros(len(sw), dtype=bool)
        if e3.boxes:
            near = np.ones(len(sw), dtype=bool)
            for axis, (lo, hi) in enumerate(e3.boxes[0]):
                near &= (st[:, axis] > float(lo)) & (st[:, axis] < float(hi))
        if not near.any():
            m_r = float(np.abs(full_up[rb]).max())
        else:
            tc, ti = cube_cells(window, r)
            near_vals = pairwise_raw(
                k, (st[near], si[near], sw[near]), tc, ti, pv
            ).reshape(full_up[rb].shape)
            m_r = float(np.abs(full_up[rb] - near_vals).max())
            if int(r.side / h) >= 2:
                stack.extend(r.children())
        out[rb] = np.maximum(out[rb], m_r)
    return out


def _stopping_cubes(window, cube, e_mask, up_origin, alpha: Fraction):
    """Maximal subcubes of the upper half whose exceptional density strictly
    exceeds alpha (exact integer comparison); returns them and the covered
    mask over the upper-half block."""
    h = window.cell_size
    covered = np.zeros_like(e_mask)
    qj = []

    def block(c):
        b = _cell_bounds(window, c)
        return tuple(
            slice(lo - up_origin[i], hi - up_origin[i]) for i, (lo, hi) in enumerate(b)
        )

    def visit(c):
        rb = block(c)
        count = int(e_mask[rb].sum())
        if count == 0:
            return
        total = int(c.side / h) ** (c.n + 1)
        if count * alpha.denominator > alpha.numerator * total:
            qj.append(c)
            covered[rb] = True
            return
        if int(c.side / h) >= 2:
            for child in c.children():
                visit(child)

    for child in cube.upper_children():
        visit(child)
    return qj, covered


# ---------------------------------------------------------------------------
# full construction


def build(
    k: KernelSpec,
    f: GridFunction,
    params: Optional[SparseParams] = None,
) -> SparseFamily:
    """Build the sparse family: covering cubes of the support, then the
    stopping-time recursion into lower children and stopping cubes.

    A branch becomes a leaf (kept whole) at cell resolution, at max_depth,
    or when the tripled cube carries no mass.
    """
    params = params or SparseParams()
    w = f.window
    h = w.cell_size
    sources = source_arrays(f)
    coords, gints, weights = sources
    fa = f.abs()

    if len(weights) == 0:
        support = w.carleson_halfcube()
    else:
        cell_level = w.max_cube_level()
        corners = [
            HalfCube(
                BoundaryCube(cell_level, tuple(int(v) for v in g[1:])), int(g[0])
            )
            for g in (gints.min(axis=0), gints.max(axis=0))
        ]
        support = enclosing_halfcube(corners)
    covering = covering_family(support, levels=params.cover_levels)

    entries: List[SparseEntry] = []

    def leaf(cube):
        _, ci = cube_cells(w, cube)
        entries.append(SparseEntry(cube, ci, 0.0))

    def recurse(cube, depth):
        side = int(cube.side / h)
        mass = integrate(fa, region(cube, RegionKind.ENLARGE3))
        if float(np.real(mass)) == 0.0 or side < 2 or (
            params.max_depth is not None and depth >= params.max_depth
        ):
            leaf(cube)
            return
        step = local_step(k, f, cube, params, sources)
        entries.append(SparseEntry(cube, step.e_cells, step.c_used))
        for child in step.r_list + step.qj_list:
            recurse(child, depth + 1)

    for root in covering:
        recurse(root, 0)
    return SparseFamily(w, k.name, params, entries)


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class SparsityReport:
    ok: bool
    worst_ratio: Fraction
    entry_count: int
    disjoint: bool
    violations: list


def verify_sparsity(fam: SparseFamily) -> SparsityReport:
    """Exact check of the family invariants: kept cells inside their cube,
    pairwise disjoint across entries, and at least eta_target of the cube."""
    w = fam.window
    h = w.cell_size
    n = w.n
    eta = fam.params.eta_target
    worst = None
    violations = []
    keys = []
    for e in fam.entries:
        side = int(e.cube.side / h)
        total = side ** (n + 1)
        bounds = _cell_bounds(w, e.cube)
        inside = np.ones(len(e.e_cells), dtype=bool)
        for axis, (lo, hi) in enumerate(bounds):
            inside &= (e.e_cells[:, axis] >= lo) & (e.e_cells[:, axis] < hi)
        if not inside.all():
            violations.append((e.cube, "cells outside cube"))
        ratio = Fraction(len(e.e_cells), total)
        worst = ratio if worst is None else min(worst, ratio)
        if ratio < eta:
            violations.append((e.cube, f"|E|/|Q| = {ratio} < {eta}"))
        keys.append(e.e_cells[:, 0].astype(np.int64))
        flat = np.zeros(len(e.e_cells), dtype=np.int64)
        for axis in range(n + 1):
            flat = flat * (1 << 20) + e.e_cells[:, axis]
        keys[-1] = flat
    allkeys = np.concatenate(keys) if keys else np.zeros(0, dtype=np.int64)
    disjoint = len(np.unique(allkeys)) == len(allkeys)
    if not disjoint:
        violations.append((None, "kept sets overlap"))
    ok = disjoint and not violations
    return SparsityReport(ok, worst if worst is not None else Fraction(1),
                          len(fam.entries), disjoint, violations)


@dataclass(frozen=True)
class DominationResult:
    max_ratio: float
    argmax: Optional[tuple]
    violations: list
    compared: int


def domination_ratio(
    k: KernelSpec,
    f: GridFunction,
    fam: SparseFamily,
    sample_points: Optional[np.ndarray] = None,
    kind: AveragingKind = AveragingKind.SQCAP_AT,
    pv: Optional[PvParams] = None,
) -> DominationResult:
    """max over sample points of |S f| / (sparse sum); points where both
    sides vanish are skipped, a vanishing sparse sum against a non-vanishing
    operator value is recorded as a violation.

    By default the samples are all window cell centers (fast grid path).
    Explicit ``sample_points`` (coordinate rows) allow evaluating the same
    fixed locations on grids of different resolution, which is how
    refinement stability of the constant is measured.
    """
    pv = pv or fam.params.pv
    w = f.window
    if sample_points is None:
        lhs = np.abs(apply_causal(k, f, pv).values).ravel()
        rhs = sparse_apply_grid(fam.cubes(), f, kind).values.ravel()
        coords, _ = window_cells(w)
    else:
        coords = np.asarray(sample_points, dtype=float)
        h = float(w.cell_size)
        tints = np.floor(coords / h).astype(np.int64)
        lhs = np.abs(apply_pointwise(k, f, coords, tints, pv))
        rhs = _sparse_sum_at_points(fam.cubes(), f, coords, kind)
    best = 0.0
    arg = None
    violations = []
    compared = 0
    for i in range(len(coords)):
        l, r = float(lhs[i]), float(rhs[i])
        if l == 0.0 and r == 0.0:
            continue
        if r == 0.0:
            violations.append(tuple(coords[i]))
            continue
        compared += 1
        ratio = l / r
        if ratio > best:
            best, arg = ratio, tuple(coords[i])
    return DominationResult(best, arg, violations, compared)


def _sparse_sum_at_points(cubes, f: GridFunction, coords: np.ndarray,
                          kind: AveragingKind) -> np.ndarray:
    """Point evaluations of the sparse sum, with region averages cached per
    (cube, time row)."""
    fa = f.abs()
    out = np.zeros(len(coords))
    cache = {}
    for cube in cubes:
        box = cube.box()
        inside = np.ones(len(coords), dtype=bool)
        for axis, (lo, hi) in enumerate(box):
            inside &= (coords[:, axis] >= float(lo)) & (coords[:, axis] < float(hi))
        if not inside.any():
            continue
        for i in np.nonzero(inside)[0]:
            at = tuple(Fraction(float(c)) for c in coords[i])
            key = (cube, min(cube.t0 + cube.side / 2, at[0]))
            if key not in cache:
                reg = _sparse_region(cube, kind, at)
                cache[key] = float(np.real(integrate(fa, reg))) / float(
                    reg.volume()
                )
            out[i] += cache[key]
    return out
