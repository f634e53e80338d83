"""Singular operators applied to grid functions.

Principal values are discretized by a symmetric Chebyshev-ball exclusion
around the target cell (which preserves the angular cancellation that makes
the causal inverse-square principal value converge), with the cell-midpoint
rule elsewhere and optional subdivision of near-diagonal source cells.
Targets may be arbitrary points of the half-space; sources are the window
cells carrying the function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import core
from .dyadic import HalfCube, RegionKind, RegionSet, halfcube_at, region
from .functionals import BoundaryGridFunction
from .grid import GridFunction, Window, average, integrate
from .kernels import KernelSpec, SingularityError


@dataclass(frozen=True)
class PvParams:
    """Principal-value discretization parameters.

    ``exclusion_radius`` is the Chebyshev radius (in cells) of the symmetric
    ball omitted around the target; ``refinement`` > 1 subdivides each source
    cell within ``near_width`` cells of the target into refinement^(1+n)
    subcells (midpoint rule on each).
    """

    exclusion_radius: int = 1
    refinement: int = 1
    near_width: int = 3

    def __post_init__(self):
        if self.exclusion_radius < 1:
            raise ValueError("exclusion radius must be >= 1")
        if self.refinement < 1:
            raise ValueError("refinement must be >= 1")


def _as_vec(fn: Optional[Callable], xs: np.ndarray) -> np.ndarray:
    if fn is None:
        return np.zeros_like(xs)
    try:
        out = np.asarray(fn(xs), dtype=float)
        if out.shape != xs.shape:
            raise ValueError
        return out
    except Exception:
        return np.vectorize(fn, otypes=[float])(xs)


def source_arrays(f: GridFunction):
    """Coordinates, global integer indices and weights of the active cells."""
    w = f.window
    mask = f.support & (f.values != 0)
    idx = np.argwhere(mask)
    coords = np.empty((len(idx), w.n + 1), dtype=float)
    gints = np.empty((len(idx), w.n + 1), dtype=np.int64)
    h = float(w.cell_size)
    origin = w.global_origin()
    for axis in range(w.n + 1):
        lo = float(w.axis_range(axis)[0])
        coords[:, axis] = lo + (idx[:, axis] + 0.5) * h
        gints[:, axis] = origin[axis] + idx[:, axis]
    weights = f.values[mask].astype(np.complex128) * float(w.cell_volume)
    return coords, gints, weights


def window_cells(window: Window):
    """Coordinates and global integer indices of every window cell, in C order."""
    m = window.cells_per_axis
    d = window.n + 1
    idx = np.stack(
        np.meshgrid(*[np.arange(m)] * d, indexing="ij"), axis=-1
    ).reshape(-1, d)
    h = float(window.cell_size)
    origin = window.global_origin()
    coords = np.empty_like(idx, dtype=float)
    for axis in range(d):
        lo = float(window.axis_range(axis)[0])
        coords[:, axis] = lo + (idx[:, axis] + 0.5) * h
    gints = idx.astype(np.int64) + np.asarray(origin, dtype=np.int64)
    return coords, gints


def cube_cells(window: Window, cube: HalfCube):
    """Grid-resolution cells tiling a cube (virtual if outside the window)."""
    h = window.cell_size
    d = cube.n + 1
    ranges = []
    for lo, hi in cube.box():
        i0, i1 = int(lo / h), int(hi / h)
        ranges.append(np.arange(i0, i1, dtype=np.int64))
    gints = np.stack(
        np.meshgrid(*ranges, indexing="ij"), axis=-1
    ).reshape(-1, d)
    coords = (gints + 0.5) * float(h)
    return coords, gints


def pairwise_raw(
    k: KernelSpec,
    sources,
    tcoords: np.ndarray,
    tints: np.ndarray,
    pv: Optional[PvParams] = None,
    force_fallback: bool = False,
) -> np.ndarray:
    """Pairwise kernel sum against prepared source arrays, at arbitrary
    target points.

    ``sources`` is a (coords, global ints, weights) triple as produced by
    source_arrays.  Target integer indices index the global grid at window
    resolution and drive the exclusion ball; coordinates drive the kernel.
    """
    pv = pv or PvParams()
    scoords, sints, weights = sources
    backend = core.get_backend(force_fallback)
    excl = pv.exclusion_radius
    sign = k.causal_sign
    dim = tcoords.shape[1] if tcoords.ndim == 2 else 1

    if len(weights) == 0:
        return np.zeros(len(tcoords), dtype=np.complex128)

    if k.family == "invsq" and dim == 2:
        tphi = _as_vec(k.phi, tcoords[:, 1])
        sphi = _as_vec(k.phi, scoords[:, 1])
        out = backend.pairwise_invsq(
            np.ascontiguousarray(tcoords[:, 0]),
            np.ascontiguousarray(tcoords[:, 1]),
            tphi,
            np.ascontiguousarray(tints[:, 0]),
            np.ascontiguousarray(tints[:, 1]),
            np.ascontiguousarray(scoords[:, 0]),
            np.ascontiguousarray(scoords[:, 1]),
            sphi,
            np.ascontiguousarray(sints[:, 0]),
            np.ascontiguousarray(sints[:, 1]),
            weights,
            complex(k.pref),
            sign,
            excl,
        )
    elif k.family == "recip" and dim == 1:
        out = backend.pairwise_recip(
            np.ascontiguousarray(tcoords[:, 0]),
            np.ascontiguousarray(tints[:, 0]),
            np.ascontiguousarray(scoords[:, 0]),
            np.ascontiguousarray(sints[:, 0]),
            weights,
            complex(k.pref),
            sign,
            excl,
        )
    else:
        out = _apply_generic(k, tcoords, tints, scoords, sints, weights, excl)
    return out


def apply_pointwise(
    k: KernelSpec,
    f: GridFunction,
    tcoords: np.ndarray,
    tints: np.ndarray,
    pv: Optional[PvParams] = None,
    force_fallback: bool = False,
) -> np.ndarray:
    """Discretized singular integral of f at arbitrary target points."""
    pv = pv or PvParams()
    out = pairwise_raw(k, source_arrays(f), tcoords, tints, pv, force_fallback)
    if pv.refinement > 1:
        out = out + _near_refinement(k, f, tcoords, tints, pv)
    return out


def _apply_generic(k, tcoords, tints, scoords, sints, weights, excl):
    nt = len(tcoords)
    out = np.zeros(nt, dtype=np.complex128)
    block = 64
    for b in range(0, nt, block):
        sl = slice(b, min(b + block, nt))
        vals = k.evaluate_array(tcoords[sl, None, :], scoords[None, :, :])
        cheb = np.max(np.abs(tints[sl, None, :] - sints[None, :, :]), axis=-1)
        vals = np.where(cheb <= excl, 0.0, vals)
        out[sl] = (vals * weights[None, :]).sum(axis=1)
    return out


def _near_refinement(k, f, tcoords, tints, pv):
    """Correction replacing midpoint values by refined cell averages for
    source cells within near_width cells of each target."""
    w = f.window
    m = pv.refinement
    d = w.n + 1
    h = float(w.cell_size)
    origin = np.asarray(w.global_origin(), dtype=np.int64)
    sub = (np.arange(m) + 0.5) / m  # relative subcell centers
    offs = np.stack(
        np.meshgrid(*[np.arange(-pv.near_width, pv.near_width + 1)] * d,
                    indexing="ij"),
        axis=-1,
    ).reshape(-1, d)
    offs = offs[np.max(np.abs(offs), axis=1) > pv.exclusion_radius]
    subgrid = np.stack(
        np.meshgrid(*[sub] * d, indexing="ij"), axis=-1
    ).reshape(-1, d)
    corr = np.zeros(len(tcoords), dtype=np.complex128)
    cellvol = float(w.cell_volume)
    mcells = w.cells_per_axis
    for off in offs:
        cell_idx = tints + off[None, :] - origin[None, :]
        ok = np.all((cell_idx >= 0) & (cell_idx < mcells), axis=1)
        if not ok.any():
            continue
        ti = np.nonzero(ok)[0]
        cidx = cell_idx[ti]
        vals = f.values[tuple(cidx.T)]
        sup = f.support[tuple(cidx.T)] & (vals != 0)
        ti, cidx, vals = ti[sup], cidx[sup], vals[sup]
        if len(ti) == 0:
            continue
        corner = (cidx + origin[None, :]) * h
        centers = corner + 0.5 * h
        mid = k.evaluate_array(tcoords[ti], centers)
        pts = corner[:, None, :] + subgrid[None, :, :] * h
        fine = k.evaluate_array(tcoords[ti, None, :], pts).mean(axis=1)
        corr[ti] += vals * cellvol * (fine - mid)
    return corr


def apply_causal(
    k: KernelSpec,
    f: GridFunction,
    pv: Optional[PvParams] = None,
    force_fallback: bool = False,
) -> GridFunction:
    """The operator with kernel k applied to f, at every window cell center."""
    pv = pv or PvParams()
    w = f.window
    if pv.exclusion_radius >= w.cells_per_axis:
        raise ValueError("exclusion radius covers the whole window")
    tcoords, tints = window_cells(w)
    vals = apply_pointwise(k, f, tcoords, tints, pv, force_fallback)
    return GridFunction(w, vals.reshape(w.shape))


def maximal_singular(
    k: KernelSpec,
    f: GridFunction,
    xbar: Sequence[float],
    level_range: tuple,
    pv: Optional[PvParams] = None,
) -> float:
    """sup over dyadic cubes Q containing xbar (levels in level_range) of the
    max over Q's cell centers of |S(1_{(3Q)^c} f)|.

    The L_inf over Q is approximated from below by the max over cell centers.
    """
    pv = pv or PvParams()
    w = f.window
    lo, hi = level_range
    hi = min(hi, w.max_cube_level())
    best = 0.0
    scoords, _, _ = source_arrays(f)
    for level in range(lo, hi + 1):
        cube = halfcube_at(level, xbar)
        far = _mask_outside(scoords, region(cube, RegionKind.ENLARGE3))
        if not far.any():
            continue
        g = _restrict(f, far)
        tcoords, tints = cube_cells(w, cube)
        vals = apply_pointwise(k, g, tcoords, tints, pv)
        best = max(best, float(np.max(np.abs(vals))))
    return best


def _mask_outside(coords: np.ndarray, reg: RegionSet) -> np.ndarray:
    inside = np.zeros(len(coords), dtype=bool)
    for box in reg.boxes:
        m = np.ones(len(coords), dtype=bool)
        for i, (lo, hi) in enumerate(box):
            m &= (coords[:, i] > float(lo)) & (coords[:, i] < float(hi))
        inside |= m
    return ~inside


def _restrict(f: GridFunction, source_mask: np.ndarray) -> GridFunction:
    """GridFunction keeping only the listed active cells (source-array order)."""
    w = f.window
    mask = f.support & (f.values != 0)
    keep = np.zeros(w.shape, dtype=bool)
    idx = np.argwhere(mask)[source_mask]
    keep[tuple(idx.T)] = True
    return GridFunction(w, np.where(keep, f.values, 0), keep)


# ---------------------------------------------------------------------------
# sparse operators


class AveragingKind(Enum):
    SQCAP_AT = "sqcap_at"
    BOX_AT = "box_at"
    CARLESON_3Q = "carleson_3q"
    ENLARGE3 = "enlarge3"


def _sparse_region(cube: HalfCube, kind: AveragingKind, at=None) -> RegionSet:
    if kind is AveragingKind.CARLESON_3Q:
        return RegionSet.from_box(cube.box())
    if kind is AveragingKind.ENLARGE3:
        return region(cube, RegionKind.ENLARGE3)
    rk = RegionKind.SQCAP_AT if kind is AveragingKind.SQCAP_AT else RegionKind.BOX_AT
    return region(cube, rk, at=at)


def sparse_apply(
    cubes: Iterable[HalfCube],
    f: GridFunction,
    xbar: Sequence,
    kind: AveragingKind = AveragingKind.SQCAP_AT,
) -> float:
    """sum over the cubes containing xbar of the average of |f| over the
    cube's causal averaging region at xbar."""
    fa = f.abs()
    total = 0.0
    at = tuple(Fraction(float(c)) for c in xbar)
    for cube in cubes:
        if not cube.contains_point(at):
            continue
        reg = _sparse_region(cube, kind, at)
        total += float(average(fa, reg).real)
    return total


def sparse_apply_grid(
    cubes: Iterable[HalfCube],
    f: GridFunction,
    kind: AveragingKind = AveragingKind.SQCAP_AT,
) -> GridFunction:
    """sparse_apply evaluated at every window cell center, batched per cube.

    For the point-dependent kinds the average over the region at a cell in
    the cube's lower half depends only on the cell's row; rows are handled
    with cumulative row integrals.
    """
    w = f.window
    m = w.cells_per_axis
    n = w.n
    h = w.cell_size
    absv = np.abs(f.values)
    cellvol = float(w.cell_volume)
    out = np.zeros(w.shape)
    t_lo_win = Fraction(0)
    fa = f.abs()

    for cube in cubes:
        box = cube.box()
        # window cell index ranges covered by the cube
        sel = []
        for axis, (lo, hi) in enumerate(box):
            alo, ahi = w.axis_range(axis)
            lo, hi = max(lo, alo), min(hi, ahi)
            if hi <= lo:
                sel = None
                break
            i0 = int((lo - alo) / h)
            i1 = int((hi - alo) / h)
            sel.append((i0, i1))
        if sel is None:
            continue
        cube_slice = tuple(slice(i0, i1) for i0, i1 in sel)

        if kind in (AveragingKind.CARLESON_3Q, AveragingKind.ENLARGE3):
            reg = _sparse_region(cube, kind)
            out[cube_slice] += float(average(fa, reg).real)
            continue

        a, ell = cube.t0, cube.side
        mid = a + ell / 2
        vol_hi = _sparse_region(cube, kind, (mid, *cube.base.center())).volume()
        upper_avg = (
            float(integrate(fa, _sparse_region(cube, kind,
                                               (mid, *cube.base.center()))).real)
            / float(vol_hi)
        )
        # strip columns: 3Q for BOX_AT, 3Q minus Q for SQCAP_AT
        three_q = [( iv[0] - (iv[1] - iv[0]), iv[1] + (iv[1] - iv[0]))
                   for iv in cube.base.box()]
        strip_cols = RegionSet.from_box(
            ((t_lo_win, w.root.side),) + tuple(three_q))
        if kind is AveragingKind.SQCAP_AT:
            strip_cols = strip_cols.subtract_box(
                ((t_lo_win, w.root.side),) + cube.base.box())
        row_int = np.zeros(m)
        for bx in strip_cols.boxes:
            gg = fa.masked(_box_cell_mask(w, bx))
            row_int += np.real(
                gg.values.reshape(m, -1).sum(axis=1) if n else gg.values
            ) * cellvol
        # cross-section measure of the strip (empty x-product is 1 at n = 0)
        strip_area = Fraction(0)
        for bx in strip_cols.boxes:
            piece = Fraction(1)
            for lo, hi in bx[1:]:
                piece *= hi - lo
            strip_area += piece
        upper_int = float(integrate(
            fa, _sparse_region(cube, kind, (mid, *cube.base.center()))).real)

        i0, i1 = sel[0]
        rest = tuple(slice(j0, j1) for j0, j1 in sel[1:])
        mid_row = int((mid - t_lo_win) / h)
        for r in range(i0, i1):
            t_r = t_lo_win + (2 * r + 1) * h / 2
            if t_r >= mid:
                out[(r,) + rest] += upper_avg
            else:
                # half of row r plus the full rows up to the midheight
                strip = 0.5 * row_int[r] + row_int[r + 1: mid_row].sum()
                vol = vol_hi + (mid - t_r) * strip_area
                out[(r,) + rest] += (upper_int + strip) / float(vol)
    return GridFunction(w, out)


def _box_cell_mask(w: Window, box) -> np.ndarray:
    mask = np.ones(w.shape, dtype=bool)
    for axis, (lo, hi) in enumerate(box):
        c = w.centers(axis)
        axmask = (c > float(lo)) & (c < float(hi))
        shape = [1] * (w.n + 1)
        shape[axis] = len(c)
        mask &= axmask.reshape(shape)
    return mask


# ---------------------------------------------------------------------------
# closed-form horizontal Hilbert transform


def hilbert_interval(a: float, b: float, x: float) -> float:
    """H 1_(a,b)(x) = (1/pi) ln |x-a|/|x-b|."""
    if x == a or x == b:
        raise SingularityError("evaluation at an interval endpoint")
    return math.log(abs(x - a) / abs(x - b)) / math.pi


def hilbert_piecewise(slabs, xbar) -> float:
    """Horizontal Hilbert transform of a function that is, on each t-slab, a
    finite sum of interval indicators with heights.

    ``slabs`` is a list of ((t_lo, t_hi), [((a, b), height), ...]) entries.
    """
    t, x = float(xbar[0]), float(xbar[1])
    total = 0.0
    for (t_lo, t_hi), intervals in slabs:
        if not float(t_lo) <= t < float(t_hi):
            continue
        for (a, b), height in intervals:
            total += height * hilbert_interval(float(a), float(b), x)
    return total


# ---------------------------------------------------------------------------
# Fourier-side operators for the half-plane extension


@dataclass(frozen=True)
class FrequencyProfile:
    """A compactly supported frequency profile fn on [lo, hi], optionally
    translated by ``shift`` (the evaluated profile is fn(xi - shift))."""

    fn: Callable
    lo: float
    hi: float
    shift: float = 0.0

    def shifted(self, shift: float) -> "FrequencyProfile":
        return FrequencyProfile(self.fn, self.lo, self.hi, shift)


def fourier_integral(
    profile: FrequencyProfile,
    x,
    multiplier: Callable = None,
    nodes: int = 96,
) -> np.ndarray:
    """int multiplier(xi) fn(xi - shift) e^{i 2 pi x xi} dxi over the
    translated support, by Gauss-Legendre quadrature (vectorized in x)."""
    eta, wq = np.polynomial.legendre.leggauss(nodes)
    eta = 0.5 * (profile.hi - profile.lo) * (eta + 1.0) + profile.lo
    wq = wq * 0.5 * (profile.hi - profile.lo)
    xi = eta + profile.shift
    mult = np.ones_like(xi, dtype=complex) if multiplier is None else multiplier(xi)
    amp = profile.fn(eta) * mult * wq
    xs = np.asarray(x, dtype=float)
    phase = np.exp(2j * np.pi * np.multiply.outer(xs, xi))
    return phase @ amp


def poisson_pt(profile: FrequencyProfile, t: float, x, nodes: int = 96):
    """Harmonic extension P_t via the multiplier e^{-2 pi t |xi|}."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return fourier_integral(profile, x, lambda xi: np.exp(-2 * np.pi * t * np.abs(xi)),
                            nodes=nodes)


def poisson_dt(profile: FrequencyProfile, t: float, x, nodes: int = 96):
    """Time derivative of the extension: multiplier -2 pi |xi| e^{-2 pi t |xi|}."""
    if t <= 0:
        raise ValueError("t must be positive")
    return fourier_integral(
        profile,
        x,
        lambda xi: -2 * np.pi * np.abs(xi) * np.exp(-2 * np.pi * t * np.abs(xi)),
        nodes=nodes,
    )


def boundary_v(g: BoundaryGridFunction, z: complex) -> complex:
    """-(1/pi) int g(s) (s-z)^{-2} ds by the exact per-cell antiderivative."""
    w = g.window
    if w.n != 1:
        raise ValueError("boundary_v requires a 1-d boundary")
    e = w.edges(1)
    a, b = e[:-1], e[1:]
    terms = 1.0 / (a - z) - 1.0 / (b - z)
    return complex(-(np.asarray(g.values) * terms).sum() / math.pi)


# ---------------------------------------------------------------------------
# oracle: exact integral of the inverse-square kernel over a rectangle


def invsq_rectangle_integral(pref: complex, t_iv, x_iv, z: complex) -> complex:
    """pref * double integral over the rectangle (t, x) in t_iv x x_iv of
    (w - z)^{-2} dA(w), w = x + i t, valid for z strictly below the slab.

    Corner antiderivative: i [ln(w-z)] alternating over the four corners.
    """
    (s0, s1), (y0, y1) = t_iv, x_iv
    c = lambda y, s: complex(y, s) - z

    val = 1j * (
        np.log(c(y1, s1)) - np.log(c(y0, s1)) - np.log(c(y1, s0)) + np.log(c(y0, s0))
    )
    return pref * val
