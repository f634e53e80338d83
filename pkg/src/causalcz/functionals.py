"""Whitney averages, dyadic Carleson / non-tangential functionals, the area
functional, the dyadic Hardy-Littlewood maximal function, tent-space norms
and the Carleson multiplier condition.

All suprema over cubes run over the dyadic cubes represented in the window
(levels root .. root+J-1 for boundary cubes); cubes below grid resolution
are absent, so sums over subcubes are truncated at cell size.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Union

import numpy as np

from .dyadic import BoundaryCube, RegionKind, region
from .grid import GridFunction, ResolutionError, Window, lq_norm, window_boundary_cubes


@dataclass(frozen=True, eq=False)
class BoundaryGridFunction:
    """Values on the 2^(J n) boundary cells of the window root."""

    window: Window
    values: np.ndarray

    def __post_init__(self):
        shape = (self.window.cells_per_axis,) * self.window.n
        if self.values.shape != shape:
            raise ValueError("boundary values shape does not match window")

    def sup(self) -> float:
        return float(np.max(self.values))

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("index,value\n")
            for i, v in enumerate(np.atleast_1d(self.values).ravel()):
                fh.write(f"{i},{float(v)!r}\n")


@dataclass(frozen=True, eq=False)
class CubeSequence:
    """Non-negative values attached to the window's boundary cubes."""

    window: Window
    data: Dict[BoundaryCube, float]

    def __post_init__(self):
        w = self.window
        for cube, val in self.data.items():
            if not (w.root.level <= cube.level <= w.root.level + w.depth - 1
                    and w.root.contains_cube(cube)):
                raise ValueError(f"cube {cube} outside the window's tree")
            if not np.isfinite(val):
                raise ValueError("sequence values must be finite")

    def get(self, cube: BoundaryCube, default: float = 0.0) -> float:
        return self.data.get(cube, default)

    def depth_array(self, depth: int) -> np.ndarray:
        """Values of the depth-d cubes as an array indexed by cube position."""
        w = self.window
        m = 1 << depth
        out = np.zeros((m,) * w.n)
        for q in window_boundary_cubes(w)[depth]:
            rel = tuple(k - r * m for k, r in zip(q.offsets, w.root.offsets))
            out[rel] = self.data.get(q, 0.0)
        return out


# ---------------------------------------------------------------------------
# array helpers over the boundary grid (n axes; shape () when n = 0)


def _pool_sum(arr: np.ndarray, n: int) -> np.ndarray:
    if n == 0:
        return arr
    for ax in range(n):
        m = arr.shape[ax]
        arr = arr.reshape(arr.shape[:ax] + (m // 2, 2) + arr.shape[ax + 1:])
        arr = arr.sum(axis=ax + 1)
    return arr


def _upsample(arr: np.ndarray, factor: int, n: int) -> np.ndarray:
    if n == 0:
        return arr
    for ax in range(n):
        arr = np.repeat(arr, factor, axis=ax)
    return arr


def _validate_q(q) -> None:
    if q != np.inf and not 1 <= q < np.inf:
        raise ValueError("q must lie in [1, inf]")


# ---------------------------------------------------------------------------
# Whitney averages


def whitney(f: GridFunction, q, cube: BoundaryCube, enlarged: bool = False) -> float:
    """Normalized L_q average |R|^{-1/q} ||f||_{L_q(R)} over the Whitney
    region of the cube (the enlarged auxiliary region when ``enlarged``)."""
    _validate_q(q)
    w = f.window
    if not w.root.contains_cube(cube) or cube.level > w.root.level + w.depth - 1:
        raise ResolutionError("cube below grid resolution or outside window")
    kind = RegionKind.TILDE_W if enlarged else RegionKind.WHITNEY
    reg = region(cube, kind)
    norm = lq_norm(f, reg, q)
    if q == np.inf:
        return norm
    return float(reg.volume()) ** (-1.0 / q) * norm


def whitney_sequence(f: GridFunction, q, enlarged: bool = False) -> CubeSequence:
    """Whitney averages of every boundary cube resolvable in the window."""
    _validate_q(q)
    w = f.window
    if enlarged:
        data = {}
        for level_cubes in window_boundary_cubes(w):
            for cube in level_cubes:
                data[cube] = whitney(f, q, cube, enlarged=True)
        return CubeSequence(w, data)

    # standard Whitney regions are disjoint cell-aligned blocks: vectorize
    m = w.cells_per_axis
    n = w.n
    absv = np.abs(f.values)
    cellvol = float(w.cell_volume)
    data = {}
    for depth, cubes in enumerate(window_boundary_cubes(w)):
        r0, r1 = m >> (depth + 1), m >> depth
        bs = m >> depth
        slab = absv[r0:r1]
        if q == np.inf:
            arr = slab
            for ax in range(n):
                axis = 1 + ax
                arr = arr.reshape(
                    arr.shape[:axis] + (1 << depth, bs) + arr.shape[axis + 1:]
                )
            red = arr.max(axis=0)
            for ax in range(n):
                red = red.max(axis=1 + ax)
            vals = red
        else:
            arr = slab ** q
            for ax in range(n):
                axis = 1 + ax
                arr = arr.reshape(
                    arr.shape[:axis] + (1 << depth, bs) + arr.shape[axis + 1:]
                )
            red = arr.sum(axis=0)
            for ax in range(n):
                red = red.sum(axis=1 + ax)
            ell = w.root.side / (1 << depth)
            wvol = float(ell ** (n + 1) / 2)
            vals = (red * cellvol) ** (1.0 / q) * wvol ** (-1.0 / q)
        for cube in cubes:
            rel = tuple(
                k - r * (1 << depth) for k, r in zip(cube.offsets, w.root.offsets)
            )
            data[cube] = float(vals[rel]) if n else float(vals)
    return CubeSequence(w, data)


# ---------------------------------------------------------------------------
# dyadic Carleson and non-tangential functionals


def carleson_dyadic(s: CubeSequence) -> BoundaryGridFunction:
    """Per boundary cell, sup over containing cubes Q of
    |Q|^{-1} sum_{R subset Q} |R^w| s_R, by one bottom-up tree pass."""
    w = s.window
    n = w.n
    J = w.depth
    subtree = None
    best = None
    for depth in range(J - 1, -1, -1):
        vals = s.depth_array(depth)
        ell = w.root.side / (1 << depth)
        wvol = float(ell ** (n + 1) / 2)
        acc = wvol * vals
        if subtree is not None:
            acc = acc + _pool_sum(subtree, n)
        subtree = acc
        level_val = acc / float(ell ** n)
        up = _upsample(level_val, 1 << (J - depth), n)
        best = up if best is None else np.maximum(best, up)
    return BoundaryGridFunction(w, np.asarray(best, dtype=float))


def nontangential_dyadic(s: CubeSequence) -> BoundaryGridFunction:
    """Per boundary cell, sup of s_Q over the containing cubes Q."""
    w = s.window
    J = w.depth
    best = None
    for depth in range(J):
        up = _upsample(s.depth_array(depth), 1 << (J - depth), w.n)
        best = up if best is None else np.maximum(best, up)
    return BoundaryGridFunction(w, np.asarray(best, dtype=float))


def carleson_grid(f: GridFunction) -> BoundaryGridFunction:
    """Dyadic Carleson functional of |f| (L_1 Whitney averages)."""
    return carleson_dyadic(whitney_sequence(f, 1))


def boundary_lp(g: BoundaryGridFunction, p: float) -> float:
    if not 1 < p < np.inf:
        raise ValueError("p must lie in (1, inf)")
    w = g.window
    cellvol = float((w.root.side / w.cells_per_axis) ** w.n)
    return float((np.sum(np.abs(g.values) ** p) * cellvol) ** (1.0 / p))


# ---------------------------------------------------------------------------
# area functional, maximal function, tent norms


def area_functional(f: GridFunction, aperture: float) -> BoundaryGridFunction:
    """Cone integral A f(x) = int_{|y-x| < aperture * t} |f(t,y)| t^-n dt dy
    by cell-midpoint quadrature."""
    if aperture <= 0:
        raise ValueError("aperture must be positive")
    w = f.window
    n = w.n
    cellvol = float(w.cell_volume)
    t = w.centers(0)
    absv = np.abs(f.values)
    if n == 0:
        val = np.asarray(float(np.sum(absv) * cellvol))
        return BoundaryGridFunction(w, val)
    axes = [w.centers(1 + i) for i in range(n)]
    grids = np.meshgrid(*axes, indexing="ij")
    weights = absv * (t ** (-n)).reshape((-1,) + (1,) * n) * cellvol
    out = np.zeros((w.cells_per_axis,) * n)
    for idx in np.ndindex(*out.shape):
        x = tuple(g[idx] for g in np.meshgrid(*axes, indexing="ij"))
        dist2 = sum((g - xc) ** 2 for g, xc in zip(grids, x))
        mask = dist2[None, ...] < (aperture * t.reshape((-1,) + (1,) * n)) ** 2
        out[idx] = float(np.sum(weights * mask))
    return BoundaryGridFunction(w, out)


def hl_maximal(f: GridFunction) -> GridFunction:
    """Dyadic Hardy-Littlewood maximal function: at each cell, sup of the
    average of |f| over the window half-cubes containing it."""
    w = f.window
    d = w.n + 1
    avg = np.abs(f.values)
    best = avg.copy()
    for _ in range(w.depth):
        pooled = avg
        for ax in range(d):
            m = pooled.shape[ax]
            pooled = pooled.reshape(
                pooled.shape[:ax] + (m // 2, 2) + pooled.shape[ax + 1:]
            ).mean(axis=ax + 1)
        avg = pooled
        up = avg
        factor = best.shape[0] // avg.shape[0]
        for ax in range(d):
            up = np.repeat(up, factor, axis=ax)
        best = np.maximum(best, up)
    return GridFunction(w, best)


def tent_norms(f: GridFunction) -> dict:
    """Weighted L_2 norms with weights t and 1/t at cell centers."""
    w = f.window
    t = w.centers(0).reshape((-1,) + (1,) * w.n)
    cellvol = float(w.cell_volume)
    sq = np.abs(f.values) ** 2
    y = float(np.sqrt(np.sum(sq * t) * cellvol))
    ystar = float(np.sqrt(np.sum(sq / t) * cellvol))
    return {"Y": y, "Ystar": ystar}


def carleson_multiplier_check(e: GridFunction) -> float:
    """sup of the dyadic Carleson functional of the L_inf Whitney averages
    of |e|^2 / t (the multiplier admissibility constant)."""
    w = e.window
    t = w.centers(0).reshape((-1,) + (1,) * w.n)
    g = GridFunction(w, np.abs(e.values) ** 2 / t)
    return carleson_dyadic(whitney_sequence(g, np.inf)).sup()
