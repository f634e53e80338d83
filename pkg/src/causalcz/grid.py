"""Cell-averaged function carrier over a bounded window of the half-space.

A Window is the Carleson box over a root boundary cube, split into 2^J
cells per axis.  Values are cell averages, which makes indicator-type test
functions and all dyadic-cube integrals exact.  Cell corners are dyadic
rationals, hence exactly representable as binary floats: the fractional
overlap of a region with a cell is computed without rounding error.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .dyadic import (
    BoundaryCube,
    Box,
    HalfCube,
    RegionKind,
    RegionSet,
    region,
)


class DegenerateRegionError(ValueError):
    pass


class ResolutionError(ValueError):
    pass


@dataclass(frozen=True)
class Window:
    """Uniform grid of 2^depth cells per axis over CARLESON(root)."""

    root: BoundaryCube
    depth: int

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("window depth must be >= 1")

    @property
    def n(self) -> int:
        return self.root.n

    @property
    def cells_per_axis(self) -> int:
        return 1 << self.depth

    @property
    def shape(self) -> tuple:
        return (self.cells_per_axis,) * (self.n + 1)

    @property
    def cell_size(self) -> Fraction:
        return self.root.side / self.cells_per_axis

    @property
    def cell_volume(self) -> Fraction:
        return self.cell_size ** (self.n + 1)

    def box(self) -> Box:
        return ((Fraction(0), self.root.side),) + self.root.box()

    def axis_range(self, axis: int) -> tuple:
        if axis == 0:
            return (Fraction(0), self.root.side)
        return self.root.interval(axis - 1)

    def edges(self, axis: int) -> np.ndarray:
        lo, _ = self.axis_range(axis)
        h = float(self.cell_size)
        return float(lo) + h * np.arange(self.cells_per_axis + 1)

    def centers(self, axis: int) -> np.ndarray:
        e = self.edges(axis)
        return 0.5 * (e[:-1] + e[1:])

    def global_origin(self) -> tuple:
        """Global integer cell coordinates of the window's corner cell."""
        h = self.cell_size
        orig = [0]
        for i in range(self.n):
            lo, _ = self.root.interval(i)
            orig.append(int(lo / h))
        return tuple(orig)

    def cell_center(self, idx: Sequence[int]) -> tuple:
        """Center of the window cell with (local) integer index."""
        h = float(self.cell_size)
        out = []
        for axis, i in enumerate(idx):
            lo, _ = self.axis_range(axis)
            out.append(float(lo) + (i + 0.5) * h)
        return tuple(out)

    def carleson_halfcube(self) -> HalfCube:
        return HalfCube(self.root, 0)

    def min_cube_level(self) -> int:
        return self.root.level

    def max_cube_level(self) -> int:
        """Finest half-cube level resolvable on this grid (single cells)."""
        return self.root.level + self.depth


def _axis_overlaps(window: Window, axis: int, lo: Fraction, hi: Fraction) -> np.ndarray:
    """Length of (lo,hi) inside each cell along the axis; exact for dyadic ends."""
    e = window.edges(axis)
    w = np.minimum(e[1:], float(hi)) - np.maximum(e[:-1], float(lo))
    return np.clip(w, 0.0, None)


def _contract(values: np.ndarray, weights: list) -> complex:
    arr = values
    for w in weights:
        arr = np.tensordot(arr, w, axes=([0], [0]))
    return complex(arr)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Dense cell-averaged values on a Window; zero outside the window.

    ``support`` flags the cells that participate in operator sums; cells
    outside it are treated as exactly zero.
    """

    window: Window
    values: np.ndarray
    support: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.values.shape != self.window.shape:
            raise ValueError("values shape does not match window")
        if self.support is None:
            object.__setattr__(self, "support", self.values != 0)
        elif self.support.shape != self.window.shape:
            raise ValueError("support shape does not match window")

    # -- constructors -----------------------------------------------------

    @staticmethod
    def zeros(window: Window, dtype=np.complex128) -> "GridFunction":
        return GridFunction(window, np.zeros(window.shape, dtype=dtype))

    @staticmethod
    def from_callable(
        fn: Callable, window: Window, antialias: int = 1
    ) -> "GridFunction":
        """Cell averages of ``fn`` over an antialias^(1+n) subgrid per cell.

        ``fn`` is called as fn(t, x1, ..., xn) and may be vectorized over
        numpy arrays; a pointwise fallback is used if broadcasting fails.
        """
        if antialias < 1:
            raise ValueError("antialias must be >= 1")
        m = antialias
        axes = []
        h = float(window.cell_size)
        for axis in range(window.n + 1):
            e = window.edges(axis)
            sub = (np.arange(m) + 0.5) * (h / m)
            axes.append((e[:-1][:, None] + sub[None, :]).ravel())
        grids = np.meshgrid(*axes, indexing="ij")
        try:
            vals = np.asarray(fn(*grids), dtype=np.complex128)
            if vals.shape != grids[0].shape:
                raise ValueError
        except Exception:
            vec = np.vectorize(fn, otypes=[np.complex128])
            vals = vec(*grids)
        d = window.n + 1
        mcells = window.cells_per_axis
        shape = ()
        for _ in range(d):
            shape += (mcells, m)
        vals = vals.reshape(shape).mean(axis=tuple(range(1, 2 * d, 2)))
        if np.allclose(vals.imag, 0.0):
            vals = vals.real.astype(np.float64)
        return GridFunction(window, vals)

    @staticmethod
    def from_boxes(
        window: Window, items: Iterable, dtype=np.float64
    ) -> "GridFunction":
        """Sum of box indicators: items are (box, amplitude) pairs.

        Each cell receives amplitude * (overlap volume / cell volume), the
        exact cell average of the indicator sum.
        """
        vals = np.zeros(window.shape, dtype=dtype)
        h = float(window.cell_size)
        for box, amp in items:
            ws = [
                _axis_overlaps(window, axis, Fraction(lo), Fraction(hi)) / h
                for axis, (lo, hi) in enumerate(box)
            ]
            frac = ws[0]
            for w in ws[1:]:
                frac = np.multiply.outer(frac, w)
            vals += amp * frac
        return GridFunction(window, vals)

    # -- basic ops ---------------------------------------------------------

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def abs(self) -> "GridFunction":
        return GridFunction(self.window, np.abs(self.values), self.support)

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.window, values)

    def masked(self, mask: np.ndarray) -> "GridFunction":
        return GridFunction(
            self.window, np.where(mask, self.values, 0), self.support & mask
        )

    def integrate(self, r: RegionSet) -> complex:
        return integrate(self, r)

    def lq_norm(self, r: RegionSet, q) -> float:
        return lq_norm(self, r, q)

    def average(self, r: RegionSet):
        return average(self, r)

    # -- import/export -----------------------------------------------------

    _MAGIC = b"CCZGRID1"

    def to_binary(self, path) -> None:
        """Little-endian layout: magic 'CCZGRID1', int32 n, int32 depth,
        int32 root level, int64 root offsets (n of them), uint8 complex
        flag, then the value array (complex128 or float64, C order) and the
        support mask (uint8)."""
        with open(path, "wb") as fh:
            fh.write(self._MAGIC)
            w = self.window
            fh.write(struct.pack("<iii", w.n, w.depth, w.root.level))
            fh.write(struct.pack(f"<{w.n}q", *w.root.offsets))
            fh.write(struct.pack("<B", 1 if self.is_complex else 0))
            fh.write(np.ascontiguousarray(self.values).astype(
                "<c16" if self.is_complex else "<f8").tobytes())
            fh.write(self.support.astype("<u1").tobytes())

    @staticmethod
    def from_binary(path) -> "GridFunction":
        with open(path, "rb") as fh:
            if fh.read(8) != GridFunction._MAGIC:
                raise ValueError("bad magic; not a grid function file")
            n, depth, level = struct.unpack("<iii", fh.read(12))
            offsets = struct.unpack(f"<{n}q", fh.read(8 * n))
            (is_complex,) = struct.unpack("<B", fh.read(1))
            window = Window(BoundaryCube(level, tuple(offsets)), depth)
            count = (1 << depth) ** (n + 1)
            dtype = "<c16" if is_complex else "<f8"
            vals = np.frombuffer(fh.read(count * (16 if is_complex else 8)),
                                 dtype=dtype).reshape(window.shape).copy()
            supp = np.frombuffer(fh.read(count), dtype="<u1").reshape(
                window.shape).astype(bool)
        return GridFunction(window, vals, supp)

    def to_csv(self, path) -> None:
        """Rows `flat_index,re,im`; window metadata in `# key=value` comments."""
        w = self.window
        with open(path, "w") as fh:
            fh.write(f"# n={w.n}\n# depth={w.depth}\n# root_level={w.root.level}\n")
            offs = ",".join(str(k) for k in w.root.offsets)
            fh.write(f"# root_offsets={offs}\n")
            fh.write("index,re,im\n")
            flat = self.values.ravel()
            for i, v in enumerate(flat):
                c = complex(v)
                fh.write(f"{i},{c.real!r},{c.imag!r}\n")

    @staticmethod
    def from_csv(path) -> "GridFunction":
        meta = {}
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, val = line[1:].strip().partition("=")
                    meta[key.strip()] = val.strip()
                elif not line.startswith("index"):
                    i, re_s, im_s = line.split(",")
                    rows.append((int(i), float(re_s), float(im_s)))
        n = int(meta["n"])
        offsets = tuple(
            int(s) for s in meta["root_offsets"].split(",") if s != ""
        ) if n else ()
        window = Window(BoundaryCube(int(meta["root_level"]), offsets),
                        int(meta["depth"]))
        vals = np.zeros(window.shape, dtype=np.complex128).ravel()
        for i, re_v, im_v in rows:
            vals[i] = re_v + 1j * im_v
        vals = vals.reshape(window.shape)
        if np.allclose(vals.imag, 0.0):
            vals = vals.real.astype(np.float64)
        return GridFunction(window, vals)


# ---------------------------------------------------------------------------
# integration


def integrate(f: GridFunction, r: RegionSet):
    """Exact integral of f over r; partial cells weighted by overlap volume.

    The region may extend beyond the window; the outside contributes 0.
    """
    total = 0.0 + 0.0j
    for box in r.boxes:
        ws = [_axis_overlaps(f.window, axis, lo, hi)
              for axis, (lo, hi) in enumerate(box)]
        if any(w.max(initial=0.0) == 0.0 for w in ws):
            continue
        total += _contract(f.values, ws)
    if not f.is_complex:
        return total.real
    return total


def lq_norm(f: GridFunction, r: RegionSet, q) -> float:
    """L_q norm of f over r; q = inf is the essential sup over touched cells."""
    if q != np.inf and not 1 <= q:
        raise ValueError("q must lie in [1, inf]")
    if q == np.inf:
        out = 0.0
        absv = np.abs(f.values)
        for box in r.boxes:
            masks = [_axis_overlaps(f.window, axis, lo, hi) > 0
                     for axis, (lo, hi) in enumerate(box)]
            if not all(m.any() for m in masks):
                continue
            sub = absv[np.ix_(*masks)]
            if sub.size:
                out = max(out, float(sub.max()))
        return out
    powed = GridFunction(f.window, np.abs(f.values) ** q)
    return float(integrate(powed, r)) ** (1.0 / q)


def average(f: GridFunction, r: RegionSet):
    """integrate(f, r) / volume(r); the volume is the full region volume."""
    vol = r.volume()
    if vol == 0:
        raise DegenerateRegionError("degenerate region")
    return integrate(f, r) / float(vol)


def window_halfcubes(window: Window, min_side_cells: int = 1):
    """All dyadic half-cubes inside the window down to the given cell size."""
    out = []
    root = window.carleson_halfcube()
    stack = [root]
    while stack:
        c = stack.pop()
        out.append(c)
        side_cells = 1 << (window.max_cube_level() - c.level)
        if side_cells // 2 >= min_side_cells:
            stack.extend(c.children())
    return out


def window_boundary_cubes(window: Window):
    """Boundary cubes at levels root..root+J-1 (those with resolvable
    Whitney regions), grouped by depth."""
    by_depth = []
    current = [window.root]
    for _ in range(window.depth):
        by_depth.append(current)
        current = [c for q in current for c in q.children()]
    return by_depth
