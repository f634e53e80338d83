"""Exact dyadic geometry on the upper half-space.

Cubes carry integer coordinates (level, offsets), so every sidelength,
corner and region volume is an exact dyadic rational.  The spatial domain
is the positive quadrant [0,inf)^n, where the standard dyadic grid forms a
connected tree under inclusion; all offsets are therefore non-negative.

Axis convention: axis 0 is the transversal variable t, axes 1..n are the
boundary variables x.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence, Union

Scalar = Union[int, float, Fraction]

#: an axis-aligned box, one half-open (lo, hi) interval per axis
Box = tuple

TWO = Fraction(2)


def _frac(x: Scalar) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


# ---------------------------------------------------------------------------
# cubes


@dataclass(frozen=True)
class BoundaryCube:
    """Dyadic cube on the boundary R^n: product of [k_i 2^-j, (k_i+1) 2^-j).

    ``level`` is the signed integer j (sidelength 2^-j); ``offsets`` the n
    non-negative integers k_i.  n = 0 (empty offsets) models the boundary of
    the half-line, a single point whose "cube" only carries a sidelength.
    """

    level: int
    offsets: tuple

    def __post_init__(self):
        if any(k < 0 for k in self.offsets):
            raise ValueError("cube offsets must be non-negative (positive quadrant)")

    @property
    def n(self) -> int:
        return len(self.offsets)

    @property
    def side(self) -> Fraction:
        return TWO ** (-self.level)

    def interval(self, axis: int) -> tuple:
        ell = self.side
        k = self.offsets[axis]
        return (k * ell, (k + 1) * ell)

    def box(self) -> Box:
        return tuple(self.interval(i) for i in range(self.n))

    def center(self) -> tuple:
        return tuple((lo + hi) / 2 for lo, hi in self.box())

    def volume(self) -> Fraction:
        # 0-dimensional measure of the n=0 boundary point is 1
        return self.side ** self.n

    def parent(self) -> "BoundaryCube":
        return BoundaryCube(self.level - 1, tuple(k // 2 for k in self.offsets))

    def children(self) -> list:
        out = []
        for bits in range(2 ** self.n):
            offs = tuple(
                2 * self.offsets[i] + ((bits >> i) & 1) for i in range(self.n)
            )
            out.append(BoundaryCube(self.level + 1, offs))
        return out

    def contains_point(self, x: Sequence[Scalar]) -> bool:
        return all(lo <= _frac(v) < hi for v, (lo, hi) in zip(x, self.box()))

    def contains_cube(self, other: "BoundaryCube") -> bool:
        if other.level < self.level:
            return False
        shift = other.level - self.level
        return all(ko >> shift == ks for ko, ks in zip(other.offsets, self.offsets))

    def ancestor(self, level: int) -> "BoundaryCube":
        if level > self.level:
            raise ValueError("ancestor level must not exceed cube level")
        shift = self.level - level
        return BoundaryCube(level, tuple(k >> shift for k in self.offsets))


@dataclass(frozen=True)
class HalfCube:
    """Dyadic cube (k 2^-j, (k+1) 2^-j) x Q in the half-space.

    The time interval has the same length as the spatial sidelength, so the
    cube is a genuine (1+n)-cube.  ``time_index`` 0 gives a Carleson cube.
    """

    base: BoundaryCube
    time_index: int

    def __post_init__(self):
        if self.time_index < 0:
            raise ValueError("time index must be non-negative")

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def level(self) -> int:
        return self.base.level

    @property
    def side(self) -> Fraction:
        return self.base.side

    @property
    def t0(self) -> Fraction:
        return self.time_index * self.side

    @property
    def is_carleson(self) -> bool:
        return self.time_index == 0

    def t_interval(self) -> tuple:
        return (self.t0, self.t0 + self.side)

    def box(self) -> Box:
        return (self.t_interval(),) + self.base.box()

    def center(self) -> tuple:
        return tuple((lo + hi) / 2 for lo, hi in self.box())

    def volume(self) -> Fraction:
        return self.side ** (self.n + 1)

    def parent(self) -> "HalfCube":
        return HalfCube(self.base.parent(), self.time_index // 2)

    def children(self) -> list:
        out = []
        for k in (2 * self.time_index, 2 * self.time_index + 1):
            for b in self.base.children():
                out.append(HalfCube(b, k))
        return out

    def lower_children(self) -> list:
        """The 2^n children contained in the lower half of the cube."""
        return [HalfCube(b, 2 * self.time_index) for b in self.base.children()]

    def upper_children(self) -> list:
        return [HalfCube(b, 2 * self.time_index + 1) for b in self.base.children()]

    def contains_point(self, p: Sequence[Scalar]) -> bool:
        lo, hi = self.t_interval()
        return lo <= _frac(p[0]) < hi and self.base.contains_point(p[1:])

    def contains_cube(self, other: "HalfCube") -> bool:
        if other.level < self.level:
            return False
        shift = other.level - self.level
        return (
            other.time_index >> shift == self.time_index
            and self.base.contains_cube(other.base)
        )

    def ancestor(self, level: int) -> "HalfCube":
        shift = self.level - level
        if shift < 0:
            raise ValueError("ancestor level must not exceed cube level")
        return HalfCube(self.base.ancestor(level), self.time_index >> shift)

    def siblings(self) -> list:
        """All other children of the parent cube."""
        return [c for c in self.parent().children() if c != self]


def children(c: HalfCube) -> list:
    """The 2^(n+1) maximal dyadic subcubes tiling c."""
    return c.children()


def boundary_cube_at(level: int, x: Sequence[Scalar]) -> BoundaryCube:
    """The dyadic boundary cube of the given level containing x."""
    ell = TWO ** (-level)
    offs = tuple(int(_frac(v) / ell) for v in x)
    return BoundaryCube(level, offs)


def halfcube_at(level: int, p: Sequence[Scalar]) -> HalfCube:
    """The dyadic half-space cube of the given level containing p = (t, x)."""
    ell = TWO ** (-level)
    k = int(_frac(p[0]) / ell)
    return HalfCube(boundary_cube_at(level, p[1:]), k)


def enclosing_halfcube(cubes: Sequence[HalfCube]) -> HalfCube:
    """Smallest dyadic cube containing all given cubes (exists in the quadrant)."""
    it = iter(cubes)
    acc = next(it)
    for c in it:
        lvl = min(acc.level, c.level)
        a, b = acc.ancestor(lvl), c.ancestor(lvl)
        while a != b:
            a, b = a.parent(), b.parent()
        acc = a
    return acc


# ---------------------------------------------------------------------------
# regions


def _box_volume(box: Box) -> Fraction:
    v = Fraction(1)
    for lo, hi in box:
        if hi <= lo:
            return Fraction(0)
        v *= hi - lo
    return v


def _box_intersect(a: Box, b: Box) -> Optional[Box]:
    out = []
    for (alo, ahi), (blo, bhi) in zip(a, b):
        lo, hi = max(alo, blo), min(ahi, bhi)
        if hi <= lo:
            return None
        out.append((lo, hi))
    return tuple(out)


def _box_subtract(a: Box, b: Box) -> list:
    """a \\ b as disjoint boxes (faces are null sets; empty pieces dropped)."""
    if _box_intersect(a, b) is None:
        return [a]
    pieces = []
    core = list(a)
    for i, ((alo, ahi), (blo, bhi)) in enumerate(zip(a, b)):
        if blo > alo:
            pieces.append(tuple(core[:i]) + (((alo, blo)),) + tuple(a[i + 1:]))
            core[i] = (blo, ahi)
        if bhi < ahi:
            pieces.append(tuple(core[:i]) + (((bhi, ahi)),) + tuple(a[i + 1:]))
            core[i] = (core[i][0], bhi)
    return [p for p in pieces if _box_volume(p) > 0]


@dataclass(frozen=True)
class RegionSet:
    """A finite union of pairwise disjoint open boxes with rational corners."""

    dim: int
    boxes: tuple

    @staticmethod
    def from_box(box: Box) -> "RegionSet":
        box = tuple((_frac(lo), _frac(hi)) for lo, hi in box)
        boxes = (box,) if _box_volume(box) > 0 else ()
        return RegionSet(len(box), boxes)

    @staticmethod
    def empty(dim: int) -> "RegionSet":
        return RegionSet(dim, ())

    def volume(self) -> Fraction:
        return sum((_box_volume(b) for b in self.boxes), Fraction(0))

    def subtract_box(self, box: Box) -> "RegionSet":
        box = tuple((_frac(lo), _frac(hi)) for lo, hi in box)
        out = []
        for b in self.boxes:
            out.extend(_box_subtract(b, box))
        return RegionSet(self.dim, tuple(out))

    def intersect_box(self, box: Box) -> "RegionSet":
        box = tuple((_frac(lo), _frac(hi)) for lo, hi in box)
        out = []
        for b in self.boxes:
            cut = _box_intersect(b, box)
            if cut is not None:
                out.append(cut)
        return RegionSet(self.dim, tuple(out))

    def union_disjoint(self, other: "RegionSet") -> "RegionSet":
        return RegionSet(self.dim, self.boxes + other.boxes)

    def contains_point(self, p: Sequence[Scalar]) -> bool:
        q = tuple(_frac(v) for v in p)
        for b in self.boxes:
            if all(lo < v < hi for v, (lo, hi) in zip(q, b)):
                return True
        return False


class RegionKind(Enum):
    UPPER = "upper"
    LOWER = "lower"
    T = "t"
    L = "l"
    SQCAP = "sqcap"
    SQCAP_AT = "sqcap_at"
    BOX = "box"
    BOX_AT = "box_at"
    CARLESON = "carleson"
    WHITNEY = "whitney"
    TILDE_W = "tilde_w"
    ENLARGE3 = "enlarge3"


_BOUNDARY_KINDS = {RegionKind.CARLESON, RegionKind.WHITNEY, RegionKind.TILDE_W}
_AT_KINDS = {RegionKind.SQCAP_AT, RegionKind.BOX_AT}


def _three(iv: tuple) -> tuple:
    lo, hi = iv
    ell = hi - lo
    return (lo - ell, hi + ell)


def _double(iv: tuple) -> tuple:
    lo, hi = iv
    half = (hi - lo) / 2
    return (lo - half, hi + half)


def region(
    cube: Union[HalfCube, BoundaryCube],
    kind: RegionKind,
    at: Optional[Sequence[Scalar]] = None,
) -> RegionSet:
    """The region of the given kind attached to a cube.

    Half-space cubes admit the kinds UPPER, LOWER, T, L, SQCAP, SQCAP_AT,
    BOX, BOX_AT and ENLARGE3; boundary cubes admit CARLESON, WHITNEY and
    TILDE_W.  SQCAP_AT/BOX_AT require a point ``at`` inside the cube.
    Regions are not clipped to the quadrant in x (integration treats the
    outside as zero); ENLARGE3 is the exception, being the intersection of
    the tripled cube with the half-space over the quadrant.
    """
    if isinstance(cube, BoundaryCube):
        if kind not in _BOUNDARY_KINDS:
            raise ValueError(f"kind {kind} requires a HalfCube")
        ell = cube.side
        if kind is RegionKind.CARLESON:
            return RegionSet.from_box(((Fraction(0), ell),) + cube.box())
        if kind is RegionKind.WHITNEY:
            return RegionSet.from_box(((ell / 2, ell),) + cube.box())
        tilde = tuple(_double(cube.interval(i)) for i in range(cube.n))
        return RegionSet.from_box(((ell / 2, 3 * ell / 2),) + tilde)

    if kind in _BOUNDARY_KINDS:
        raise ValueError(f"kind {kind} requires a BoundaryCube")

    a = cube.t0
    ell = cube.side
    q = cube.base.box()
    three_q = tuple(_three(iv) for iv in q)

    if kind is RegionKind.UPPER:
        return RegionSet.from_box(((a + ell / 2, a + ell),) + q)
    if kind is RegionKind.LOWER:
        return RegionSet.from_box(((a, a + ell / 2),) + q)
    if kind is RegionKind.T:
        return RegionSet.from_box(((a + ell / 2, a + 2 * ell),) + three_q)
    if kind is RegionKind.L:
        return RegionSet.from_box(((a, a + ell / 2),) + three_q)
    if kind is RegionKind.BOX:
        return RegionSet.from_box(((a, a + 2 * ell),) + three_q)
    if kind is RegionKind.ENLARGE3:
        t_iv = (max(Fraction(0), a - ell), a + 2 * ell)
        clipped = tuple((max(Fraction(0), lo), hi) for lo, hi in three_q)
        return RegionSet.from_box((t_iv,) + clipped)

    if kind in _AT_KINDS:
        if at is None:
            raise ValueError(f"kind {kind} requires the point `at`")
        if not cube.contains_point(at):
            raise ValueError("point `at` lies outside the cube")
        t = _frac(at[0])
        s0 = min(a + ell / 2, t)
        if kind is RegionKind.BOX_AT:
            return RegionSet.from_box(((s0, a + 2 * ell),) + three_q)
        sqcap = _sqcap(cube)
        return sqcap.intersect_box(((s0, a + 2 * ell),) + three_q)

    if kind is RegionKind.SQCAP:
        return _sqcap(cube)

    raise ValueError(f"unsupported region kind {kind}")


def _sqcap(cube: HalfCube) -> RegionSet:
    a = cube.t0
    ell = cube.side
    three_q = tuple(_three(iv) for iv in cube.base.box())
    big = RegionSet.from_box(((a, a + 2 * ell),) + three_q)
    lower = ((a, a + ell / 2),) + cube.base.box()
    return big.subtract_box(lower)


def covering_family(support: HalfCube, levels: int) -> list:
    """Disjoint cubes covering a neighbourhood of ``support`` from above.

    Returns ``support`` together with all siblings of its first ``levels``
    ancestors.  Every returned cube R satisfies support within 3R, and the
    family tiles the ancestor of ``support`` ``levels`` generations up.
    """
    if levels < 0:
        raise ValueError("levels must be non-negative")
    family = [support]
    p = support
    for _ in range(levels):
        family.extend(p.siblings())
        p = p.parent()
    return family
