"""Concrete singular kernels, causal truncations, and numerical checks of
the size/regularity axioms and of the integral regularity condition.

Points are tuples with coordinate 0 transversal (time); causal truncation
keeps target-above-source ("+", upward) or target-below-source ("-",
downward) and assigns the interface t = s to neither part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Optional

import numpy as np

from .dyadic import HalfCube, RegionKind, region


class SingularityError(ZeroDivisionError):
    pass


def parse_sign(sign) -> int:
    if sign in (1, -1, 0):
        return sign
    if sign in ("+", "up"):
        return 1
    if sign in ("-", "down"):
        return -1
    if sign in (None, "", "none"):
        return 0
    raise ValueError(f"unrecognized causal sign {sign!r}")


@dataclass(frozen=True)
class KernelSpec:
    """An evaluable kernel with causality sign and regularity exponent.

    ``family`` tags kernels with a fast pairwise-summation path
    ("invsq": pref/(w-z)^2 over a Lipschitz graph, "recip": pref/(u-v) on
    the line); generic kernels supply ``custom_eval`` instead.
    """

    name: str
    point_dim: int
    gamma: float
    causal_sign: int = 0
    family: Optional[str] = None
    pref: complex = 1.0
    phi: Optional[Callable] = None
    lip: float = 0.0
    custom_eval: Optional[Callable] = field(default=None, compare=False)

    def with_sign(self, sign) -> "KernelSpec":
        s = parse_sign(sign)
        suffix = {1: "+", -1: "-", 0: ""}[s]
        base = self.name.rstrip("+-")
        return replace(self, causal_sign=s, name=base + suffix)

    # -- scalar evaluation --------------------------------------------------

    def _phi_at(self, x):
        return 0.0 if self.phi is None else self.phi(x)

    def evaluate_full(self, xbar, ybar) -> complex:
        """The untruncated kernel; raises on the diagonal."""
        if tuple(map(float, xbar)) == tuple(map(float, ybar)):
            raise SingularityError("kernel evaluated on the diagonal")
        if self.family == "invsq":
            t, x = float(xbar[0]), float(xbar[1])
            s, y = float(ybar[0]), float(ybar[1])
            dz = (y - x) + 1j * ((self._phi_at(y) + s) - (self._phi_at(x) + t))
            if dz == 0:
                raise SingularityError("kernel evaluated on the diagonal")
            return self.pref / (dz * dz)
        if self.family == "recip":
            u, v = float(xbar[0]), float(ybar[0])
            return self.pref / (u - v)
        return self.custom_eval(xbar, ybar)

    def evaluate(self, xbar, ybar) -> complex:
        """Truncated kernel: zero outside the causal half (and on t = s)."""
        if self.causal_sign > 0 and not float(xbar[0]) > float(ybar[0]):
            return 0.0
        if self.causal_sign < 0 and not float(xbar[0]) < float(ybar[0]):
            return 0.0
        return self.evaluate_full(xbar, ybar)

    # -- vectorized evaluation ----------------------------------------------

    def evaluate_array(self, xbars: np.ndarray, ybars: np.ndarray) -> np.ndarray:
        """Truncated kernel over arrays of points with shape (..., point_dim),
        broadcasting; diagonal entries evaluate to 0."""
        xbars = np.asarray(xbars, dtype=float)
        ybars = np.asarray(ybars, dtype=float)
        t, s = xbars[..., 0], ybars[..., 0]
        if self.family == "invsq":
            x, y = xbars[..., 1], ybars[..., 1]
            phix = np.zeros_like(x) if self.phi is None else self.phi(x)
            phiy = np.zeros_like(y) if self.phi is None else self.phi(y)
            dz = (y - x) + 1j * ((phiy + s) - (phix + t))
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = self.pref / (dz * dz)
            vals = np.where(dz == 0, 0.0, vals)
        elif self.family == "recip":
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = self.pref / (t - s)
            vals = np.where(t == s, 0.0, vals)
        else:
            ev = np.vectorize(
                lambda *cs: self.evaluate_full(cs[: self.point_dim],
                                               cs[self.point_dim:]),
                otypes=[np.complex128],
            )
            coords = [xbars[..., i] for i in range(self.point_dim)]
            coords += [ybars[..., i] for i in range(self.point_dim)]
            vals = ev(*coords)
        if self.causal_sign > 0:
            vals = np.where(t > s, vals, 0.0)
        elif self.causal_sign < 0:
            vals = np.where(t < s, vals, 0.0)
        return vals


# ---------------------------------------------------------------------------
# constructors


def beurling(sign=None) -> KernelSpec:
    """k(xbar, ybar) = -(1/pi) / (w - z)^2 with z = x + it, w = y + is."""
    return KernelSpec(
        name="beurling",
        point_dim=2,
        gamma=1.0,
        family="invsq",
        pref=-1.0 / math.pi,
    ).with_sign(sign)


def lipgraph(phi: Callable, lip: float, sign=None) -> KernelSpec:
    """Upper-half-plane kernel transported to the region above a Lipschitz
    graph: -(1/(2 pi)) / (y + i(phi(y)+s) - x - i(phi(x)+t))^2.

    With phi = 0 this is half the beurling kernel.
    """
    return KernelSpec(
        name="lipgraph",
        point_dim=2,
        gamma=1.0,
        family="invsq",
        pref=-1.0 / (2.0 * math.pi),
        phi=phi,
        lip=lip,
    ).with_sign(sign)


def hilbert_boundary(sign=None) -> KernelSpec:
    """The 1-d Cauchy kernel (1/pi)/(u - v).

    Evaluated horizontally (pointwise in t) it is the kernel behind the
    closed-form piecewise Hilbert transform; with a causal sign it is the
    half-line (n = 0) downward/upward singular kernel.
    """
    return KernelSpec(
        name="hilbert",
        point_dim=1,
        gamma=1.0,
        family="recip",
        pref=1.0 / math.pi,
    ).with_sign(sign)


# ---------------------------------------------------------------------------
# kernel axiom checks


def sample_triples(k: KernelSpec, count: int, rng, scale: float = 1.0):
    """Admissible (xbar, ybar, tbar) samples: |tbar| <= |xbar-ybar| / 2 and
    all perturbed points stay in the open half-space."""
    d = k.point_dim
    out = []
    while len(out) < count:
        xbar = rng.uniform(0.2 * scale, 1.8 * scale, size=d)
        ybar = rng.uniform(0.2 * scale, 1.8 * scale, size=d)
        dist = float(np.linalg.norm(xbar - ybar))
        if dist < 0.05 * scale:
            continue
        tbar = rng.uniform(-1.0, 1.0, size=d)
        norm = float(np.linalg.norm(tbar))
        if norm == 0.0:
            continue
        tbar *= rng.uniform(0.0, 0.5) * dist / norm
        if min(xbar[0] + tbar[0], ybar[0] + tbar[0]) <= 0:
            continue
        out.append((tuple(xbar), tuple(ybar), tuple(tbar)))
    return out


def cz_constants(k: KernelSpec, samples: Iterable) -> dict:
    """Empirical size and regularity constants over the given samples.

    bound_const: sup |k| |xbar-ybar|^d;  reg_const: sup of the increment
    ratio with the kernel's exponent gamma.  Both use the untruncated kernel.
    """
    d = k.point_dim
    bound = 0.0
    reg = 0.0
    for xbar, ybar, tbar in samples:
        dist = math.dist(xbar, ybar)
        val = abs(k.evaluate_full(xbar, ybar))
        bound = max(bound, val * dist ** d)
        tnorm = math.hypot(*tbar)
        if tnorm == 0.0:
            continue
        y_shift = tuple(a + b for a, b in zip(ybar, tbar))
        x_shift = tuple(a + b for a, b in zip(xbar, tbar))
        incr = max(
            abs(k.evaluate_full(xbar, y_shift) - k.evaluate_full(xbar, ybar)),
            abs(k.evaluate_full(x_shift, ybar) - k.evaluate_full(xbar, ybar)),
        )
        reg = max(reg, incr * dist ** (d + k.gamma) / tnorm ** k.gamma)
    return {"bound_const": bound, "reg_const": reg}


@dataclass(frozen=True)
class HormanderResult:
    quadrature: float
    tail_bound: float


def hormander_constant(
    k: KernelSpec,
    cube: HalfCube,
    y1,
    y2,
    outer_halfwidth: int = 8,
    resolution: int = 4,
    reg_const: float = 1.0,
) -> HormanderResult:
    """Integral of |k(x,y1)-k(x,y2)| + |k(y1,x)-k(y2,x)| over the window
    (outer_halfwidth cube sidelengths around the cube) minus the tripled
    cube, by midpoint quadrature on cells of size side/resolution.

    The remainder beyond the window is bounded analytically using the
    gamma-decay of kernel increments and returned separately.  Grids for
    nested window sizes coincide on their overlap, so doubling
    outer_halfwidth isolates the annulus contribution exactly.
    """
    if not (cube.contains_point(y1) and cube.contains_point(y2)):
        raise ValueError("y1, y2 must lie inside the cube")
    d = k.point_dim
    ell = float(cube.side)
    h = ell / resolution
    corner = [float(iv[0]) for iv in cube.box()]
    counts = 2 * outer_halfwidth * resolution + resolution
    axes = []
    for i in range(d):
        lo = corner[i] - outer_halfwidth * ell
        c = lo + (np.arange(counts) + 0.5) * h
        if i == 0:
            c = c[c > 0]
        axes.append(c)
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)

    exc = region(cube, RegionKind.ENLARGE3)
    inside = np.zeros(len(pts), dtype=bool)
    for box in exc.boxes:
        m = np.ones(len(pts), dtype=bool)
        for i, (lo, hi) in enumerate(box):
            m &= (pts[:, i] > float(lo)) & (pts[:, i] < float(hi))
        inside |= m
    pts = pts[~inside]

    y1a = np.asarray(y1, dtype=float)
    y2a = np.asarray(y2, dtype=float)
    integrand = np.abs(k.evaluate_array(pts, y1a) - k.evaluate_array(pts, y2a))
    integrand += np.abs(k.evaluate_array(y1a, pts) - k.evaluate_array(y2a, pts))
    quadrature = float(np.sum(integrand) * h ** d)

    # beyond radius R the increments decay like |y1-y2|^g / r^(d+g)
    surface = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}.get(
        d, 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)
    )
    radius = outer_halfwidth * ell
    sep = float(np.linalg.norm(y1a - y2a))
    g = k.gamma
    tail = 2.0 * reg_const * sep ** g * surface / (g * radius ** g) if sep else 0.0
    return HormanderResult(quadrature, tail)
