"""The lacunary Poisson-extension contradiction: the time derivative of the
extension of modulated bumps accumulates linearly in the number of
frequencies, while the square-function side only grows like its square
root, so no Carleson bound can hold for the underlying transform.

The check is the deterministic inequality chain: quadrature for the
left-hand side (with dyadic time panels refined towards the boundary), the
analytic lower bound e^{-2 pi t 2^k} (2 pi 2^k c0 - c1) at every sampled
time, and the exactly constant right-hand normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..operators import FrequencyProfile, fourier_integral, poisson_dt, poisson_pt
from .report import ExperimentReport, Stopwatch


@dataclass(frozen=True)
class AppendixSpec:
    """Bump profile (supported in a compact subset of the open positive
    axis), base exponent, count of lacunary frequencies, norm exponent and
    quadrature resolutions."""

    center: float = 0.75
    width: float = 0.5
    amplitude: float = 1.0
    k0: int = 4
    k_max: int = 12
    p: float = 2.0
    freq_nodes: int = 96
    x_nodes: int = 64
    t_panel_nodes: int = 8

    def __post_init__(self):
        if self.center - self.width / 2 <= 0:
            raise ValueError("bump support must stay inside the open positive axis")
        if self.amplitude == 0:
            raise ValueError("bump must not vanish identically")

    def profile(self) -> FrequencyProfile:
        c, w, a = self.center, self.width, self.amplitude

        def fn(eta):
            u = (np.asarray(eta, dtype=float) - c) / (w / 2)
            out = np.zeros_like(u)
            inside = np.abs(u) < 1
            out[inside] = a * np.exp(1 - 1 / (1 - u[inside] ** 2))
            return out

        return FrequencyProfile(fn, c - w / 2, c + w / 2)


def _gauss_panel(lo: float, hi: float, nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (hi - lo) * (x + 1.0) + lo, 0.5 * (hi - lo) * w


def _l1_01(values: np.ndarray, xw: np.ndarray) -> float:
    return float(np.sum(np.abs(values) * xw))


def run_appendix(spec: AppendixSpec = AppendixSpec(),
                 k_counts: Sequence[int] = (2, 4, 8)) -> ExperimentReport:
    rep = ExperimentReport(
        "appendix-lacunary-poisson",
        {
            "center": spec.center, "width": spec.width,
            "amplitude": spec.amplitude, "k0": spec.k0,
            "k_counts": list(k_counts), "p": spec.p,
        },
    )
    if max(k_counts) + spec.k0 > spec.k_max + spec.k0:
        raise ValueError("k_counts exceed the configured maximum")
    with Stopwatch() as sw:
        prof = spec.profile()
        kmax_count = max(k_counts)
        ks = list(range(spec.k0 + 1, spec.k0 + kmax_count + 1))

        # time nodes: dyadic panels refined down to 2^(-k0-K-2)
        j_deep = spec.k0 + kmax_count + 2
        t_nodes, t_weights = [], []
        for j in range(j_deep + 1):
            lo, hi = 2.0 ** -(j + 1), 2.0 ** -j
            tn, tw = _gauss_panel(lo, hi, spec.t_panel_nodes)
            t_nodes.append(tn)
            t_weights.append(tw)
        t_nodes = np.concatenate(t_nodes)
        t_weights = np.concatenate(t_weights)

        xq, xw = _gauss_panel(0.0, 1.0, spec.x_nodes)

        # c0: min over [0,1] (dense grid plus the quadrature times) of the
        # L1(0,1) norm of the extension of the bump itself
        t_dense = np.concatenate([np.linspace(0.0, 1.0, 129), t_nodes])
        c0 = min(
            _l1_01(poisson_pt(prof, t, xq, nodes=spec.freq_nodes), xw)
            for t in t_dense
        )
        # c1: L1(R) norm of the bump derivative, wide panel quadrature
        c1 = 0.0
        phi_p_norm = 0.0
        for a in range(-64, 64):
            pq, pw = _gauss_panel(float(a), float(a + 1), 24)
            deriv = fourier_integral(
                prof, pq, lambda xi: 2j * np.pi * xi, nodes=spec.freq_nodes
            )
            c1 += _l1_01(deriv, pw)
            phi_vals = fourier_integral(prof, pq, nodes=spec.freq_nodes)
            phi_p_norm += float(np.sum(np.abs(phi_vals) ** spec.p * pw))
        phi_p_norm = phi_p_norm ** (1.0 / spec.p)
        rep.fitted["c0"] = c0
        rep.fitted["c1"] = c1
        rep.fitted["phi_p_norm"] = phi_p_norm

        # the L1(0,1) norm of d/dt of every extension, at every time node
        norms = np.empty((len(ks), len(t_nodes)))
        for i, k in enumerate(ks):
            shifted = prof.shifted(float(2 ** k))
            for j, t in enumerate(t_nodes):
                vals = poisson_dt(shifted, float(t), xq, nodes=spec.freq_nodes)
                norms[i, j] = _l1_01(vals, xw)

        # pointwise analytic lower bound where positive
        bound_ok = True
        worst_margin = np.inf
        for i, k in enumerate(ks):
            bound = np.exp(-2 * np.pi * t_nodes * 2.0 ** k) * (
                2 * np.pi * 2.0 ** k * c0 - c1
            )
            positive = bound > 0
            if positive.any():
                margin = norms[i, positive] / bound[positive]
                worst_margin = min(worst_margin, float(margin.min()))
                bound_ok &= bool(np.all(margin >= 1.0 - 1e-6))
        rep.fitted["lower_bound_worst_margin"] = worst_margin

        # Growth is measured on the lacunary time panels (2^-j, 2^(1-j)),
        # j = k0+1 .. k0+K: that sub-integral is what accumulates one unit
        # per frequency.  The full integral over (0,1) is recorded too, but
        # it carries a K-independent transition layer below the deepest
        # panel (the top frequency's own boundary layer) which masks the
        # linear growth at small K.
        pn = spec.t_panel_nodes
        lhs_full, lhs_panels, rhs = {}, {}, {}
        for count in k_counts:
            top = norms[:count].max(axis=0)
            lhs_full[count] = float(np.sum(top * t_weights))
            lo, hi = (spec.k0 + 1) * pn, (spec.k0 + count + 1) * pn
            lhs_panels[count] = float(np.sum(top[lo:hi] * t_weights[lo:hi]))
            rhs[count] = math.sqrt(count) * phi_p_norm
            rep.add_measurement(count, lhs_panels[count])
        rep.tables["lhs_rhs"] = [
            {"K": c, "lhs_panels": lhs_panels[c], "lhs_full": lhs_full[c],
             "rhs": rhs[c],
             "lhs_over_sqrtK": lhs_panels[c] / math.sqrt(c)}
            for c in k_counts
        ]

        normalized = [lhs_panels[c] / math.sqrt(c) for c in k_counts]
        increasing = all(b > a for a, b in zip(normalized, normalized[1:]))
        growth_ok = True
        if 4 in lhs_panels and 8 in lhs_panels:
            rep.fitted["lhs_growth_8_over_4"] = lhs_panels[8] / lhs_panels[4]
            growth_ok = lhs_panels[8] / lhs_panels[4] >= 1.4
        rhs_norm = [rhs[c] / math.sqrt(c) for c in k_counts]
        rhs_const = max(rhs_norm) - min(rhs_norm) <= 1e-12 * max(rhs_norm)

        rep.add_verdict("lhs_sqrtk_increasing", increasing,
                        f"normalized {['%.4f' % v for v in normalized]}")
        rep.add_verdict("lhs_growth_ratio", growth_ok)
        rep.add_verdict("pointwise_lower_bound", bound_ok,
                        f"worst margin {worst_margin:.6f}")
        rep.add_verdict("rhs_constant", rhs_const)
    rep.runtime_ms = sw.ms
    return rep
