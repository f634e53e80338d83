"""Pure-numpy implementations of the pairwise summation kernels.

Used when the compiled extension is unavailable (or explicitly disabled via
the CAUSALCZ_FORCE_FALLBACK environment variable).  Blocked over targets to
bound memory; semantics identical to causalcz._speedups.
"""

from __future__ import annotations

import numpy as np

_BLOCK = 256


def pairwise_invsq(tt, tx, tphi, ti, tj, st, sx, sphi, si, sj, w,
                   pref, sign, excl):
    nt = tt.shape[0]
    out = np.zeros(nt, dtype=np.complex128)
    simag = sphi + st
    for b in range(0, nt, _BLOCK):
        sl = slice(b, min(b + _BLOCK, nt))
        dz = (sx[None, :] - tx[sl, None]) + 1j * (
            simag[None, :] - (tphi[sl] + tt[sl])[:, None]
        )
        if sign > 0:
            mask = tt[sl, None] > st[None, :]
        elif sign < 0:
            mask = tt[sl, None] < st[None, :]
        else:
            mask = np.ones(dz.shape, dtype=bool)
        mask &= ~(
            (np.abs(ti[sl, None] - si[None, :]) <= excl)
            & (np.abs(tj[sl, None] - sj[None, :]) <= excl)
        )
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = w[None, :] / (dz * dz)
        out[sl] = pref * np.where(mask, vals, 0).sum(axis=1)
    return out


def pairwise_recip(tt, ti, st, si, w, pref, sign, excl):
    nt = tt.shape[0]
    out = np.zeros(nt, dtype=np.complex128)
    for b in range(0, nt, _BLOCK):
        sl = slice(b, min(b + _BLOCK, nt))
        dt = tt[sl, None] - st[None, :]
        if sign > 0:
            mask = dt > 0
        elif sign < 0:
            mask = dt < 0
        else:
            mask = dt != 0
        mask &= ~(np.abs(ti[sl, None] - si[None, :]) <= excl)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = w[None, :] / dt
        out[sl] = pref * np.where(mask, vals, 0).sum(axis=1)
    return out
