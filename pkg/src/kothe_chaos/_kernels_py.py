"""Pure numpy orbit-distance kernel, used when the compiled one is absent."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

_CHUNK = 4096
_CELLS = 1 << 22  # cap on elements in one temporary (32 MiB of float64)


def _frac(s):
    with np.errstate(invalid="ignore"):
        out = s / (1.0 + s)
    return np.where(np.isinf(s), 1.0, out)


def orbit_distances(absw, weights, coef, coltail, tailfac, p, discard, n):
    """Bounds [lo, hi] on d(B^i x, B^i y) for i = 0..n-1.

    ``absw`` holds |w_j|**p (|w_j| when p == 0) for j = 1..n+J-1 with
    w = x - y, ``weights`` the matching powers of a_{m,k} for m = 1..J over
    the distinct columns, ``coef`` the summed 2**-k factor of each column,
    ``coltail`` the column tails past J and ``tailfac`` the per-shift
    suffix sup of |w| (raised to p).
    """
    J = weights.shape[0]
    lo = np.empty(n)
    hi = np.empty(n)
    if n == 0:
        return lo, hi
    view = sliding_window_view(absw, J)
    width = J * weights.shape[1] if p == 0 else J
    step = max(1, min(_CHUNK, _CELLS // max(1, width)))
    for s0 in range(0, n, step):
        s1 = min(n, s0 + step)
        win = np.ascontiguousarray(view[s0:s1])
        tf = tailfac[s0:s1]
        if p == 0:
            S = (win[:, :, None] * weights[None, :, :]).max(axis=1)
        else:
            S = win @ weights
        with np.errstate(invalid="ignore"):
            T = np.where(tf[:, None] > 0, tf[:, None] * coltail[None, :], 0.0)
        if p == 0:
            s_lo, s_hi = S, np.maximum(S, T)
        elif p == 1:
            s_lo, s_hi = S, S + T
        else:
            s_lo, s_hi = S ** (1.0 / p), (S + T) ** (1.0 / p)
        a = _frac(s_lo) @ coef
        b = _frac(s_hi) @ coef + discard
        nonzero = (win > 0).any(axis=1) | (tf > 0)
        lo[s0:s1] = np.where(nonzero, a, 0.0)
        hi[s0:s1] = np.where(nonzero, b, 0.0)
    return lo, hi
