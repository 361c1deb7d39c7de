"""Hot numeric kernels, JIT-compiled when numba is available.

Two implementations are kept for every kernel: a numba ``@njit`` loop
version and a vectorized pure-numpy version.  The numpy path is selected
when numba is not importable or when the environment variable
``CURVEDIM_NUMBA=0`` is set.  Both paths compute identical results (the
numpy fallback is exact, not an approximation); ``benchmarks/bench_kernels.py``
compares their throughput.
"""
from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("CURVEDIM_NUMBA", "1").strip().lower()
_WANT_NUMBA = _FLAG not in ("0", "false", "no", "off")

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - environment without numba
    _HAVE_NUMBA = False

NUMBA_ENABLED = _WANT_NUMBA and _HAVE_NUMBA


# ---------------------------------------------------------------------------
# quantile merge: common refinement of two cumulative-mass partitions.
# cwa, cwb are strictly positive, nondecreasing, and end at the same total
# (callers normalize the last entry to exactly the shared total mass).

def _merge_quantiles_np(cwa, cwb):
    edges = np.union1d(cwa, cwb)
    edges = edges[edges > 0.0]
    lo = np.concatenate(([0.0], edges[:-1]))
    mass = edges - lo
    mid = 0.5 * (lo + edges)
    ia = np.minimum(np.searchsorted(cwa, mid, side="left"), len(cwa) - 1)
    ib = np.minimum(np.searchsorted(cwb, mid, side="left"), len(cwb) - 1)
    keep = mass > 0.0
    return ia[keep].astype(np.int64), ib[keep].astype(np.int64), lo[keep], edges[keep]


def _merge_quantiles_loop(cwa, cwb):
    na, nb = len(cwa), len(cwb)
    out_ia = np.empty(na + nb, dtype=np.int64)
    out_ib = np.empty(na + nb, dtype=np.int64)
    out_lo = np.empty(na + nb)
    out_hi = np.empty(na + nb)
    i = 0
    j = 0
    lo = 0.0
    k = 0
    while i < na and j < nb:
        hi = min(cwa[i], cwb[j])
        if hi > lo:
            out_ia[k] = i
            out_ib[k] = j
            out_lo[k] = lo
            out_hi[k] = hi
            k += 1
            lo = hi
        if cwa[i] <= hi:
            i += 1
        if cwb[j] <= hi:
            j += 1
    return out_ia[:k], out_ib[:k], out_lo[:k], out_hi[:k]


# ---------------------------------------------------------------------------
# Hopf-Lax inf-convolution on a 1-D grid (exact O(n^2) inf over grid points)

def _hopf_lax_1d_np(pts, phi, t, period):
    diff = np.abs(pts[:, None] - pts[None, :])
    if period > 0.0:
        diff = np.minimum(diff, period - diff)
    return np.min(diff * diff / (2.0 * t) + phi[None, :], axis=1)


def _hopf_lax_1d_loop(pts, phi, t, period):
    n = len(pts)
    out = np.empty(n)
    inv = 1.0 / (2.0 * t)
    for i in range(n):
        best = np.inf
        xi = pts[i]
        for j in range(n):
            d = abs(xi - pts[j])
            if period > 0.0:
                d2 = period - d
                if d2 < d:
                    d = d2
            val = d * d * inv + phi[j]
            if val < best:
                best = val
        out[i] = best
    return out


# ---------------------------------------------------------------------------
# Exact unrolled transport cost between 1-D block measures for one shift of
# the cumulative mass of the second measure.  Block k of measure a occupies
# [xa_lo[k], xa_hi[k]] with cumulative upper mass cwa[k] (cwa[-1] == 1).
# Measure b is pre-unrolled by the caller over enough periods that its
# shifted cumulative range covers (0, 1].  Block interpolation always uses
# the original (unshifted) block widths, so fractional overlaps are exact.
# Returns the integral of (F_a^{-1}(u) - F_b^{-1}(u + shift))^2 du over (0,1).

def _shift_cost_blocks_loop(xa_lo, xa_hi, cwa, xb_lo, xb_hi, cwb, shift, first_lower):
    na = len(cwa)
    nb = len(cwb)
    cost = 0.0
    i = 0
    j = 0
    while j < nb and cwb[j] - shift <= 0.0:
        j += 1
    lo = 0.0
    cwa_prev = 0.0
    while i < na and j < nb and lo < 1.0:
        ca = cwa[i]
        cb = cwb[j] - shift
        hi = ca if ca < cb else cb
        if hi > 1.0:
            hi = 1.0
        if hi > lo:
            cb_prev = (cwb[j - 1] - shift) if j > 0 else first_lower - shift
            wa = ca - cwa_prev
            wb = cb - cb_prev
            fa = (lo - cwa_prev) / wa if wa > 0 else 0.0
            ga = (hi - cwa_prev) / wa if wa > 0 else 0.0
            fb = (lo - cb_prev) / wb if wb > 0 else 0.0
            gb = (hi - cb_prev) / wb if wb > 0 else 0.0
            x_l = xa_lo[i] + fa * (xa_hi[i] - xa_lo[i])
            x_r = xa_lo[i] + ga * (xa_hi[i] - xa_lo[i])
            y_l = xb_lo[j] + fb * (xb_hi[j] - xb_lo[j])
            y_r = xb_lo[j] + gb * (xb_hi[j] - xb_lo[j])
            dl = x_l - y_l
            dr = x_r - y_r
            m = hi - lo
            cost += m * (dl * dl + dl * dr + dr * dr) / 3.0
            lo = hi
        if ca <= hi:
            cwa_prev = ca
            i += 1
        if cb <= hi:
            j += 1
    return cost


def _shift_cost_blocks_np(xa_lo, xa_hi, cwa, xb_lo, xb_hi, cwb, shift, first_lower):
    cb = cwb - shift
    edges = np.union1d(cwa, cb)
    edges = edges[(edges > 0.0) & (edges <= 1.0)]
    if len(edges) == 0 or edges[-1] < 1.0:
        edges = np.append(edges, 1.0)
    lo = np.concatenate(([0.0], edges[:-1]))
    hi = edges
    mass = hi - lo
    mid = 0.5 * (lo + hi)
    ia = np.minimum(np.searchsorted(cwa, mid, side="left"), len(cwa) - 1)
    ib = np.minimum(np.searchsorted(cb, mid, side="left"), len(cb) - 1)
    cwa_prev = np.concatenate(([0.0], cwa[:-1]))
    cb_prev = np.concatenate(([first_lower - shift], cb[:-1]))
    wa = np.maximum(cwa - cwa_prev, 1e-300)
    wb = np.maximum(cb - cb_prev, 1e-300)
    fa = (lo - cwa_prev[ia]) / wa[ia]
    ga = (hi - cwa_prev[ia]) / wa[ia]
    fb = (lo - cb_prev[ib]) / wb[ib]
    gb = (hi - cb_prev[ib]) / wb[ib]
    x_l = xa_lo[ia] + fa * (xa_hi[ia] - xa_lo[ia])
    x_r = xa_lo[ia] + ga * (xa_hi[ia] - xa_lo[ia])
    y_l = xb_lo[ib] + fb * (xb_hi[ib] - xb_lo[ib])
    y_r = xb_lo[ib] + gb * (xb_hi[ib] - xb_lo[ib])
    dl = x_l - y_l
    dr = x_r - y_r
    return float(np.sum(mass * (dl * dl + dl * dr + dr * dr) / 3.0))


def _scan_shift_costs_loop(xa_lo, xa_hi, cwa, xb_lo, xb_hi, cwb, shifts, first_lower):
    out = np.empty(len(shifts))
    for k in range(len(shifts)):
        out[k] = _shift_cost_blocks_loop(xa_lo, xa_hi, cwa, xb_lo, xb_hi, cwb, shifts[k], first_lower)
    return out


def _scan_shift_costs_np(xa_lo, xa_hi, cwa, xb_lo, xb_hi, cwb, shifts, first_lower):
    return np.array(
        [_shift_cost_blocks_np(xa_lo, xa_hi, cwa, xb_lo, xb_hi, cwb, s, first_lower)
         for s in shifts]
    )


if NUMBA_ENABLED:
    merge_quantiles = njit(cache=True)(_merge_quantiles_loop)
    hopf_lax_1d = njit(cache=True)(_hopf_lax_1d_loop)
    shift_cost_blocks = njit(cache=True)(_shift_cost_blocks_loop)

    @njit(cache=True)
    def scan_shift_costs(xa_lo, xa_hi, cwa, xb_lo, xb_hi, cwb, shifts, first_lower):
        out = np.empty(len(shifts))
        for k in range(len(shifts)):
            out[k] = shift_cost_blocks(xa_lo, xa_hi, cwa, xb_lo, xb_hi, cwb, shifts[k],
                                       first_lower)
        return out

else:
    merge_quantiles = _merge_quantiles_np
    hopf_lax_1d = _hopf_lax_1d_np
    shift_cost_blocks = _shift_cost_blocks_np
    scan_shift_costs = _scan_shift_costs_np

# both paths kept importable so the benchmark and tests can compare them
numpy_impls = {
    "merge_quantiles": _merge_quantiles_np,
    "hopf_lax_1d": _hopf_lax_1d_np,
    "shift_cost_blocks": _shift_cost_blocks_np,
    "scan_shift_costs": _scan_shift_costs_np,
}
loop_impls = {
    "merge_quantiles": _merge_quantiles_loop,
    "hopf_lax_1d": _hopf_lax_1d_loop,
    "shift_cost_blocks": _shift_cost_blocks_loop,
    "scan_shift_costs": _scan_shift_costs_loop,
}
