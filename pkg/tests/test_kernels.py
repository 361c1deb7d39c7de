"""Both kernel paths (numba loop and pure numpy) must agree exactly."""
import numpy as np
import pytest

from curvedim import _kernels


@pytest.fixture
def rng():
    return np.random.default_rng(123)


def random_blocks(rng, n):
    edges = np.sort(rng.uniform(0, 10, n + 1))
    w = rng.uniform(0.1, 1.0, n)
    cw = np.cumsum(w / w.sum())
    cw[-1] = 1.0
    return edges[:-1], edges[1:], cw


def test_merge_quantiles_paths_agree(rng):
    for _ in range(20):
        wa = rng.uniform(0.1, 1.0, rng.integers(2, 15))
        wb = rng.uniform(0.1, 1.0, rng.integers(2, 15))
        cwa = np.cumsum(wa / wa.sum()); cwa[-1] = 1.0
        cwb = np.cumsum(wb / wb.sum()); cwb[-1] = 1.0
        a = _kernels.numpy_impls["merge_quantiles"](cwa, cwb)
        b = _kernels.loop_impls["merge_quantiles"](cwa, cwb)
        for x, y in zip(a, b):
            assert np.allclose(x, y)


def test_hopf_lax_paths_agree(rng):
    pts = np.sort(rng.uniform(0, 7, 200))
    phi = rng.normal(size=200)
    for period in (0.0, 7.0):
        a = _kernels.numpy_impls["hopf_lax_1d"](pts, phi, 0.37, period)
        b = _kernels.loop_impls["hopf_lax_1d"](pts, phi, 0.37, period)
        assert np.allclose(a, b, atol=1e-14)


def test_shift_cost_paths_agree(rng):
    for _ in range(10):
        alo, ahi, cwa = random_blocks(rng, 12)
        blo, bhi, cwb = random_blocks(rng, 9)
        L = 12.0
        blo_e = np.concatenate([blo - L, blo, blo + L])
        bhi_e = np.concatenate([bhi - L, bhi, bhi + L])
        cwb_e = np.concatenate([cwb - 1, cwb, cwb + 1])
        for s in (-0.9, -0.3, 0.0, 0.4, 0.97):
            a = _kernels.numpy_impls["shift_cost_blocks"](alo, ahi, cwa, blo_e, bhi_e, cwb_e, s, -1.0)
            b = _kernels.loop_impls["shift_cost_blocks"](alo, ahi, cwa, blo_e, bhi_e, cwb_e, s, -1.0)
            assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


def test_scan_paths_agree(rng):
    alo, ahi, cwa = random_blocks(rng, 10)
    blo, bhi, cwb = random_blocks(rng, 11)
    L = 12.0
    blo_e = np.concatenate([blo - L, blo, blo + L])
    bhi_e = np.concatenate([bhi - L, bhi, bhi + L])
    cwb_e = np.concatenate([cwb - 1, cwb, cwb + 1])
    shifts = np.linspace(-1, 1, 64)
    a = _kernels.numpy_impls["scan_shift_costs"](alo, ahi, cwa, blo_e, bhi_e, cwb_e, shifts, -1.0)
    b = _kernels.loop_impls["scan_shift_costs"](alo, ahi, cwa, blo_e, bhi_e, cwb_e, shifts, -1.0)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)


def test_active_path_matches_reference(rng):
    # whichever path the env flag selected must agree with the numpy reference
    pts = np.sort(rng.uniform(0, 5, 100))
    phi = rng.normal(size=100)
    a = _kernels.hopf_lax_1d(pts, phi, 0.2, 0.0)
    b = _kernels.numpy_impls["hopf_lax_1d"](pts, phi, 0.2, 0.0)
    assert np.allclose(a, b, atol=1e-14)
