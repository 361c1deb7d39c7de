import math

import numpy as np
import pytest

from curvedim.distortion import (
    INF,
    CurvatureDimension,
    ExtendedReal,
    blowup_threshold,
    sigma,
    sigma_values,
    sin_kn,
    tau,
    tau_values,
)


def test_sin_kn_closed_forms():
    assert sin_kn(0, 1, 0.7) == 0.7
    assert sin_kn(1, 1, math.pi / 2) == pytest.approx(1.0, abs=1e-15)
    assert sin_kn(-1, 1, 1.0) == pytest.approx(math.sinh(1.0), rel=1e-15)


def test_sin_kn_series_matches_closed_form():
    # just above and below the series cut the two branches must agree
    for K in (1e-5, -1e-5, 3e-4, -2e-4):
        for x in (0.01, 0.1, 0.5):
            a = K / 3.0
            exact = math.sin(math.sqrt(a) * x) / math.sqrt(a) if a > 0 else \
                math.sinh(math.sqrt(-a) * x) / math.sqrt(-a)
            assert sin_kn(K, 3.0, x) == pytest.approx(exact, rel=1e-12)


def test_sigma_flat_is_t():
    cd = CurvatureDimension(0.0, 5.0)
    for t in np.linspace(0, 1, 11):
        s = sigma(t, 1.3, cd)
        assert s.finite and float(s) == t


def test_sigma_positive_curvature_value():
    s = sigma(0.5, math.pi / 2, CurvatureDimension(1.0, 1.0))
    assert float(s) == pytest.approx(math.sin(math.pi / 4) / math.sin(math.pi / 2), rel=1e-14)


def test_sigma_blowup_branch():
    assert sigma(0.5, math.pi, CurvatureDimension(1.0, 1.0)).infinite
    assert sigma(0.5, math.pi + 1e-12, CurvatureDimension(1.0, 1.0)).infinite
    just_below = sigma(0.5, math.pi - 1e-9, CurvatureDimension(1.0, 1.0))
    assert just_below.finite and float(just_below) > 1e6


def test_tau_values():
    assert float(tau(0.4, 2.0, CurvatureDimension(0.0, 3.0))) == pytest.approx(0.4, abs=1e-14)
    assert tau(0.5, 1.0, CurvatureDimension(1.0, 1.0)).infinite
    want = math.sqrt(0.5) * math.sqrt(math.sin(math.pi / 4) / math.sin(math.pi / 2))
    assert float(tau(0.5, math.pi / 2, CurvatureDimension(1.0, 2.0))) == pytest.approx(want, rel=1e-14)


def test_endpoint_normalization():
    for K, N, th in [(1.0, 3.0, 1.0), (-2.0, 2.0, 2.5), (0.5, 10.0, 3.0)]:
        cd = CurvatureDimension(K, N)
        assert float(sigma(0.0, th, cd)) == 0.0
        assert float(sigma(1.0, th, cd)) == pytest.approx(1.0, rel=1e-14)
        assert float(tau(0.0, th, cd)) == 0.0
        assert float(tau(1.0, th, cd)) == pytest.approx(1.0, rel=1e-14)


def test_sigma_monotone_in_K():
    ks = np.linspace(-3.0, 3.0, 25)
    for t in (0.25, 0.5, 0.75):
        vals = [float(sigma(t, 1.2, CurvatureDimension(K, 4.0))) for K in ks]
        assert all(b >= a - 1e-13 for a, b in zip(vals, vals[1:]))


def test_sigma_le_tau_sampled():
    rng = np.random.default_rng(7)
    for _ in range(2000):
        K = rng.uniform(0.01, 5.0)
        N = rng.uniform(1.01, 20.0)
        t = rng.uniform(0.01, 0.99)
        th = rng.uniform(0.01, 3.0)
        s = sigma(t, th, CurvatureDimension(K, N))
        ta = tau(t, th, CurvatureDimension(K, N))
        assert s <= ta or (s.infinite and ta.infinite)


def test_blowup_threshold_detection_by_bisection():
    K, N = 2.3, 7.0
    lo, hi = 0.1, 20.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if sigma(0.5, mid, CurvatureDimension(K, N)).finite:
            lo = mid
        else:
            hi = mid
    assert abs(0.5 * (lo + hi) - blowup_threshold(K, N)) < 1e-9


def test_extended_real_arithmetic():
    assert (INF + 1.0).infinite
    assert (0.0 * INF).infinite
    assert (ExtendedReal(2.0) * 3.0).value == 6.0
    assert ExtendedReal(1.0) < INF
    assert not (INF < ExtendedReal(1.0))
    assert INF <= INF


def test_vectorized_values_match_scalar():
    ts = np.linspace(0, 1, 9)
    sv = sigma_values(ts, 1.1, 2.0, 5.0)
    tv = tau_values(ts, 1.1, 2.0, 5.0)
    for i, t in enumerate(ts):
        assert float(sv[i]) == pytest.approx(float(sigma(t, 1.1, CurvatureDimension(2.0, 5.0))), rel=1e-14)
        assert float(tv[i]) == pytest.approx(float(tau(t, 1.1, CurvatureDimension(2.0, 5.0))), rel=1e-14)
