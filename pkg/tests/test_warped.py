import math

import numpy as np
import pytest

from curvedim.errors import ConditionViolated, DegenerateWarp
from curvedim.fields import bakry_emery_at, zero_field
from curvedim.geometry import (
    circle,
    diameter,
    distance,
    geodesic_shoot,
    interval,
    ricci_at,
    sphere2,
)
from curvedim.warped import (
    WarpedSpec,
    build_warped,
    field_kappa,
    rotation_field,
    sphere_example,
    warped_ricci_check,
)


def sin_warp_circle(N=1.0):
    return WarpedSpec(interval(0, math.pi), circle(2 * math.pi),
                      f=math.sin, fp=math.cos, fpp=lambda r: -math.sin(r),
                      N=N, fiber_field=zero_field(1))


def test_constant_warp_cylinder():
    spec = WarpedSpec(interval(0, math.pi), circle(2 * math.pi),
                      f=lambda r: 1.0, fp=lambda r: 0.0, fpp=lambda r: 0.0,
                      N=1.0, fiber_field=zero_field(1))
    space, lifted = build_warped(spec)
    x = np.array([1.0, 2.0])
    assert np.allclose(space.metric(x), np.eye(2))
    assert ricci_at(space, x, np.array([0.3, 0.4])) == pytest.approx(0.0, abs=1e-12)
    assert space.weight_at(x) == pytest.approx(1.0)


def test_sin_warp_reproduces_round_sphere():
    space, _ = build_warped(sin_warp_circle())
    sp = sphere2(1.0)
    rng = np.random.default_rng(3)
    for _ in range(5):
        x = np.array([rng.uniform(0.3, math.pi - 0.3), rng.uniform(0, 2 * math.pi)])
        w = rng.normal(size=2)
        g = space.metric(x)
        nsq = float(w @ g @ w)
        assert ricci_at(space, x, w) / nsq == pytest.approx(1.0, rel=1e-12)
        y = np.array([rng.uniform(0.3, math.pi - 0.3), rng.uniform(0, 2 * math.pi)])
        assert distance(space, x, y) == pytest.approx(distance(sp, x, y), rel=1e-12)
    assert diameter(space) == pytest.approx(math.pi)


def test_fiber_distance_scaling():
    # pure-fiber curves at base point r have length scaled by f(r)
    spec = sin_warp_circle()
    space, _ = build_warped(spec)
    r = 1.1
    geo = geodesic_shoot(space, np.array([r, 0.0]), np.array([0.0, 0.4]), 64)
    fiber_len = 0.4  # |v|_F * 1
    assert geo.speed == pytest.approx(math.sin(r) * fiber_len, rel=1e-9)


def test_block_orthogonality():
    space, _ = build_warped(sin_warp_circle())
    g = space.metric(np.array([0.9, 1.7]))
    assert g[0, 1] == 0.0 and g[1, 0] == 0.0


def test_degenerate_warp_raises():
    spec = WarpedSpec(interval(0, math.pi), circle(2 * math.pi),
                      f=lambda r: math.sin(r) - 0.5,
                      fp=math.cos, fpp=lambda r: -math.sin(r),
                      N=1.0, fiber_field=zero_field(1))
    with pytest.raises(DegenerateWarp):
        build_warped(spec)


def test_lifted_field_scaling():
    spec = WarpedSpec(interval(0, math.pi), sphere2(1.0),
                      f=lambda r: 0.5 * math.sin(r),
                      fp=lambda r: 0.5 * math.cos(r),
                      fpp=lambda r: -0.5 * math.sin(r),
                      N=4.0, fiber_field=rotation_field(0.3))
    _, lifted = build_warped(spec)
    pt = np.array([1.2, 0.8, 0.5])
    z = lifted(pt)
    f = 0.5 * math.sin(1.2)
    assert z[0] == 0.0
    assert z[2] == pytest.approx(0.3 / f ** 2, rel=1e-12)


def test_warped_formula_vs_direct_constant_warp():
    # f == c: the drift tensor reduces to the fiber tensor with f^-2 scaling
    c = 0.7
    N = 5.0
    spec = WarpedSpec(interval(0, 1), sphere2(1.0),
                      f=lambda r: c, fp=lambda r: 0.0, fpp=lambda r: 0.0,
                      N=N, fiber_field=rotation_field(0.4))
    space, _ = build_warped(spec)
    rng = np.random.default_rng(1)
    for _ in range(5):
        x = np.array([0.5, rng.uniform(0.4, math.pi - 0.4), rng.uniform(0, 2 * math.pi)])
        vf = rng.normal(size=2)
        w = np.concatenate([[0.0], vf])
        g = space.metric(x)
        w = w / math.sqrt(float(w @ g @ w))
        val = space.bakry_emery_fn(x, w, N + 1.0)
        u = vf / math.sqrt(float(vf @ sphere2(1.0).metric(x[1:]) @ vf))
        fiber_val = bakry_emery_at(sphere2(1.0), rotation_field(0.4), N, x[1:], u)
        assert val == pytest.approx(fiber_val / c ** 2, rel=1e-9)


def test_warped_ricci_check_equality_conditions():
    N = 5.0
    K_F = 1.0 / (2.0 * (N - 2.0))
    a = math.sqrt(K_F)
    spec = WarpedSpec(interval(0, math.pi), sphere2(1.0),
                      f=lambda r: a * math.sin(r),
                      fp=lambda r: a * math.cos(r),
                      fpp=lambda r: -a * math.sin(r),
                      N=N, fiber_field=rotation_field(0.5))
    v = warped_ricci_check(spec, 1.0, K_F, sample_n=200, seed=0)
    assert v.passed
    # (ii) and (iii) hold with equality for the sin warp
    res = [float(n.split()[-1]) for n in v.notes[:2]]
    assert all(abs(x) < 1e-10 for x in res)


def test_warped_ricci_check_condition_violated():
    spec = WarpedSpec(interval(0, math.pi), sphere2(1.0),
                      f=lambda r: math.sin(r), fp=math.cos,
                      fpp=lambda r: -math.sin(r),
                      N=4.0, fiber_field=zero_field(2))
    with pytest.raises(ConditionViolated):
        warped_ricci_check(spec, 2.0, 0.25, sample_n=10)  # f'' + 2f > 0


def test_kappa_rotation_field():
    assert field_kappa(sphere2(1.0), rotation_field(1.0)) == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("N,alpha", [(3.0, 0.0), (5.0, 0.5), (10.0, 0.5)])
def test_sphere_example_certifies(N, alpha):
    b = sphere_example(N, alpha, sample_n=200, seed=0)
    assert b.ricci_verdict.margin >= -1e-6
    assert b.bonnet_verdict.passed
    assert b.bonnet_verdict.extras["diameter"] == pytest.approx(math.pi, abs=1e-12)
    assert b.fiber_inf >= 0.5 - 1e-9


def test_sphere_example_alpha_constraint():
    with pytest.raises(ValueError):
        sphere_example(5.0, 0.8)  # alpha * kappa > 1/2
