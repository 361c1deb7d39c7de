import math

import numpy as np
import pytest
import scipy.linalg as sla

from curvedim.fields import FieldSpec, zero_field
from curvedim.geometry import circle, interval
from curvedim.presets import bump_density
from curvedim.semigroup import (
    build_generator,
    contraction_check,
    density_state,
    evi_check,
    evolve,
    gradient_estimate_check,
    kuwada_speed_check,
)


def ou_field(c=1.0):
    return FieldSpec(lambda p: -c * p, lambda p: -c * np.eye(1), f"ou{c:g}")


def const_field(c):
    return FieldSpec(lambda p: np.full_like(p, c), lambda p: np.zeros((1, 1)), "c")


@pytest.fixture(scope="module")
def ou_gen():
    return build_generator(interval(-4, 4), ou_field(), 256)


def test_generator_invariants(ou_gen):
    L = ou_gen.L
    assert np.max(np.abs(L.sum(axis=1))) < 1e-11
    off = L - np.diag(np.diag(L))
    assert off.min() >= 0.0
    assert np.max(np.abs(ou_gen.Lstar - L.T)) == 0.0


def test_symmetric_case_circle_zero_field():
    gen = build_generator(circle(2 * math.pi), zero_field(1), 64)
    assert np.max(np.abs(gen.L - gen.L.T)) < 1e-12  # symmetric circulant


def test_uniform_invariant_constant_drift():
    gen = build_generator(circle(2 * math.pi), const_field(0.8), 64)
    u = density_state(gen, lambda p: np.ones_like(p[..., 0]))
    out = evolve(gen, u, 1.5, dual=True)
    assert np.max(np.abs(out.values - u.values)) < 1e-12


def test_stationary_gaussian(ou_gen):
    st = density_state(ou_gen, lambda p: np.ones_like(p[..., 0]))
    out = evolve(ou_gen, st, 30.0, dual=True)
    x = ou_gen.points[:, 0]
    target = np.exp(-x ** 2 / 2)
    target /= np.sum(target * ou_gen.ref.weights)
    assert np.max(np.abs(out.values - target)) < 1e-4


def test_evolve_identity_and_semigroup_law(ou_gen):
    st = density_state(ou_gen, bump_density(0.5, 0.7, ou_gen.space))
    same = evolve(ou_gen, st, 0.0, dual=True)
    assert np.array_equal(same.values, st.values)
    one = evolve(ou_gen, st, 0.3, dual=True)
    two = evolve(ou_gen, evolve(ou_gen, st, 0.1, dual=True), 0.2, dual=True)
    assert np.max(np.abs(one.values - two.values)) < 1e-9


def test_mass_and_positivity(ou_gen):
    st = density_state(ou_gen, bump_density(-1.0, 0.5, ou_gen.space))
    for t in (0.05, 0.2, 1.0):
        out = evolve(ou_gen, st, t, dual=True)
        assert np.sum(out.values * ou_gen.ref.weights) == pytest.approx(1.0, abs=1e-10)
        assert out.values.min() >= 0.0


def test_duality_pairing(ou_gen):
    rng = np.random.default_rng(5)
    u = rng.normal(size=ou_gen.m)
    v = np.abs(rng.normal(size=ou_gen.m))
    t = 0.37
    Pt = sla.expm(t * ou_gen.L)
    Pts = sla.expm(t * ou_gen.Lstar)
    lhs = np.sum((Pt @ u) * v * ou_gen.ref.weights)
    rhs = np.sum(u * (Pts @ v) * ou_gen.ref.weights)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_crank_nicolson_path_matches_expm():
    gen = build_generator(interval(-4, 4), ou_field(), 600)  # above dense cap
    st = density_state(gen, bump_density(0.0, 0.8, gen.space))
    out = evolve(gen, st, 0.05, dual=True)
    dense = sla.expm(0.05 * gen.Lstar) @ st.values
    assert np.max(np.abs(out.values - dense)) < 1e-4 * np.max(dense)


def test_drift_translates_center_of_mass():
    gen = build_generator(circle(2 * math.pi), const_field(0.8), 128)
    st = density_state(gen, bump_density(1.0, 0.5, gen.space))
    out = evolve(gen, st, 0.5, dual=True)
    ang0 = np.angle(np.sum(st.values * gen.ref.weights * np.exp(1j * gen.points[:, 0])))
    ang1 = np.angle(np.sum(out.values * gen.ref.weights * np.exp(1j * gen.points[:, 0])))
    assert (ang1 - ang0) % (2 * math.pi) == pytest.approx(0.4, abs=2e-3)


def test_contraction_ou(ou_gen):
    a = density_state(ou_gen, bump_density(-1.5, 0.5, ou_gen.space))
    b = density_state(ou_gen, bump_density(1.0, 0.5, ou_gen.space))
    v = contraction_check(ou_gen, a, b, 1.0, [0.1, 0.2, 0.5, 1.0])
    assert v.passed
    bad = contraction_check(ou_gen, a, b, 1.3, [0.5, 1.0])
    assert not bad.passed


def test_contraction_circle_nonincreasing():
    gen = build_generator(circle(2 * math.pi), const_field(0.5), 128)
    a = density_state(gen, bump_density(1.0, 0.5, gen.space))
    b = density_state(gen, bump_density(2.5, 0.5, gen.space))
    v = contraction_check(gen, a, b, 0.0, [0.2, 0.5, 1.0])
    assert v.passed


def test_contraction_identity_pair(ou_gen):
    a = density_state(ou_gen, bump_density(0.3, 0.6, ou_gen.space))
    v = contraction_check(ou_gen, a, a, 1.0, [0.2])
    assert v.extras["w0_sq"] == pytest.approx(0.0, abs=1e-12)
    assert v.passed


def test_evi_ou(ou_gen):
    a = density_state(ou_gen, bump_density(-1.5, 0.5, ou_gen.space))
    b = density_state(ou_gen, bump_density(1.0, 0.5, ou_gen.space))
    v = evi_check(ou_gen, a, b, 1.0, [0.1, 0.2, 0.5, 1.0])
    assert v.passed
    assert "-phi_1" in v.notes[0]
    bad = evi_check(ou_gen, a, b, 2.4, [0.1, 0.2, 0.5, 1.0])
    assert not bad.passed


def test_evi_flat_circle_classical():
    gen = build_generator(circle(2 * math.pi), zero_field(1), 128)
    a = density_state(gen, bump_density(1.0, 0.6, gen.space))
    b = density_state(gen, bump_density(3.0, 0.6, gen.space))
    v = evi_check(gen, a, b, 0.0, [0.1, 0.3, 0.6])
    assert v.passed
    # with Z = 0 both sign readings coincide
    assert v.extras["margin_minus"] == pytest.approx(v.extras["margin_plus"], abs=1e-12)


def test_kuwada_stationary_uniform():
    gen = build_generator(circle(2 * math.pi), zero_field(1), 64)
    u = density_state(gen, lambda p: np.ones_like(p[..., 0]))
    v = kuwada_speed_check(gen, u, [0.1, 0.5])
    assert v.passed
    assert v.witnesses[0][2] == pytest.approx(0.0, abs=1e-8)  # zero speed


def test_kuwada_uniform_constant_drift_slack():
    gen = build_generator(circle(2 * math.pi), const_field(0.7), 64)
    u = density_state(gen, lambda p: np.ones_like(p[..., 0]))
    v = kuwada_speed_check(gen, u, [0.2])
    assert v.passed
    # rhs = c^2 while the speed vanishes: slack about c^2
    t, _, sp2, rhs = v.witnesses[0]
    assert sp2 < 1e-6
    assert rhs == pytest.approx(0.49, abs=1e-6)


def test_kuwada_ou_bump(ou_gen):
    st = density_state(ou_gen, bump_density(1.0, 0.6, ou_gen.space))
    v = kuwada_speed_check(ou_gen, st, [0.1, 0.3])
    assert v.passed


def test_gradient_estimate(ou_gen):
    x = ou_gen.points[:, 0]
    v = gradient_estimate_check(ou_gen, np.sin(x) + 0.3 * x, 1.0, [0.1, 0.3, 0.6])
    assert v.passed


def test_gradient_estimate_constant_function(ou_gen):
    v = gradient_estimate_check(ou_gen, np.ones(ou_gen.m), 1.0, [0.2])
    assert v.passed
    assert abs(v.margin) < 1e-12


def test_gradient_estimate_heat_flow_fourier():
    gen = build_generator(circle(2 * math.pi), zero_field(1), 128)
    th = gen.points[:, 0]
    v = gradient_estimate_check(gen, np.sin(th), 0.0, [0.2, 0.5])
    assert v.passed
