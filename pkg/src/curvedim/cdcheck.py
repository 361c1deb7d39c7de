"""Curvature-dimension condition checks on concrete transport instances.

Every check evaluates one inequality chain along a displacement
interpolation and reports the minimum signed slack ("margin") over all
tested (time, geodesic) pairs; margin >= -tol is a pass.

Coefficient-index reading: putting the (1-t)-superscript on both
endpoint terms breaks t=0/t=1 endpoint consistency, so all checks here
use coeff^{(1-t)} on the rho_0 term and coeff^{(t)} on the rho_1 term,
and every verdict records that reading in its notes.  Likewise the K-convexity penalty is read with a single K
factor, -K/2 * t(1-t) * W2^2, and the entropic inequality is oriented
U_N(mu_t) e^{phi_t/N} >= sigma-combination (the direction the pointwise
inequality produces under Jensen; the 1-D flat oracle confirms it).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .distortion import sigma_matrix, sigma_values, tau_matrix
from .entropy import DiscreteMeasure, ent
from .errors import ConjugatePoint
from .fields import FieldSpec, line_integral_profile, lower_bound_scan
from .geometry import GeodesicPath, ModelSpace, geodesic_shoot, jacobi_evolve
from .transport import DensityPath, DynamicalPlan, TransportPlan, displacement_path, ot_1d

__all__ = [
    "CdVerdict",
    "Instance1D",
    "make_instance_1d",
    "check_cd_finite",
    "check_cd_inf",
    "check_cd_entropic",
    "check_pointwise",
    "check_jacobi_ode",
    "counterexample_scan",
    "COEFF_READING_NOTE",
]

COEFF_READING_NOTE = (
    "coefficient reading: coeff^(1-t) on the rho_0 term, coeff^(t) on the "
    "rho_1 term; single-K convexity penalty"
)

TOL_EXACT = 1e-6   # relative pass tolerance for exact 1-D instances
TOL_BINNED = 1e-3  # for binned manifold demos


def _base_tol(inst: "Instance1D") -> float:
    binned = getattr(inst.dplan, "geodesic_list", None) is not None
    return TOL_BINNED if binned else TOL_EXACT


@dataclass
class CdVerdict:
    """Outcome of one inequality check.

    margin is the minimum signed slack over all tested (t, geodesic)
    pairs; the check passes when margin >= -tol.  witnesses lists the
    worst offenders as (t, geodesic index, lhs, rhs).
    """

    condition: str
    K: float
    N: float
    margin: float
    tol: float
    witnesses: list = dc_field(default_factory=list)
    notes: list = dc_field(default_factory=list)
    extras: dict = dc_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.margin >= -self.tol

    def summary(self) -> str:
        state = "pass" if self.passed else "FAIL"
        return (f"{self.condition}(K={self.K:g}, N={self.N:g}): {state} "
                f"margin={self.margin:.3e} tol={self.tol:.1e}")


@dataclass
class Instance1D:
    """A 1-D verification instance: measures, optimal plan, interpolation."""

    space: ModelSpace
    field: FieldSpec
    ref: DiscreteMeasure
    mu0: DiscreteMeasure
    mu1: DiscreteMeasure
    plan: TransportPlan
    dplan: DynamicalPlan
    path: DensityPath

    @property
    def t_grid(self) -> np.ndarray:
        return self.dplan.t_grid

    @property
    def w2_sq(self) -> float:
        return self.dplan.energy


def make_instance_1d(space: ModelSpace, field: FieldSpec, ref: DiscreteMeasure,
                     mu0: DiscreteMeasure, mu1: DiscreteMeasure,
                     n_t: int = 17) -> Instance1D:
    plan = ot_1d(mu0, mu1, space)
    dplan, path = displacement_path(plan, space, n_t)
    return Instance1D(space, field, ref, mu0, mu1, plan, dplan, path)


def _simpson_exp(lo: np.ndarray, mid: np.ndarray, hi: np.ndarray, scale: float) -> np.ndarray:
    """Mass-quantile Simpson of exp(phi * scale) across each segment."""
    return (np.exp(lo * scale) + 4.0 * np.exp(mid * scale) + np.exp(hi * scale)) / 6.0


def _second_difference_tolerance(vals: np.ndarray, dt: float, tol_scale: float) -> float:
    """C * dt^2 with C estimated from the data's fourth difference."""
    if len(vals) < 5:
        return 1e-9
    fourth = np.max(np.abs(np.diff(vals, 4))) / dt ** 4
    return tol_scale * (dt ** 2 * fourth / 6.0 + 1e-9)


def check_cd_inf(inst: Instance1D, K: float, tol_scale: float = 1.0) -> CdVerdict:
    """K-convexity of g(t) = Ent(mu_t) - phi_t(Pi) along the instance.

    Checks the global chord inequality at every grid time and the local
    three-point convexity with a dt^2-scaled tolerance.
    """
    ts = inst.t_grid
    ents = np.array([ent(sl) for sl in inst.path.slices])
    prof = inst.dplan.phi_profiles(inst.field)
    phis = prof.plan_mean(inst.dplan.masses)
    phi_at = np.interp(ts, prof.s_ts, phis)
    g = ents - phi_at
    w2sq = inst.w2_sq
    chord = (1 - ts) * g[0] + ts * g[-1] - 0.5 * K * ts * (1 - ts) * w2sq
    slack = chord - g
    # endpoints hold with equality by construction; the margin is interior
    i = 1 + int(np.argmin(slack[1:-1]))
    margin = float(slack[i])
    scale = 1.0 + float(np.max(np.abs(g)))
    tol = tol_scale * _base_tol(inst) * scale
    dt = ts[1] - ts[0]
    d2 = (g[:-2] - 2 * g[1:-1] + g[2:]) / dt ** 2
    tol3 = _second_difference_tolerance(g, dt, tol_scale) / dt ** 2 + tol / dt ** 2
    margin3 = float(np.min(d2 - K * w2sq)) if len(d2) else 0.0
    v = CdVerdict("CDinf", K, math.inf, margin, tol,
                  witnesses=[(float(ts[i]), -1, float(g[i]), float(chord[i]))],
                  notes=[COEFF_READING_NOTE])
    v.extras["three_point_margin"] = margin3
    v.extras["three_point_tol"] = tol3
    v.extras["entropies"] = ents
    v.extras["phi_means"] = phi_at
    if margin3 < -tol3:
        v.margin = min(v.margin, -abs(margin3) * dt ** 2)
        v.witnesses.append(("three-point", int(np.argmin(d2 - K * w2sq)) + 1,
                            float(np.min(d2)), K * w2sq))
    return v


def _endpoint_coeffs(ts: np.ndarray, thetas: np.ndarray, K: float, N: float,
                     reduced: bool):
    """coeff^{(1-t)} and coeff^{(t)} matrices over (geodesic, time)."""
    mat = sigma_matrix if reduced else tau_matrix
    c0 = mat(1.0 - ts, thetas, K, N)
    c1 = mat(ts, thetas, K, N)
    return c0, c1


def check_cd_finite(inst: Instance1D, K: float, N: float, reduced: bool = False,
                    tol_scale: float = 1.0) -> CdVerdict:
    """Finite-dimensional condition: drift-weighted Renyi entropy of the
    plan against the distortion-weighted endpoint combination.

    reduced=False uses the tau coefficients, reduced=True the sigma
    coefficients.  N = inf delegates to the K-convexity check.
    """
    if math.isinf(N):
        return check_cd_inf(inst, K, tol_scale)
    ts = inst.t_grid
    m = inst.dplan.masses
    rho = inst.dplan.rho
    prof = inst.dplan.phi_profiles(inst.field)
    idx = np.searchsorted(prof.s_ts, ts - 1e-12)
    lo, mid, hi = prof.lo[:, idx], prof.mid[:, idx], prof.hi[:, idx]
    lhs = -np.einsum("k,kt->t", m, rho ** (-1.0 / N) * _simpson_exp(lo, mid, hi, 1.0 / N))
    c0, c1 = _endpoint_coeffs(ts, inst.dplan.speeds, K, N, reduced)
    name = "CDstar" if reduced else "CD"
    bad = ~np.isfinite(c0[:, 1:-1]) | ~np.isfinite(c1[:, 1:-1])
    if np.any(bad):
        kbad = int(np.argmax(np.any(bad, axis=1)))
        v = CdVerdict(name, K, N, -math.inf, tol_scale * TOL_EXACT,
                      witnesses=[("infinite coefficient", kbad,
                                  float(inst.dplan.speeds[kbad]), math.inf)],
                      notes=[COEFF_READING_NOTE, "InfinityMismatch: finite lhs"])
        return v
    e1 = _simpson_exp(prof.lo[:, -1], prof.mid[:, -1], prof.hi[:, -1], 1.0 / N)[:, None]
    rhs = -np.einsum("k,kt->t",
                     m, c0 * rho[:, :1] ** (-1.0 / N) + c1 * e1 * rho[:, -1:] ** (-1.0 / N))
    slack = rhs - lhs
    i = 1 + int(np.argmin(slack[1:-1]))
    scale = 1.0 + float(np.max(np.abs(lhs)))
    v = CdVerdict(name, K, N, float(slack[i]), tol_scale * _base_tol(inst) * scale,
                  witnesses=[(float(ts[i]), -1, float(lhs[i]), float(rhs[i]))],
                  notes=[COEFF_READING_NOTE])
    v.extras["lhs"] = lhs
    v.extras["rhs"] = rhs
    return v


def check_cd_entropic(inst: Instance1D, K: float, N: float,
                      tol_scale: float = 1.0) -> CdVerdict:
    """Entropic condition: U_N(mu_t) e^{phi_t(Pi)/N} >= sigma-combination."""
    ts = inst.t_grid
    ents = np.array([ent(sl) for sl in inst.path.slices])
    prof = inst.dplan.phi_profiles(inst.field)
    phis = np.interp(ts, prof.s_ts, prof.plan_mean(inst.dplan.masses))
    un = np.exp(-ents / N)
    lhs = un * np.exp(phis / N)
    w = math.sqrt(max(inst.w2_sq, 0.0))
    s0 = sigma_values(1.0 - ts, w, K, N)
    s1 = sigma_values(ts, w, K, N)
    if not (np.all(np.isfinite(s0[1:-1])) and np.all(np.isfinite(s1[1:-1]))):
        return CdVerdict("CDe", K, N, -math.inf, tol_scale * TOL_EXACT,
                         witnesses=[("infinite coefficient", -1, w, math.inf)],
                         notes=[COEFF_READING_NOTE, "InfinityMismatch: finite lhs"])
    rhs = s0 * lhs[0] + s1 * lhs[-1]
    slack = lhs - rhs
    i = 1 + int(np.argmin(slack[1:-1]))
    scale = 1.0 + float(np.max(np.abs(lhs)))
    v = CdVerdict("CDe", K, N, float(slack[i]), tol_scale * _base_tol(inst) * scale,
                  witnesses=[(float(ts[i]), -1, float(lhs[i]), float(rhs[i]))],
                  notes=[COEFF_READING_NOTE])
    v.extras["lhs"] = lhs
    v.extras["rhs"] = rhs
    return v


def check_pointwise(inst: Instance1D, K: float, N: float, use_tau: bool = False,
                    tol_scale: float = 1.0) -> CdVerdict:
    """Per-geodesic density inequality

        [rho_t(g_t) e^{-phi_t(g)}]^{-1/N}
            >= c^{(1-t)}(|g'|) rho_0(g_0)^{-1/N}
               + c^{(t)}(|g'|) [e^{-phi_1(g)} rho_1(g_1)]^{-1/N}

    checked at the center particle of every transport segment.
    """
    ts = inst.t_grid
    rho = inst.dplan.rho
    prof = inst.dplan.phi_profiles(inst.field)
    idx = np.searchsorted(prof.s_ts, ts - 1e-12)
    phi = prof.mid[:, idx]
    lhs = (rho * np.exp(-phi)) ** (-1.0 / N)
    c0, c1 = _endpoint_coeffs(ts, inst.dplan.speeds, K, N, not use_tau)
    name = "Pointwise-tau" if use_tau else "Pointwise"
    bad = ~np.isfinite(c0[:, 1:-1]) | ~np.isfinite(c1[:, 1:-1])
    if np.any(bad):
        kbad = int(np.argmax(np.any(bad, axis=1)))
        return CdVerdict(name, K, N, -math.inf, tol_scale * TOL_EXACT,
                         witnesses=[("infinite coefficient", kbad,
                                     float(inst.dplan.speeds[kbad]), math.inf)],
                         notes=[COEFF_READING_NOTE, "InfinityMismatch: finite lhs"])
    rhs = (c0 * rho[:, :1] ** (-1.0 / N)
           + c1 * (np.exp(-phi[:, -1:]) * rho[:, -1:]) ** (-1.0 / N))
    slack = lhs - rhs
    k, i = np.unravel_index(int(np.argmin(slack[:, 1:-1])), slack[:, 1:-1].shape)
    i = int(i) + 1
    scale = 1.0 + float(np.max(np.abs(lhs)))
    v = CdVerdict(name, K, N, float(slack[k, i]), tol_scale * _base_tol(inst) * scale,
                  witnesses=[(float(ts[i]), int(k), float(lhs[k, i]), float(rhs[k, i]))],
                  notes=[COEFF_READING_NOTE])
    return v


# ---------------------------------------------------------------------------
# Jacobi-route checks

def _jacobi_quantities(space, geo, field, initial, n_store=65):
    A0, A0p = initial
    jp = jacobi_evolve(space, geo, A0, A0p, n_steps=8 * (n_store - 1), n_store=n_store)
    prof = line_integral_profile(geo, field)
    phi = np.interp(jp.ts, geo.ts, prof)
    return jp, phi


def check_jacobi_ode(space: ModelSpace, geo: GeodesicPath, field: FieldSpec,
                     K: float, N: float, initial, tol_scale: float = 1.0) -> CdVerdict:
    """Differential-inequality route along a single geodesic.

    With I_t = det(A_t) e^{phi_t} this checks (a) sigma-concavity of
    I^{1/N}, (b) for dim >= 2 the motion-direction split: concavity of
    L_t = exp(int u_11) and the sigma_{K,N-1} inequality for the reduced
    Ibar^{1/(N-1)}, and (c) the tau-combination that (a)+(b) produce.
    For N = inf the K-convexity form -(y+phi)'' >= K|g'|^2 is checked.
    """
    jp, phi = _jacobi_quantities(space, geo, field, initial)
    ts = jp.ts
    dt = ts[1] - ts[0]
    theta = geo.speed
    h = jp.detlog + phi
    extras = {}
    if math.isinf(N):
        # margin lives on the g'' scale: -(y+phi)'' - K|g'|^2 >= 0
        d2 = (h[:-2] - 2 * h[1:-1] + h[2:]) / dt ** 2
        tol3 = _second_difference_tolerance(h, dt, tol_scale)
        margin = float(np.min(-d2 - K * theta ** 2))
        v = CdVerdict("JacobiODE", K, N, margin,
                      tol3 + tol_scale * TOL_EXACT * (1.0 + abs(K) * theta ** 2),
                      notes=[COEFF_READING_NOTE])
        v.extras["convexity_values"] = -d2
        return v
    In = np.exp(h / N)
    s0 = sigma_values(1.0 - ts, theta, K, N)
    s1 = sigma_values(ts, theta, K, N)
    if not np.all(np.isfinite(s0[1:-1])):
        return CdVerdict("JacobiODE", K, N, -math.inf, tol_scale * TOL_EXACT,
                         witnesses=[("infinite coefficient", -1, theta, math.inf)],
                         notes=[COEFF_READING_NOTE])
    slack_a = (In - (s0 * In[0] + s1 * In[-1]))[1:-1]
    margin = float(np.min(slack_a))
    extras["sigma_margin"] = margin
    iw = 1 + int(np.argmin(slack_a))
    witnesses = [(float(ts[iw]), -1, float(In[iw]), 0.0)]
    if space.dim >= 2 and N > 1:
        u11 = jp.U[:, 0, 0]
        from .fields import cumulative_simpson

        lam = cumulative_simpson(u11, dt)
        L = np.exp(lam)
        d2L = (L[:-2] - 2 * L[1:-1] + L[2:]) / dt ** 2
        tolL = _second_difference_tolerance(L, dt, tol_scale) / dt ** 2
        extras["L_concavity_margin"] = float(np.min(-d2L))
        if np.min(-d2L) < -tolL:
            margin = min(margin, float(np.min(-d2L)) * dt ** 2)
        ybar = jp.detlog - lam
        Ibar = np.exp((ybar + phi) / (N - 1.0))
        sb0 = sigma_values(1.0 - ts, theta, K, N - 1.0)
        sb1 = sigma_values(ts, theta, K, N - 1.0)
        if np.all(np.isfinite(sb0[1:-1])):
            slack_b = (Ibar - (sb0 * Ibar[0] + sb1 * Ibar[-1]))[1:-1]
            extras["reduced_margin"] = float(np.min(slack_b))
            margin = min(margin, float(np.min(slack_b)))
        else:
            margin = -math.inf
        t0, t1 = _endpoint_coeffs(ts, np.array([theta]), K, N, reduced=False)
        if np.all(np.isfinite(t0[0, 1:-1])):
            slack_c = (In - (t0[0] * In[0] + t1[0] * In[-1]))[1:-1]
            extras["tau_margin"] = float(np.min(slack_c))
            margin = min(margin, float(np.min(slack_c)))
        else:
            margin = -math.inf
    scale = 1.0 + float(np.max(In))
    v = CdVerdict("JacobiODE", K, N, margin, tol_scale * TOL_EXACT * scale,
                  witnesses=witnesses, notes=[COEFF_READING_NOTE], extras=extras)
    return v


def counterexample_scan(space: ModelSpace, field: FieldSpec, K: float, N: float,
                        n_trials: int = 200, seed: int = 0, delta: float = 0.15,
                        eta: float = 5e-3, tol_scale: float = 1.0) -> CdVerdict:
    """Search for a violation of the sigma-concavity inequality near the
    worst point of the curvature scan.

    Builds the localized quadratic potential psi with grad psi = v and
    Hess psi = lambda I at the worst sample, shoots the induced transport
    geodesics on [-delta, delta], integrates the Jacobi data, and reports
    the most negative inequality margin over the trials.  A margin below
    the detection threshold is a witness that the requested bound fails.
    """
    n = space.dim
    scan = lower_bound_scan(space, field, N, n_points=64, n_dirs=8)
    x, v = scan.worst_point, scan.worst_direction
    if math.isinf(N) or N <= n:
        lam = 0.0
    else:
        zv = space.inner(x, field(x), v)
        lam = zv / (N - n)
    rng = np.random.default_rng(seed)
    worst = math.inf
    witness = None
    tol = tol_scale * 1e-7
    for trial in range(n_trials):
        y = x + eta * rng.normal(size=n)
        d = delta * rng.uniform(0.6, 1.0)
        grad = v + lam * (y - x)
        try:
            g_minus = geodesic_shoot(space, y, d * grad, 64)
            start = g_minus.points[-1]
            vstart = -2.0 * g_minus.velocities[-1]
            geo = geodesic_shoot(space, start, vstart, 256)
            jplus = jacobi_evolve(space, g_minus, np.eye(n), +d * lam * np.eye(n),
                                  n_steps=256, n_store=33)
            g_plus = geodesic_shoot(space, y, -d * grad, 64)
            jminus = jacobi_evolve(space, g_plus, np.eye(n), -d * lam * np.eye(n),
                                   n_steps=256, n_store=33)
        except ConjugatePoint:
            continue
        # assemble log det A over the full [-delta, delta] curve (u in [0,1])
        y_full = np.concatenate([jplus.detlog[::-1], jminus.detlog[1:]])
        prof = line_integral_profile(geo, field)
        ts = np.linspace(0.0, 1.0, len(y_full))
        phi = np.interp(ts, geo.ts, prof)
        theta = geo.speed
        h = y_full + phi
        if math.isinf(N):
            dt = ts[1] - ts[0]
            d2 = (h[:-2] - 2 * h[1:-1] + h[2:]) / dt ** 2
            m = float(np.min(-d2 - K * theta ** 2))
        else:
            In = np.exp(h / N)
            s0 = sigma_values(1.0 - ts, theta, K, N)
            s1 = sigma_values(ts, theta, K, N)
            if not np.all(np.isfinite(s0[1:-1])):
                continue
            m = float(np.min((In - (s0 * In[0] + s1 * In[-1]))[1:-1]))
        if m < worst:
            worst = m
            witness = (float(theta), trial, list(map(float, y)), m)
    v_out = CdVerdict("CounterexampleScan", K, N,
                      worst if witness is not None else 0.0, tol,
                      witnesses=[witness] if witness is not None else [],
                      notes=[COEFF_READING_NOTE,
                             f"scan inf = {scan.inf_estimate:.6g}"])
    v_out.extras["scan_inf"] = scan.inf_estimate
    v_out.extras["found_witness"] = bool(witness is not None and worst < -tol)
    return v_out
