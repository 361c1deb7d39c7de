"""Model Riemannian spaces: charts, geodesics, distances, curvature, Jacobi ODEs.

Closed forms first: Interval, Circle, Sphere2 and FlatTorus2 carry bespoke
geodesic/distance/Ricci code; warped products (built in ``warped.py``)
attach closed-form hooks and fall back to a classical fixed-step RK4
integration of the geodesic equation.

Sphere geodesics are computed in the R^3 embedding and converted back to
the (polar, azimuth) chart, which sidesteps chart singularities at the
poles; the embedded samples are cached on the path so downstream inner
products never divide by sin(polar).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import ConjugatePoint, LeavesChart, UnsupportedSpace

__all__ = [
    "Kind",
    "ModelSpace",
    "GeodesicPath",
    "JacobiMatrixPath",
    "interval",
    "circle",
    "sphere2",
    "flat_torus2",
    "geodesic_shoot",
    "straight_path",
    "distance",
    "connecting_velocity",
    "ricci_at",
    "jacobi_evolve",
    "jacobi_evolve_batch",
    "diameter",
]

ENERGY_RTOL = 1e-8  # relative constancy of |dgamma/dt| enforced on every shoot
POLE_CAP = 1e-6  # polar exclusion radius of the Sphere2 chart


class Kind(Enum):
    INTERVAL = "interval"
    CIRCLE = "circle"
    SPHERE2 = "sphere2"
    FLAT_TORUS2 = "flat_torus2"
    WARPED = "warped"


@dataclass
class ModelSpace:
    """Chart-based model space: coordinate box, metric, measure weight.

    ``weight`` is the density of the reference measure against Riemannian
    volume (vectorized over trailing point axes); ``None`` means 1.
    Warped products attach the optional ``*_fn`` hooks; the closed-form
    kinds never use them.  Instances are immutable by convention and safe
    to share across threads.
    """

    kind: Kind
    dim: int
    bounds: tuple
    periodic: tuple
    weight: Optional[Callable] = None
    params: dict = field(default_factory=dict)
    metric_fn: Optional[Callable] = None
    christoffel_fn: Optional[Callable] = None
    ricci_fn: Optional[Callable] = None
    bakry_emery_fn: Optional[Callable] = None
    diameter_fn: Optional[Callable] = None
    distance_fn: Optional[Callable] = None

    # -- chart helpers -----------------------------------------------------
    def wrap(self, x: np.ndarray) -> np.ndarray:
        """Map periodic coordinates back into the chart box."""
        x = np.asarray(x, dtype=float)
        out = x.copy()
        for i, per in enumerate(self.periodic):
            if per:
                lo, hi = self.bounds[i]
                out[..., i] = lo + np.mod(out[..., i] - lo, hi - lo)
        return out

    def in_chart(self, x: np.ndarray, margin: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        for i, per in enumerate(self.periodic):
            if per:
                continue
            lo, hi = self.bounds[i]
            if np.any(x[..., i] < lo - margin) or np.any(x[..., i] > hi + margin):
                return False
        return True

    def metric(self, x: np.ndarray) -> np.ndarray:
        """Metric matrix at a chart point (vectorized over leading axes)."""
        x = np.asarray(x, dtype=float)
        if self.metric_fn is not None:
            return self.metric_fn(x)
        if self.kind in (Kind.INTERVAL, Kind.CIRCLE):
            shape = x.shape[:-1]
            return np.broadcast_to(np.eye(1), shape + (1, 1)).copy()
        if self.kind == Kind.FLAT_TORUS2:
            shape = x.shape[:-1]
            return np.broadcast_to(np.eye(2), shape + (2, 2)).copy()
        if self.kind == Kind.SPHERE2:
            R = self.params["radius"]
            theta = x[..., 0]
            g = np.zeros(x.shape[:-1] + (2, 2))
            g[..., 0, 0] = R * R
            g[..., 1, 1] = (R * np.sin(theta)) ** 2
            return g
        raise UnsupportedSpace(f"no metric for kind {self.kind}")

    def christoffels(self, x: np.ndarray) -> np.ndarray:
        """Gamma^i_{jk} at a chart point."""
        x = np.asarray(x, dtype=float)
        if self.christoffel_fn is not None:
            return self.christoffel_fn(x)
        if self.kind in (Kind.INTERVAL, Kind.CIRCLE, Kind.FLAT_TORUS2):
            return np.zeros((self.dim,) * 3)
        if self.kind == Kind.SPHERE2:
            theta = float(x[0])
            G = np.zeros((2, 2, 2))
            s, c = math.sin(theta), math.cos(theta)
            G[0, 1, 1] = -s * c
            if abs(s) > 1e-14:
                cot = c / s
                G[1, 0, 1] = cot
                G[1, 1, 0] = cot
            return G
        raise UnsupportedSpace(f"no christoffels for kind {self.kind}")

    def inner(self, x, u, v) -> float:
        g = self.metric(x)
        return float(np.asarray(u) @ g @ np.asarray(v))

    def norm(self, x, v) -> float:
        return math.sqrt(max(self.inner(x, v, v), 0.0))

    def weight_at(self, x) -> np.ndarray:
        if self.weight is None:
            x = np.asarray(x, dtype=float)
            return np.ones(x.shape[:-1])
        return np.asarray(self.weight(np.asarray(x, dtype=float)))

    def volume_element(self, x) -> np.ndarray:
        """sqrt(det g) * weight, the density of the reference measure in chart coords."""
        g = self.metric(x)
        detg = np.linalg.det(g)
        return np.sqrt(np.maximum(detg, 0.0)) * self.weight_at(x)


# -- factories --------------------------------------------------------------

def interval(a: float, b: float, weight: Optional[Callable] = None) -> ModelSpace:
    """Flat 1-D interval [a, b] with reflecting chart boundary."""
    if not b > a:
        raise ValueError("need b > a")
    return ModelSpace(Kind.INTERVAL, 1, ((a, b),), (False,), weight, {"a": a, "b": b})


def circle(circumference: float = 2 * math.pi, weight: Optional[Callable] = None) -> ModelSpace:
    """Flat circle of the given circumference, chart [0, L) periodic."""
    L = float(circumference)
    return ModelSpace(Kind.CIRCLE, 1, ((0.0, L),), (True,), weight, {"length": L})


def sphere2(radius: float = 1.0, weight: Optional[Callable] = None) -> ModelSpace:
    """Round 2-sphere of the given radius, chart (polar, azimuth)."""
    R = float(radius)
    return ModelSpace(
        Kind.SPHERE2,
        2,
        ((POLE_CAP, math.pi - POLE_CAP), (0.0, 2 * math.pi)),
        (False, True),
        weight,
        {"radius": R},
    )


def flat_torus2(l1: float = 2 * math.pi, l2: float = 2 * math.pi,
                weight: Optional[Callable] = None) -> ModelSpace:
    """Flat 2-torus with periods (l1, l2)."""
    return ModelSpace(
        Kind.FLAT_TORUS2,
        2,
        ((0.0, float(l1)), (0.0, float(l2))),
        (True, True),
        weight,
        {"l1": float(l1), "l2": float(l2)},
    )


# -- sphere chart <-> embedding ---------------------------------------------

def sphere_embed(space: ModelSpace, x: np.ndarray) -> np.ndarray:
    R = space.params["radius"]
    th, ph = x[..., 0], x[..., 1]
    st = np.sin(th)
    return R * np.stack([st * np.cos(ph), st * np.sin(ph), np.cos(th)], axis=-1)


def sphere_embed_vel(space: ModelSpace, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    R = space.params["radius"]
    th, ph = x[..., 0], x[..., 1]
    st, ct = np.sin(th), np.cos(th)
    cp, sp = np.cos(ph), np.sin(ph)
    e_th = R * np.stack([ct * cp, ct * sp, -st], axis=-1)
    e_ph = R * np.stack([-st * sp, st * cp, np.zeros_like(th)], axis=-1)
    return v[..., :1] * e_th + v[..., 1:2] * e_ph


def sphere_chart(space: ModelSpace, p: np.ndarray) -> np.ndarray:
    R = space.params["radius"]
    z = np.clip(p[..., 2] / R, -1.0, 1.0)
    th = np.arccos(z)
    ph = np.mod(np.arctan2(p[..., 1], p[..., 0]), 2 * math.pi)
    return np.stack([th, ph], axis=-1)


def sphere_chart_vel(space: ModelSpace, p: np.ndarray, dp: np.ndarray) -> np.ndarray:
    R = space.params["radius"]
    x, y = p[..., 0], p[..., 1]
    rho2 = np.maximum(x * x + y * y, (R * POLE_CAP * 1e-3) ** 2)
    # z = R cos(th) so dth = -dz / (R sin th) with R sin(th) = sqrt(x^2+y^2)
    dth = -dp[..., 2] / np.sqrt(rho2)
    dph = (x * dp[..., 1] - y * dp[..., 0]) / rho2
    return np.stack([dth, dph], axis=-1)


# -- geodesic paths ----------------------------------------------------------

@dataclass
class GeodesicPath:
    """Constant-speed geodesic gamma: [0,1] -> X sampled on a uniform t grid.

    On periodic kinds the stored chart coordinates are unrolled (they live
    on the universal cover); consumers wrap them before evaluating fields.
    For Sphere2, ``embedded``/``embedded_vel`` cache the R^3 samples.
    """

    space: ModelSpace
    ts: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    speed: float
    embedded: Optional[np.ndarray] = None
    embedded_vel: Optional[np.ndarray] = None

    def __post_init__(self):
        if len(self.ts) >= 2:
            if self.embedded_vel is not None:
                speeds = np.linalg.norm(self.embedded_vel, axis=-1)
            else:
                g = self.space.metric(self.space.wrap(self.points))
                sq = np.einsum("ti,tij,tj->t", self.velocities, g, self.velocities)
                speeds = np.sqrt(np.maximum(sq, 0.0))
            if np.max(np.abs(speeds - self.speed)) > ENERGY_RTOL * max(self.speed, 1.0):
                raise AssertionError(
                    f"geodesic energy drift {np.max(np.abs(speeds - self.speed)):.3e} "
                    f"exceeds {ENERGY_RTOL}"
                )

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]


def _uniform_ts(n: int) -> np.ndarray:
    if n < 2:
        raise ValueError("need at least 2 samples")
    return np.linspace(0.0, 1.0, n)


def straight_path(space: ModelSpace, x, v, n_steps: int = 128) -> GeodesicPath:
    """Straight-line geodesic on a flat chart (Interval/Circle/FlatTorus2)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    ts = _uniform_ts(n_steps + 1)
    pts = x[None, :] + ts[:, None] * v[None, :]
    if space.kind == Kind.INTERVAL:
        a, b = space.bounds[0]
        if np.any(pts[:, 0] < a - 1e-12) or np.any(pts[:, 0] > b + 1e-12):
            raise LeavesChart(f"straight path exits [{a}, {b}]")
    vels = np.broadcast_to(v, pts.shape).copy()
    return GeodesicPath(space, ts, pts, vels, float(np.linalg.norm(v)))


def geodesic_shoot(space: ModelSpace, x, v, n_steps: int = 128) -> GeodesicPath:
    """exp_x(t v) for t in [0, 1], sampled on n_steps+1 uniform times."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if space.kind in (Kind.INTERVAL, Kind.CIRCLE, Kind.FLAT_TORUS2):
        return straight_path(space, x, v, n_steps)
    if space.kind == Kind.SPHERE2:
        return _sphere_shoot(space, x, v, n_steps)
    if space.kind == Kind.WARPED:
        return _rk4_shoot(space, x, v, n_steps)
    raise UnsupportedSpace(str(space.kind))


def _sphere_shoot(space: ModelSpace, x, v, n_steps: int) -> GeodesicPath:
    R = space.params["radius"]
    ts = _uniform_ts(n_steps + 1)
    s = space.norm(x, v)
    p0 = sphere_embed(space, x)
    if s < 1e-300:
        pts = np.repeat(x[None, :], len(ts), axis=0)
        vels = np.zeros_like(pts)
        emb = np.repeat(p0[None, :], len(ts), axis=0)
        return GeodesicPath(space, ts, pts, vels, 0.0, emb, np.zeros_like(emb))
    u = sphere_embed_vel(space, x, v) / s
    ang = s * ts / R
    emb = np.cos(ang)[:, None] * p0[None, :] + (R * np.sin(ang))[:, None] * u[None, :]
    emb_vel = (-s * np.sin(ang) / R)[:, None] * p0[None, :] + (s * np.cos(ang))[:, None] * u[None, :]
    pts = sphere_chart(space, emb)
    vels = sphere_chart_vel(space, emb, emb_vel)
    return GeodesicPath(space, ts, pts, vels, s, emb, emb_vel)


def _geodesic_rhs(space: ModelSpace, pos: np.ndarray, vel: np.ndarray):
    Gam = space.christoffels(pos)
    acc = -np.einsum("ijk,j,k->i", Gam, vel, vel)
    return vel, acc


def _rk4_shoot(space: ModelSpace, x, v, n_steps: int) -> GeodesicPath:
    n = max(int(n_steps), 32)
    ts = _uniform_ts(n + 1)
    h = 1.0 / n
    pts = np.empty((n + 1, space.dim))
    vels = np.empty((n + 1, space.dim))
    pos, vel = x.astype(float).copy(), v.astype(float).copy()
    pts[0], vels[0] = pos, vel
    margin = space.params.get("boundary_margin", 0.0)
    for k in range(n):
        k1p, k1v = _geodesic_rhs(space, pos, vel)
        k2p, k2v = _geodesic_rhs(space, pos + 0.5 * h * k1p, vel + 0.5 * h * k1v)
        k3p, k3v = _geodesic_rhs(space, pos + 0.5 * h * k2p, vel + 0.5 * h * k2v)
        k4p, k4v = _geodesic_rhs(space, pos + h * k3p, vel + h * k3v)
        pos = pos + (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
        vel = vel + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        if not space.in_chart(space.wrap(pos), margin=-margin):
            raise LeavesChart(f"geodesic exits chart at t={ts[k + 1]:.4f}")
        pts[k + 1], vels[k + 1] = pos, vel
    speed = space.norm(x, v)
    return GeodesicPath(space, ts, pts, vels, speed)


# -- distances ---------------------------------------------------------------

def distance(space: ModelSpace, x, y) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if space.distance_fn is not None:
        return float(space.distance_fn(x, y))
    if space.kind == Kind.INTERVAL:
        return float(abs(y[0] - x[0]))
    if space.kind == Kind.CIRCLE:
        L = space.params["length"]
        d = abs(y[0] - x[0]) % L
        return float(min(d, L - d))
    if space.kind == Kind.FLAT_TORUS2:
        l1, l2 = space.params["l1"], space.params["l2"]
        d1 = abs(y[0] - x[0]) % l1
        d2 = abs(y[1] - x[1]) % l2
        return float(math.hypot(min(d1, l1 - d1), min(d2, l2 - d2)))
    if space.kind == Kind.SPHERE2:
        R = space.params["radius"]
        px, py = sphere_embed(space, x), sphere_embed(space, y)
        c = float(np.clip(px @ py / (R * R), -1.0, 1.0))
        return R * math.acos(c)
    raise UnsupportedSpace(str(space.kind))


def connecting_velocity(space: ModelSpace, x, y) -> np.ndarray:
    """Initial velocity v with exp_x(v) = y along a minimizing geodesic."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if space.kind == Kind.INTERVAL:
        return y - x
    if space.kind == Kind.CIRCLE:
        L = space.params["length"]
        d = (y[0] - x[0]) % L
        if d > L / 2:
            d -= L
        return np.array([d])
    if space.kind == Kind.FLAT_TORUS2:
        out = np.empty(2)
        for i, L in enumerate((space.params["l1"], space.params["l2"])):
            d = (y[i] - x[i]) % L
            if d > L / 2:
                d -= L
            out[i] = d
        return out
    if space.kind == Kind.SPHERE2:
        R = space.params["radius"]
        px, py = sphere_embed(space, x), sphere_embed(space, y)
        c = float(np.clip(px @ py / (R * R), -1.0, 1.0))
        ang = math.acos(c)
        if ang < 1e-14:
            return np.zeros(2)
        if ang > math.pi - 1e-12:
            raise UnsupportedSpace("antipodal points: connecting velocity not unique")
        u = py - c * px
        u = u / np.linalg.norm(u)
        v_emb = R * ang * u
        return sphere_chart_vel(space, px, v_emb)
    raise UnsupportedSpace(str(space.kind))


def diameter(space: ModelSpace) -> float:
    if space.diameter_fn is not None:
        return float(space.diameter_fn())
    if space.kind == Kind.INTERVAL:
        a, b = space.bounds[0]
        return b - a
    if space.kind == Kind.CIRCLE:
        return space.params["length"] / 2.0
    if space.kind == Kind.SPHERE2:
        return math.pi * space.params["radius"]
    if space.kind == Kind.FLAT_TORUS2:
        return math.hypot(space.params["l1"] / 2.0, space.params["l2"] / 2.0)
    raise UnsupportedSpace(str(space.kind))


# -- curvature ----------------------------------------------------------------

def ricci_at(space: ModelSpace, x, v) -> float:
    """Ricci tensor Ric_x(v, v) of the model metric (closed form per kind)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if space.ricci_fn is not None:
        return float(space.ricci_fn(x, v))
    if space.kind in (Kind.INTERVAL, Kind.CIRCLE, Kind.FLAT_TORUS2):
        return 0.0
    if space.kind == Kind.SPHERE2:
        R = space.params["radius"]
        return space.inner(x, v, v) / (R * R)
    raise UnsupportedSpace(str(space.kind))


def sectional_curvature(space: ModelSpace) -> float:
    """Constant sectional curvature of the model (flat kinds and spheres)."""
    if space.kind in (Kind.INTERVAL, Kind.CIRCLE, Kind.FLAT_TORUS2):
        return 0.0
    if space.kind == Kind.SPHERE2:
        R = space.params["radius"]
        return 1.0 / (R * R)
    raise UnsupportedSpace("sectional curvature only for constant-curvature kinds")


# -- matrix Jacobi equation ----------------------------------------------------

@dataclass
class JacobiMatrixPath:
    """Matrix Jacobi data along a geodesic in a parallel orthonormal frame.

    The frame's first vector is the direction of motion, so the curvature
    matrix is diag(0, kappa * speed^2, ...).  Stores A_t, U_t = A'_t A_t^{-1}
    and y_t = log det A_t on the output grid.
    """

    ts: np.ndarray
    A: np.ndarray        # (T, d, d)
    Aprime: np.ndarray   # (T, d, d)
    U: np.ndarray        # (T, d, d)
    detlog: np.ndarray   # (T,)


def _frame_curvature_diag(space: ModelSpace, speed: float) -> np.ndarray:
    """Diagonal of R(t)_{jk} = <R(e_k, v)v, e_j> in the parallel frame."""
    kappa = sectional_curvature(space)
    diag = np.full(space.dim, kappa * speed * speed)
    diag[0] = 0.0
    return diag


def jacobi_evolve_batch(R_diag: np.ndarray, A0: np.ndarray, A0p: np.ndarray,
                        n_steps: int = 512, n_store: int = 65):
    """Integrate A'' = -diag(R) A for a batch of systems with RK4.

    R_diag: (B, d); A0, A0p: (B, d, d).  Returns (ts, A, Ap) with A of
    shape (n_store, B, d, d).  n_steps must be a multiple of n_store - 1.
    """
    B, d = R_diag.shape
    if n_steps % (n_store - 1) != 0:
        n_steps = (n_store - 1) * max(1, round(n_steps / (n_store - 1)))
    stride = n_steps // (n_store - 1)
    h = 1.0 / n_steps
    A = A0.astype(float).copy()
    Ap = A0p.astype(float).copy()
    R = R_diag[:, :, None]
    ts = np.linspace(0.0, 1.0, n_store)
    outA = np.empty((n_store, B, d, d))
    outAp = np.empty((n_store, B, d, d))
    outA[0], outAp[0] = A, Ap
    idx = 1
    for k in range(n_steps):
        k1A, k1B = Ap, -R * A
        A2, B2 = A + 0.5 * h * k1A, Ap + 0.5 * h * k1B
        k2A, k2B = B2, -R * A2
        A3, B3 = A + 0.5 * h * k2A, Ap + 0.5 * h * k2B
        k3A, k3B = B3, -R * A3
        A4, B4 = A + h * k3A, Ap + h * k3B
        k4A, k4B = B4, -R * A4
        A = A + (h / 6.0) * (k1A + 2 * k2A + 2 * k3A + k4A)
        Ap = Ap + (h / 6.0) * (k1B + 2 * k2B + 2 * k3B + k4B)
        if (k + 1) % stride == 0:
            outA[idx], outAp[idx] = A, Ap
            idx += 1
    return ts, outA, outAp


def jacobi_evolve(space: ModelSpace, geo: GeodesicPath, A0, A0prime,
                  n_steps: int = 512, n_store: int = 65) -> JacobiMatrixPath:
    """Matrix Jacobi field along geo with initial data (A0, A0').

    Raises ConjugatePoint when det A_t reaches zero inside [0, 1].
    """
    d = space.dim
    A0 = np.asarray(A0, dtype=float).reshape(d, d)
    A0p = np.asarray(A0prime, dtype=float).reshape(d, d)
    if abs(np.linalg.det(A0)) < 1e-300:
        raise ValueError("A0 must be invertible")
    Rd = _frame_curvature_diag(space, geo.speed)[None, :]
    ts, outA, outAp = jacobi_evolve_batch(Rd, A0[None], A0p[None], n_steps, n_store)
    A = outA[:, 0]
    Ap = outAp[:, 0]
    sign, logdet = np.linalg.slogdet(A)
    if np.any(sign <= 0):
        bad = int(np.argmax(sign <= 0))
        raise ConjugatePoint(f"det A_t vanishes near t={ts[bad]:.4f}")
    U = np.einsum("tij,tjk->tik", Ap, np.linalg.inv(A))
    return JacobiMatrixPath(ts, A, Ap, U, logdet)
