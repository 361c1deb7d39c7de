"""Vector fields, their line integrals along geodesics, and the drift Ricci tensor.

A field Z is identified with the 1-form <Z, .>; the work integral along a
geodesic is

    phi_t(gamma) = int_0^t <Z(gamma(s)), gamma'(s)>_g ds,

so a gradient field Z = grad f gives phi_t = f(gamma_t) - f(gamma_0).
The drift Ricci tensor for the operator Delta + Z with dimension bound N is

    Ric(v,v) - (sym grad Z)(v,v) - <Z,v>^2 / (N - n)      for n < N < inf,
    Ric(v,v) - (sym grad Z)(v,v)                           for N = inf,

with the N = n branch requiring <Z,v> = 0 (else -inf) and 1 <= N < n
identically -inf on nonzero vectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import GeodesicPath, Kind, ModelSpace, ricci_at

__all__ = [
    "FieldSpec",
    "BakryEmeryReport",
    "zero_field",
    "line_integral",
    "line_integral_profile",
    "cumulative_simpson",
    "symmetric_derivative",
    "bakry_emery_at",
    "bakry_emery_intro",
    "lower_bound_scan",
    "NEG_INF",
]

NEG_INF = float("-inf")
FD_STEP = 1e-5  # central-difference step for dZ when no analytic callback


@dataclass
class FieldSpec:
    """Vector field in chart components.

    ``fn`` maps points of shape (..., dim) to vectors of the same shape
    and must be vectorized over leading axes (wrap scalar callbacks with
    ``vectorized=False``).  ``dfn`` optionally returns the Jacobian
    d_j Z^i with shape (..., dim, dim); central differences of step 1e-5
    are the fallback.  Callbacks must be re-entrant.
    """

    fn: Callable
    dfn: Optional[Callable] = None
    name: str = "field"
    vectorized: bool = True

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if self.vectorized:
            return np.asarray(self.fn(pts), dtype=float)
        flat = pts.reshape(-1, pts.shape[-1])
        vals = np.stack([np.asarray(self.fn(p), dtype=float) for p in flat])
        return vals.reshape(pts.shape)

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.dfn is not None:
            return np.asarray(self.dfn(x), dtype=float)
        d = x.shape[-1]
        J = np.empty((d, d))
        for j in range(d):
            e = np.zeros(d)
            e[j] = FD_STEP
            J[:, j] = (self(x + e) - self(x - e)) / (2 * FD_STEP)
        return J


def zero_field(dim: int = 1) -> FieldSpec:
    return FieldSpec(lambda p: np.zeros_like(p), lambda p: np.zeros((dim, dim)), "zero")


def cumulative_simpson(y: np.ndarray, h: float) -> np.ndarray:
    """Cumulative integral of uniformly sampled y, 4th order composite Simpson.

    Odd interior nodes use the half-panel Simpson correction so every
    prefix value carries the full order.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    out = np.zeros_like(y)
    if n < 2:
        return out
    if n == 2:
        out[1] = 0.5 * h * (y[0] + y[1])
        return out
    even = np.arange(2, n, 2)
    panel = (h / 3.0) * (y[even - 2] + 4.0 * y[even - 1] + y[even])
    out[even] = np.cumsum(panel, axis=0)
    odd = np.arange(1, n, 2)
    half = (h / 12.0) * (5.0 * y[odd - 1] + 8.0 * y[odd] - y[np.minimum(odd + 1, n - 1)])
    if n % 2 == 0:
        # trailing odd node has no right neighbour; fall back to trapezoid there
        half[-1] = 0.5 * h * (y[odd[-1] - 1] + y[odd[-1]])
    out[odd] = out[odd - 1] + half
    return out


def _pairing_along(space: ModelSpace, geo: GeodesicPath, field: FieldSpec) -> np.ndarray:
    """<Z(gamma(s)), gamma'(s)>_g at the path samples."""
    if geo.embedded is not None and space.kind == Kind.SPHERE2:
        from .geometry import sphere_embed_vel

        pts = space.wrap(geo.points)
        Z = field(pts)
        Z_emb = sphere_embed_vel(space, pts, Z)
        return np.einsum("ti,ti->t", Z_emb, geo.embedded_vel)
    pts = space.wrap(geo.points)
    Z = field(pts)
    g = space.metric(pts)
    return np.einsum("ti,tij,tj->t", Z, g, geo.velocities)


def line_integral_profile(geo: GeodesicPath, field: FieldSpec) -> np.ndarray:
    """phi_t(gamma) at every path sample time (phi_0 = 0)."""
    vals = _pairing_along(geo.space, geo, field)
    h = geo.ts[1] - geo.ts[0]
    return cumulative_simpson(vals, h)


def line_integral(geo: GeodesicPath, field: FieldSpec, t: float = 1.0) -> float:
    """phi_t(gamma) by composite quadrature over the stored samples."""
    if len(geo.ts) < 16:
        raise ValueError("geodesic too coarsely sampled for quadrature (need >= 16)")
    prof = line_integral_profile(geo, field)
    return float(np.interp(t, geo.ts, prof))


def symmetric_derivative(space: ModelSpace, field: FieldSpec, x, v) -> float:
    """(sym grad Z)(v, v) = <cov_v Z, v>_g with Christoffel terms per kind."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    J = field.jacobian(x)
    Gam = space.christoffels(x)
    Z = field(x)
    nab = J @ v + np.einsum("ijk,j,k->i", Gam, v, Z)
    g = space.metric(x)
    return float(v @ g @ nab)


def bakry_emery_at(space: ModelSpace, field: FieldSpec, N: float, x, v) -> float:
    """Drift Ricci tensor at x on the unit vector along v.

    Input v is normalized internally; the returned value is for |v|_g = 1.
    Returns -inf on the constrained branches (N = n with <Z,v> != 0, or
    N < n).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    nv = space.norm(x, v)
    if nv <= 0:
        raise ValueError("need |v| > 0")
    v = v / nv
    if space.bakry_emery_fn is not None:
        return float(space.bakry_emery_fn(x, v, N))
    n = space.dim
    ric = ricci_at(space, x, v)
    sym = symmetric_derivative(space, field, x, v)
    if math.isinf(N):
        return ric - sym
    if N > n:
        zv = space.inner(x, field(x), v)
        return ric - sym - zv * zv / (N - n)
    if N == n:
        zv = space.inner(x, field(x), v)
        if abs(zv) <= 1e-10:
            return ric - sym
        return NEG_INF
    return NEG_INF


def bakry_emery_intro(space: ModelSpace, field: FieldSpec, N: float, x, v) -> float:
    """Variant with the -<Z,v>^2/N normalization, via N -> N + dim relabeling."""
    if math.isinf(N):
        return bakry_emery_at(space, field, N, x, v)
    return bakry_emery_at(space, field, N + space.dim, x, v)


@dataclass
class BakryEmeryReport:
    """Sampled infimum of the drift Ricci tensor over points x directions."""

    samples: np.ndarray          # (n_samples,) tensor values
    points: np.ndarray           # (n_samples, dim)
    directions: np.ndarray       # (n_samples, dim), unit vectors
    inf_estimate: float
    worst_point: np.ndarray
    worst_direction: np.ndarray

    @property
    def finite(self) -> bool:
        """False when any sample hit a -inf branch (no finite lower bound)."""
        return bool(np.all(np.isfinite(self.samples)))


def _scan_points(space: ModelSpace, n_points: int) -> np.ndarray:
    margin = space.params.get("boundary_margin", 0.0)
    if space.dim == 1:
        lo, hi = space.bounds[0]
        if space.periodic[0]:
            return np.linspace(lo, hi, n_points, endpoint=False)[:, None]
        pad = 1e-9 + margin
        return np.linspace(lo + pad, hi - pad, n_points)[:, None]
    if space.kind == Kind.SPHERE2:
        # Fibonacci lattice, clipped away from the polar caps
        k = np.arange(n_points)
        z = np.clip(1.0 - 2.0 * (k + 0.5) / n_points, -1.0 + 1e-6, 1.0 - 1e-6)
        th = np.arccos(z)
        ph = np.mod(k * math.pi * (3.0 - math.sqrt(5.0)), 2 * math.pi)
        th = np.clip(th, space.bounds[0][0] + 1e-9, space.bounds[0][1] - 1e-9)
        return np.stack([th, ph], axis=-1)
    if space.kind == Kind.FLAT_TORUS2:
        m = max(2, int(math.sqrt(n_points)))
        axes = []
        for i, (lo, hi) in enumerate(space.bounds):
            if space.periodic[i]:
                axes.append(np.linspace(lo, hi, m, endpoint=False))
            else:
                pad = 1e-6 + margin
                axes.append(np.linspace(lo + pad, hi - pad, m))
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)
    if space.kind == Kind.WARPED:
        # base grid x fiber grid product
        spec = space.params.get("warp_spec")
        m = max(2, int(round(math.sqrt(n_points))))
        lo, hi = space.bounds[0]
        pad = 1e-6 + margin
        rs = np.linspace(lo + pad, hi - pad, m)
        fib = _scan_points(spec.fiber, m) if spec is not None else None
        if fib is None:
            raise ValueError("warped scan needs warp_spec params")
        out = np.empty((len(rs) * len(fib), space.dim))
        k = 0
        for r in rs:
            for q in fib:
                out[k, 0] = r
                out[k, 1:] = q
                k += 1
        return out
    raise ValueError(f"no scan grid for kind {space.kind}")


def _direction_fan(space: ModelSpace, x: np.ndarray, n_dirs: int) -> np.ndarray:
    if space.dim == 1:
        return np.array([[1.0], [-1.0]])[: max(1, min(2, n_dirs))]
    g = space.metric(x)
    L = np.linalg.cholesky(g)
    E = np.linalg.inv(L.T)  # columns are g-orthonormal
    if space.dim == 2:
        angles = np.linspace(0.0, math.pi, n_dirs, endpoint=False)
        dirs = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    else:
        # Fibonacci directions on the Euclidean sphere of the frame
        k = np.arange(n_dirs)
        z = 1.0 - 2.0 * (k + 0.5) / n_dirs
        rho = np.sqrt(np.maximum(1.0 - z * z, 0.0))
        ph = k * math.pi * (3.0 - math.sqrt(5.0))
        dirs = np.stack([rho * np.cos(ph), rho * np.sin(ph), z], axis=-1)
        if space.dim > 3:
            raise ValueError("direction fan supports dim <= 3")
    return dirs @ E.T


def lower_bound_scan(space: ModelSpace, field: FieldSpec, N: float,
                     n_points: int = 64, n_dirs: int = 8) -> BakryEmeryReport:
    """Infimum estimate of the drift Ricci tensor over a point x direction fan."""
    pts = _scan_points(space, n_points)
    vals = []
    ps = []
    ds = []
    for x in pts:
        for v in _direction_fan(space, x, n_dirs):
            vals.append(bakry_emery_at(space, field, N, x, v))
            ps.append(x)
            ds.append(v)
    vals = np.array(vals)
    ps = np.array(ps)
    ds = np.array(ds)
    i = int(np.argmin(vals))
    return BakryEmeryReport(vals, ps, ds, float(vals[i]), ps[i], ds[i])
