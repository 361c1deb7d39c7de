"""Distortion coefficients sigma and tau used by curvature-dimension inequalities.

``sin_kn(K, N, x)`` solves the comparison ODE

    u'' + (K/N) u = 0,   u(0) = 0,  u'(0) = 1,

and the coefficients are

    sigma_{K,N}^{(t)}(theta) = sin_kn(K, N, t*theta) / sin_kn(K, N, theta)
        when sin_kn(K, N, .) > 0 on (0, theta], +inf otherwise,

    tau_{K,N}^{(t)}(theta) = t^{1/N} * sigma_{K,N-1}^{(t)}(theta)^{1-1/N}
        for N > 1, +inf when K > 0 and N = 1, t when K <= 0 and N = 1.

The +inf branch is kept as an explicit tagged value (``ExtendedReal``)
so infinities never leak into float arithmetic; combining the tag with
finite weights stays infinite.  At theta = 0 both coefficients are
defined by their continuous extension, the value t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CurvatureDimension",
    "ExtendedReal",
    "INF",
    "sin_kn",
    "sigma",
    "tau",
    "blowup_threshold",
    "sigma_values",
    "tau_values",
]


@dataclass(frozen=True)
class CurvatureDimension:
    """Curvature lower bound K and dimension upper bound N (N >= 1 or inf)."""

    K: float
    N: float

    def __post_init__(self):
        if not math.isfinite(self.K):
            raise ValueError("K must be finite")
        if not (self.N >= 1.0):
            raise ValueError("N must be >= 1 (or +inf)")


@dataclass(frozen=True)
class ExtendedReal:
    """Nonnegative real with an explicit +inf tag.

    Arithmetic with finite numbers keeps the tag: anything combined with
    the infinite value is infinite (including multiplication by zero,
    which is the convention the inequality checks rely on).
    """

    value: float
    infinite: bool = False

    @property
    def finite(self) -> bool:
        return not self.infinite

    def __float__(self) -> float:
        return math.inf if self.infinite else float(self.value)

    def _lift(self, other):
        if isinstance(other, ExtendedReal):
            return other
        return ExtendedReal(float(other))

    def __add__(self, other):
        o = self._lift(other)
        if self.infinite or o.infinite:
            return INF
        return ExtendedReal(self.value + o.value)

    __radd__ = __add__

    def __mul__(self, other):
        o = self._lift(other)
        if self.infinite or o.infinite:
            return INF
        return ExtendedReal(self.value * o.value)

    __rmul__ = __mul__

    def __le__(self, other):
        o = self._lift(other)
        if self.infinite:
            return o.infinite
        if o.infinite:
            return True
        return self.value <= o.value

    def __lt__(self, other):
        o = self._lift(other)
        if self.infinite:
            return False
        if o.infinite:
            return True
        return self.value < o.value


INF = ExtendedReal(math.inf, True)

# below this value of |K/N| * x^2 the closed forms cancel catastrophically;
# a truncated series of sin_kn is exact to ~1e-26 relative there
_SERIES_CUT = 1e-8


def sin_kn(K: float, N: float, x):
    """Solution of u'' + (K/N) u = 0 with u(0)=0, u'(0)=1, at x >= 0.

    Closed forms: sin(sqrt(K/N) x)/sqrt(K/N) for K>0, x for K=0,
    sinh(sqrt(-K/N) x)/sqrt(-K/N) for K<0.  Accepts scalars or arrays.
    """
    if not (N > 0) or math.isinf(N):
        raise ValueError("sin_kn requires finite N > 0")
    a = K / N
    x = np.asarray(x, dtype=float)
    z = a * x * x
    out = np.empty_like(x)
    series = np.abs(z) < _SERIES_CUT
    out[series] = x[series] * (1.0 - z[series] / 6.0 + z[series] ** 2 / 120.0)
    big = ~series
    if np.any(big):
        if a > 0:
            r = math.sqrt(a)
            out[big] = np.sin(r * x[big]) / r
        else:
            r = math.sqrt(-a)
            out[big] = np.sinh(r * x[big]) / r
    if out.ndim == 0:
        return float(out)
    return out


def blowup_threshold(K: float, N: float) -> float:
    """Smallest theta with sin_kn(K, N, theta) = 0, +inf when K <= 0."""
    if K <= 0:
        return math.inf
    return math.pi * math.sqrt(N / K)


def _sigma_finite(K: float, N: float, theta: float) -> bool:
    return theta < blowup_threshold(K, N)


def sigma_raw(t: float, theta: float, K: float, N: float) -> ExtendedReal:
    """sigma with bare parameters; N may lie in (0, 1) when called from tau."""
    if math.isinf(N) or N <= 0:
        raise ValueError("sigma requires finite N > 0")
    if theta < 0:
        raise ValueError("theta must be >= 0")
    if theta == 0.0 or K == 0.0:
        return ExtendedReal(float(t))
    if not _sigma_finite(K, N, theta):
        return INF
    return ExtendedReal(sin_kn(K, N, t * theta) / sin_kn(K, N, theta))


def sigma(t: float, theta: float, cd: CurvatureDimension) -> ExtendedReal:
    """sigma_{K,N}^{(t)}(theta); +inf on the blow-up branch, t at theta = 0."""
    return sigma_raw(t, theta, cd.K, cd.N)


def tau(t: float, theta: float, cd: CurvatureDimension) -> ExtendedReal:
    """tau_{K,N}^{(t)}(theta) for N >= 1; +inf when K > 0 and N = 1."""
    K, N = cd.K, cd.N
    if math.isinf(N):
        raise ValueError("tau requires finite N")
    if theta < 0:
        raise ValueError("theta must be >= 0")
    if N == 1.0:
        if K > 0 and theta > 0:
            return INF
        return ExtendedReal(float(t))
    if theta == 0.0:
        return ExtendedReal(float(t))
    s = sigma_raw(t, theta, K, N - 1.0)
    if s.infinite:
        return INF
    return ExtendedReal(t ** (1.0 / N) * s.value ** (1.0 - 1.0 / N))


def sigma_values(ts, theta: float, K: float, N: float) -> np.ndarray:
    """Vector of sigma_{K,N}^{(t)}(theta) over an array of t.

    Returns np.inf entries on the blow-up branch; callers that feed the
    result into sums must branch on finiteness first (the tagged scalar
    API is the safe default).
    """
    ts = np.asarray(ts, dtype=float)
    if theta == 0.0 or K == 0.0:
        return ts.copy()
    if not _sigma_finite(K, N, theta):
        return np.full_like(ts, np.inf)
    return sin_kn(K, N, ts * theta) / sin_kn(K, N, theta)


def tau_values(ts, theta: float, K: float, N: float) -> np.ndarray:
    """Vector of tau_{K,N}^{(t)}(theta) over an array of t."""
    ts = np.asarray(ts, dtype=float)
    if N == 1.0:
        if K > 0 and theta > 0:
            return np.full_like(ts, np.inf)
        return ts.copy()
    if theta == 0.0:
        return ts.copy()
    if not _sigma_finite(K, N - 1.0, theta):
        return np.full_like(ts, np.inf)
    s = sin_kn(K, N - 1.0, ts * theta) / sin_kn(K, N - 1.0, theta)
    return ts ** (1.0 / N) * s ** (1.0 - 1.0 / N)


def sigma_matrix(ts, thetas, K: float, N: float) -> np.ndarray:
    """sigma_{K,N}^{(t)}(theta) over thetas x ts; np.inf rows past blow-up."""
    ts = np.asarray(ts, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    out = np.empty((len(thetas), len(ts)))
    for i, th in enumerate(thetas):
        out[i] = sigma_values(ts, float(th), K, N)
    return out


def tau_matrix(ts, thetas, K: float, N: float) -> np.ndarray:
    """tau_{K,N}^{(t)}(theta) over thetas x ts; np.inf rows past blow-up."""
    ts = np.asarray(ts, dtype=float)
    thetas = np.asarray(thetas, dtype=float)
    out = np.empty((len(thetas), len(ts)))
    for i, th in enumerate(thetas):
        out[i] = tau_values(ts, float(th), K, N)
    return out
