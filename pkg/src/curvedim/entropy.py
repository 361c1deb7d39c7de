"""Entropy functionals on grid measures.

Measures are finite families of cells: support points, masses, and the
reference volume of each cell.  Densities are cell averages, so every
functional is a finite sum.  Conventions: rho*log(rho) is 0 at rho = 0,
the Boltzmann entropy of mass sitting on zero-reference cells is +inf,
and the N-Renyi entropy only sees the absolutely continuous part.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NotAbsolutelyContinuous

__all__ = ["DiscreteMeasure", "ent", "renyi", "u_n", "weighted_renyi"]


@dataclass
class DiscreteMeasure:
    """Weighted cells: positions, masses, and reference cell volumes.

    ``cell_volumes`` is the reference measure of each cell, so the density
    of the measure against the reference is weights / cell_volumes.  For
    1-D block measures ``cell_bounds`` stores the cell intervals (possibly
    on the universal cover of a circle).
    """

    points: np.ndarray
    weights: np.ndarray
    cell_volumes: Optional[np.ndarray] = None
    cell_bounds: Optional[np.ndarray] = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if np.any(self.weights < -1e-15):
            raise ValueError("weights must be nonnegative")
        if self.cell_volumes is not None:
            self.cell_volumes = np.asarray(self.cell_volumes, dtype=float)
        if self.cell_bounds is not None:
            self.cell_bounds = np.asarray(self.cell_bounds, dtype=float)

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))

    @property
    def densities(self) -> np.ndarray:
        if self.cell_volumes is None:
            raise ValueError("measure has no reference cell volumes")
        with np.errstate(divide="ignore", invalid="ignore"):
            rho = np.where(self.cell_volumes > 0, self.weights / self.cell_volumes, np.inf)
        return np.where(self.weights > 0, rho, 0.0)

    def normalized(self) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points, self.weights / self.total,
                               self.cell_volumes, self.cell_bounds)


def _aligned_volumes(mu: DiscreteMeasure, ref: Optional[DiscreteMeasure]) -> np.ndarray:
    """Reference cell volumes for mu, either its own or from an aligned ref grid."""
    if ref is not None:
        if len(ref.weights) != len(mu.weights):
            raise ValueError("mu and ref must live on the same grid")
        return ref.weights
    if mu.cell_volumes is None:
        raise ValueError("need either an aligned ref or cell_volumes on mu")
    return mu.cell_volumes


def ent(mu: DiscreteMeasure, ref: Optional[DiscreteMeasure] = None) -> float:
    """Boltzmann entropy sum(rho log rho) d(ref); +inf on a singular part."""
    vol = _aligned_volumes(mu, ref)
    w = mu.weights
    singular = (w > 0) & (vol <= 0)
    if np.any(singular):
        return math.inf
    pos = w > 0
    return float(np.sum(w[pos] * np.log(w[pos] / vol[pos])))


def renyi(mu: DiscreteMeasure, ref: Optional[DiscreteMeasure] = None, N: float = 2.0) -> float:
    """N-Renyi entropy -sum(rho^(1-1/N)) d(ref) of the absolutely continuous part.

    N = 1 returns minus the reference measure of the support of rho.
    """
    if N < 1.0:
        raise ValueError("need N >= 1")
    vol = _aligned_volumes(mu, ref)
    w = mu.weights
    ac = (w > 0) & (vol > 0)
    if N == 1.0:
        return -float(np.sum(vol[ac]))
    # sum rho^{1-1/N} vol = sum w^{1-1/N} vol^{1/N}
    return -float(np.sum(w[ac] ** (1.0 - 1.0 / N) * vol[ac] ** (1.0 / N)))


def u_n(mu: DiscreteMeasure, ref: Optional[DiscreteMeasure] = None, N: float = 2.0) -> float:
    """Exponential entropy exp(-Ent/N); 0 when Ent = +inf."""
    e = ent(mu, ref)
    if math.isinf(e):
        return 0.0
    return math.exp(-e / N)


def weighted_renyi(plan, field, ref: Optional[DiscreteMeasure], N: float, t: float) -> float:
    """Drift-weighted Renyi entropy of a dynamical plan at time t:

        -sum_k m_k * rho_t(gamma_k(t))^(-1/N) * exp(phi_t(gamma_k)/N)

    evaluated with the plan's exact interpolated densities and per-segment
    quadrature of the line integrals.  Reduces to renyi((e_t)* plan) when
    the field vanishes.
    """
    from .transport import plan_phi_at, plan_rho_at  # local import, avoids cycle

    rho = plan_rho_at(plan, t)
    if np.any(~np.isfinite(rho)) or np.any(rho <= 0):
        raise NotAbsolutelyContinuous("pushforward mass on zero-reference cells")
    phi_lo, phi_mid, phi_hi = plan_phi_at(plan, field, t)
    m = plan.masses
    # Simpson in the mass coordinate across each block
    vals = (np.exp(phi_lo / N) + 4.0 * np.exp(phi_mid / N) + np.exp(phi_hi / N)) / 6.0
    return -float(np.sum(m * rho ** (-1.0 / N) * vals))
