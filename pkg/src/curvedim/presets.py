"""Named model spaces, drift families, and measure presets for scenarios.

Field families are closed-form presets with analytic Jacobians; scenario
files select them by name, so no code is ever executed from input files.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import UnsupportedSpace
from .fields import FieldSpec, zero_field
from .geometry import ModelSpace, circle, flat_torus2, interval, sphere2
from .warped import rotation_field

__all__ = ["make_space", "make_field", "bump_density", "random_bump_pair"]


def make_space(spec: dict) -> ModelSpace:
    kind = spec.get("kind", "interval").lower().replace("_", "-")
    if kind == "interval":
        return interval(float(spec.get("a", -4.0)), float(spec.get("b", 4.0)))
    if kind == "circle":
        return circle(float(spec.get("circumference", 2 * math.pi)))
    if kind == "sphere2":
        return sphere2(float(spec.get("radius", 1.0)))
    if kind in ("flat-torus2", "torus"):
        return flat_torus2(float(spec.get("l1", 2 * math.pi)),
                           float(spec.get("l2", 2 * math.pi)))
    raise UnsupportedSpace(f"unknown space kind {kind!r}")


def make_field(spec: dict, dim: int = 1) -> FieldSpec:
    family = spec.get("family", "zero").lower().replace("_", "-")
    if family == "zero":
        return zero_field(dim)
    if family in ("constant", "constant-drift"):
        c = float(spec.get("c", 1.0))
        return FieldSpec(lambda p: np.full_like(p, c), lambda p: np.zeros((1, 1)),
                         f"constant {c:g}")
    if family in ("ou", "ou-drift"):
        c = float(spec.get("c", 1.0))
        return FieldSpec(lambda p: -c * p, lambda p: -c * np.eye(1), f"ou {c:g}")
    if family in ("gradient", "gradient-of-v"):
        pot = spec.get("potential", "quadratic")
        a = float(spec.get("a", 1.0))
        if pot == "quadratic":
            # V = a x^2 / 2, drift Z = -grad V
            return FieldSpec(lambda p: -a * p, lambda p: -a * np.eye(1),
                             f"-grad quadratic {a:g}")
        if pot == "cosine":
            # V = a cos x
            return FieldSpec(lambda p: a * np.sin(p),
                             lambda p: a * np.cos(p)[..., None] * np.eye(1),
                             f"-grad cosine {a:g}")
        raise UnsupportedSpace(f"unknown potential {pot!r}")
    if family in ("rotation", "rotation-alpha"):
        return rotation_field(float(spec.get("alpha", 1.0)))
    raise UnsupportedSpace(f"unknown field family {family!r}")


def bump_density(center: float, radius: float, space: ModelSpace):
    """Smooth compactly supported cos^2 bump profile."""
    periodic = space.periodic[0]
    L = space.bounds[0][1] - space.bounds[0][0]

    def fn(p):
        d = np.abs(p[..., 0] - center)
        if periodic:
            d = d % L
            d = np.minimum(d, L - d)
        return np.where(d < radius, np.cos(0.5 * math.pi * d / radius) ** 2, 0.0)

    return fn


def random_bump_pair(space: ModelSpace, rng: np.random.Generator,
                     min_radius: float = 0.25, max_radius: float = 0.8):
    """Two random bump profiles with supports inside the chart."""
    lo, hi = space.bounds[0]
    span = hi - lo
    out = []
    for _ in range(2):
        r = rng.uniform(min_radius, max_radius) * span / 8.0
        if space.periodic[0]:
            c = rng.uniform(lo, hi)
        else:
            c = rng.uniform(lo + r + 0.05 * span, hi - r - 0.05 * span)
        out.append(bump_density(float(c), float(r), space))
    return out[0], out[1]
