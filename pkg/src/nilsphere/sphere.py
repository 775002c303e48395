"""Round 2-sphere cotangent layer: embedded states and the polar chart.

States are pairs (xi, p) of 3-vectors with |xi| = 1 and <xi, p> = 0; the
Euclidean pairing identifies tangent and cotangent vectors.  The polar chart
(r, phi) uses the polar angle r from the first coordinate axis and the
normalized azimuth phi (mod 1), in which the round metric reads
dr^2 + 4 pi^2 sin(r)^2 dphi^2 and the generator of rotation about the first
axis is (1/2pi) d/dphi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PoleProximity

__all__ = [
    "SphereCotangent",
    "SpherePolar",
    "DELTA_POLE",
    "TWO_PI",
    "rotation_generator",
    "angular_momentum_about_axis",
    "polar_from_embedded",
    "embedded_from_polar",
]

TWO_PI = 2.0 * math.pi

#: Polar-chart exclusion margin around r = 0 and r = pi, in radians.
DELTA_POLE = 1e-3

_CONSTRAINT_TOL = 1e-10


@dataclass(frozen=True)
class SphereCotangent:
    """Embedded cotangent state on the unit sphere.

    Validates the constraints | |xi| - 1 | <= 1e-10 and |<xi, p>| <= 1e-10
    at construction.
    """

    xi: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if xi.shape != (3,) or p.shape != (3,):
            raise ValueError("xi and p must be 3-vectors")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "p", p)
        if abs(np.linalg.norm(xi) - 1.0) > _CONSTRAINT_TOL:
            raise DomainError("base point is not on the unit sphere")
        if abs(float(xi @ p)) > _CONSTRAINT_TOL:
            raise DomainError("momentum is not tangent to the sphere")

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.xi, self.p])

    @staticmethod
    def from_array(u) -> "SphereCotangent":
        u = np.asarray(u, dtype=float)
        return SphereCotangent(u[:3].copy(), u[3:6].copy())


@dataclass(frozen=True)
class SpherePolar:
    """Polar-chart cotangent state: r in (0, pi), phi mod 1, momenta (pr, pphi)."""

    r: float
    phi: float
    pr: float
    pphi: float


def rotation_generator(axis: int) -> np.ndarray:
    """Matrix of the infinitesimal rotation v -> e_axis x v (axis in {1,2,3})."""
    if axis not in (1, 2, 3):
        raise ValueError("axis must be 1, 2, or 3")
    e = np.zeros(3)
    e[axis - 1] = 1.0
    m = np.zeros((3, 3))
    m[1, 0], m[0, 1] = e[2], -e[2]
    m[0, 2], m[2, 0] = e[1], -e[1]
    m[2, 1], m[1, 2] = e[0], -e[0]
    return m


def angular_momentum_about_axis(state: SphereCotangent, axis: int = 1) -> float:
    """<p, e_axis x xi>: momentum of the unit-angular-speed rotation flow."""
    e = np.zeros(3)
    e[axis - 1] = 1.0
    return float(state.p @ np.cross(e, state.xi))


def _check_pole(r: float, delta_pole: float) -> None:
    if not (delta_pole <= r <= math.pi - delta_pole):
        raise PoleProximity(
            f"polar angle r={r:.6g} within {delta_pole:.3g} of a chart pole"
        )


def polar_from_embedded(state: SphereCotangent, delta_pole: float = DELTA_POLE) -> SpherePolar:
    """Polar-chart coordinates and canonical momenta of an embedded state.

    Raises :class:`PoleProximity` when the base point lies within
    ``delta_pole`` of either chart pole.
    """
    xi, p = state.xi, state.p
    r = math.acos(min(1.0, max(-1.0, float(xi[0]))))
    _check_pole(r, delta_pole)
    phi = (math.atan2(float(xi[2]), float(xi[1])) / TWO_PI) % 1.0
    cphi, sphi = math.cos(TWO_PI * phi), math.sin(TWO_PI * phi)
    e_r = np.array([-math.sin(r), math.cos(r) * cphi, math.cos(r) * sphi])
    dxi_dphi = TWO_PI * math.sin(r) * np.array([0.0, -sphi, cphi])
    return SpherePolar(r=r, phi=phi, pr=float(p @ e_r), pphi=float(p @ dxi_dphi))


def embedded_from_polar(polar: SpherePolar, delta_pole: float = DELTA_POLE) -> SphereCotangent:
    """Inverse chart map; raises :class:`PoleProximity` outside the chart."""
    r = float(polar.r)
    _check_pole(r, delta_pole)
    phi = float(polar.phi) % 1.0
    cphi, sphi = math.cos(TWO_PI * phi), math.sin(TWO_PI * phi)
    sr, cr = math.sin(r), math.cos(r)
    xi = np.array([cr, sr * cphi, sr * sphi])
    e_r = np.array([-sr, cr * cphi, cr * sphi])
    e_phi = np.array([0.0, -sphi, cphi])
    p = polar.pr * e_r + (polar.pphi / (TWO_PI * sr)) * e_phi
    return SphereCotangent(xi, p)
