"""Hamiltonians and their analytic vector fields.

Built-in energies:

* ``h1`` - kinetic energy of the left-invariant nil metric, equal to
  (a^2 + b^2 + c^2)/2 in the invariant frame momenta.
* ``h2`` - kinetic energy of the unit round sphere, |p|^2 / 2 on the
  embedded constraint set, or (pr^2 + pphi^2 / (4 pi^2 sin^2 r))/2 in the
  polar chart.
* ``h1_variant`` - the conformally scaled energy (2 + sin 2 pi y) * h1.
* ``h_product`` - h1 + h2 on the product.
* ``h_reduced`` - kinetic energy of the reduced metric for a fibre profile:
  (A^2 + B^2 + pr^2 + ps^2 / v(r))/2 with A = px - y ps / 2,
  B = py + x ps / 2.

Fibre profiles fix the coefficient v(r) of the reduced metric's fibre term:
the submersion profile v = w^2/(1+w^2) with w = 2 pi sin r, or a u-profile
v = u(r)^2 where u vanishes at both poles with slopes +-2 pi.

All vector fields are analytic closed forms (no numerical differentiation);
the independent finite-difference route lives in :mod:`nilsphere.invariants`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .heisenberg import NilCotangent, frame_momenta
from .reduction import ProductState, ReducedState
from .sphere import TWO_PI, SphereCotangent, SpherePolar

__all__ = [
    "FiberProfile",
    "submersion_profile",
    "u_sin_profile",
    "u_sin_cubed_profile",
    "custom_u_profile",
    "builtin_profile",
    "fiber_coefficient",
    "h1",
    "h2",
    "h1_variant",
    "h_product",
    "h_reduced",
    "vector_field",
]

PROFILE_SUBMERSION = 0
PROFILE_U_SIN = 1
PROFILE_U_SIN_CUBED = 2
PROFILE_CUSTOM = -1


@dataclass(frozen=True)
class FiberProfile:
    """Fibre coefficient of the reduced metric.

    ``code`` selects a compiled closed form (custom profiles run only on the
    plain-Python integration path).
    """

    kind: str
    name: str
    code: int
    u: Optional[Callable[[float], float]] = field(default=None, repr=False)
    du: Optional[Callable[[float], float]] = field(default=None, repr=False)

    def v(self, r: float) -> float:
        return fiber_coefficient(self, r)

    def dv(self, r: float) -> float:
        """d/dr of the fibre coefficient."""
        if self.code == PROFILE_SUBMERSION:
            w = TWO_PI * math.sin(r)
            dw = TWO_PI * math.cos(r)
            return 2.0 * w * dw / (1.0 + w * w) ** 2
        if self.code == PROFILE_U_SIN:
            u = TWO_PI * math.sin(r)
            du = TWO_PI * math.cos(r)
            return 2.0 * u * du
        if self.code == PROFILE_U_SIN_CUBED:
            sr, cr = math.sin(r), math.cos(r)
            u = TWO_PI * sr + sr**3
            du = TWO_PI * cr + 3.0 * sr * sr * cr
            return 2.0 * u * du
        return 2.0 * self.u(r) * self.du(r)

    def d2v(self, r: float, h: float = 1e-6) -> float:
        """Second derivative of v; finite difference of dv for custom profiles.

        Used only to assemble Newton Jacobians, never in the vector field.
        """
        if self.code == PROFILE_CUSTOM:
            return (self.dv(r + h) - self.dv(r - h)) / (2.0 * h)
        return _d2v_closed(self.code, r)


def _d2v_closed(code: int, r: float) -> float:
    sr, cr = math.sin(r), math.cos(r)
    if code == PROFILE_SUBMERSION:
        w = TWO_PI * sr
        dw = TWO_PI * cr
        d2w = -TWO_PI * sr
        q = 1.0 + w * w
        return 2.0 * ((dw * dw + w * d2w) / q**2 - 4.0 * w * w * dw * dw / q**3)
    if code == PROFILE_U_SIN:
        u = TWO_PI * sr
        du = TWO_PI * cr
        d2u = -TWO_PI * sr
        return 2.0 * (du * du + u * d2u)
    if code == PROFILE_U_SIN_CUBED:
        u = TWO_PI * sr + sr**3
        du = TWO_PI * cr + 3.0 * sr * sr * cr
        d2u = -TWO_PI * sr + 6.0 * sr * cr * cr - 3.0 * sr**3
        return 2.0 * (du * du + u * d2u)
    raise ValueError(f"no closed-form second derivative for profile code {code}")


def submersion_profile() -> FiberProfile:
    """v(r) = w^2/(1 + w^2), w = 2 pi sin r: the Riemannian-submersion metric."""
    return FiberProfile(kind="submersion", name="submersion", code=PROFILE_SUBMERSION)


def u_sin_profile() -> FiberProfile:
    """u(r) = 2 pi sin r."""
    return FiberProfile(
        kind="u-profile",
        name="u-sin",
        code=PROFILE_U_SIN,
        u=lambda r: TWO_PI * math.sin(r),
        du=lambda r: TWO_PI * math.cos(r),
    )


def u_sin_cubed_profile() -> FiberProfile:
    """u(r) = 2 pi sin r + sin^3 r."""
    return FiberProfile(
        kind="u-profile",
        name="u-sin-cubed",
        code=PROFILE_U_SIN_CUBED,
        u=lambda r: TWO_PI * math.sin(r) + math.sin(r) ** 3,
        du=lambda r: TWO_PI * math.cos(r) + 3.0 * math.sin(r) ** 2 * math.cos(r),
    )


_BUILTIN_PROFILES = {
    "submersion": submersion_profile,
    "u-sin": u_sin_profile,
    "u-sin-cubed": u_sin_cubed_profile,
}


def builtin_profile(name: str) -> FiberProfile:
    try:
        return _BUILTIN_PROFILES[name]()
    except KeyError:
        raise ValueError(
            f"unknown profile {name!r}; built-ins: {sorted(_BUILTIN_PROFILES)}"
        ) from None


def custom_u_profile(name, u, du, endpoint_tol: float = 1e-4) -> FiberProfile:
    """Wrap a user-supplied (u, u') pair, validating the endpoint behavior.

    Requires u(0) = u(pi) = 0 and endpoint slopes +2 pi and -2 pi, checked by
    one-sided differences.
    """
    h = 1e-6
    if abs(u(0.0)) > 1e-8 or abs(u(math.pi)) > 1e-8:
        raise DomainError("u must vanish at r = 0 and r = pi")
    slope0 = (u(h) - u(0.0)) / h
    slope_pi = (u(math.pi) - u(math.pi - h)) / h
    if abs(slope0 - TWO_PI) > endpoint_tol or abs(slope_pi + TWO_PI) > endpoint_tol:
        raise DomainError(
            "u must have one-sided slopes +2*pi at r=0 and -2*pi at r=pi "
            f"(measured {slope0:.6f}, {slope_pi:.6f})"
        )
    return FiberProfile(kind="u-profile", name=name, code=PROFILE_CUSTOM, u=u, du=du)


def fiber_coefficient(profile: FiberProfile, r: float) -> float:
    """Coefficient v(r) of the fibre term of the reduced metric."""
    if not 0.0 < r < math.pi:
        raise DomainError(
            f"colatitude r={r:.6g} outside the chart interval (0, pi)"
        )
    if profile.code == PROFILE_SUBMERSION:
        w2 = (TWO_PI * math.sin(r)) ** 2
        return w2 / (1.0 + w2)
    if profile.code == PROFILE_U_SIN:
        return (TWO_PI * math.sin(r)) ** 2
    if profile.code == PROFILE_U_SIN_CUBED:
        return (TWO_PI * math.sin(r) + math.sin(r) ** 3) ** 2
    return profile.u(r) ** 2


# ---------------------------------------------------------------------------
# energies


def h1(state: NilCotangent, k: int = 1) -> float:
    """Nil kinetic energy (a^2 + b^2 + c^2)/2."""
    a, b, c = frame_momenta(state, k)
    return 0.5 * (a * a + b * b + c * c)


def h2(state) -> float:
    """Sphere kinetic energy; accepts an embedded or a polar-chart state."""
    if isinstance(state, SphereCotangent):
        return 0.5 * float(state.p @ state.p)
    if isinstance(state, SpherePolar):
        w = TWO_PI * math.sin(state.r)
        return 0.5 * (state.pr**2 + state.pphi**2 / (w * w))
    raise TypeError("h2 expects SphereCotangent or SpherePolar")


def h1_variant(state: NilCotangent, k: int = 1) -> float:
    """(2 + sin 2 pi y) * h1: same c-level sets, reshaped flow."""
    return (2.0 + math.sin(TWO_PI * state.y)) * h1(state, k)


def h_product(state: ProductState, k: int = 1) -> float:
    return h1(state.nil, k) + h2(state.sphere)


def h_reduced(state: ReducedState, profile: FiberProfile) -> float:
    """Reduced kinetic energy (A^2 + B^2 + pr^2 + ps^2/v(r))/2."""
    A = state.px - 0.5 * state.y * state.ps
    B = state.py + 0.5 * state.x * state.ps
    v = fiber_coefficient(profile, state.r)
    return 0.5 * (A * A + B * B + state.pr**2 + state.ps**2 / v)


# ---------------------------------------------------------------------------
# reduced metric and its adapted frame


def reduced_cometric(profile: FiberProfile, x: float, y: float, r: float) -> np.ndarray:
    """Cometric matrix of the reduced energy in (px, py, pr, ps)."""
    v = fiber_coefficient(profile, r)
    return np.array(
        [
            [1.0, 0.0, 0.0, -0.5 * y],
            [0.0, 1.0, 0.0, 0.5 * x],
            [0.0, 0.0, 1.0, 0.0],
            [-0.5 * y, 0.5 * x, 0.0, 0.25 * (x * x + y * y) + 1.0 / v],
        ]
    )


def reduced_metric(profile: FiberProfile, x: float, y: float, r: float) -> np.ndarray:
    """Metric matrix on reduced chart velocities (inverse of the cometric)."""
    return np.linalg.inv(reduced_cometric(profile, x, y, r))


def frame_norm_report(
    profile: FiberProfile, x: float, y: float, r: float
) -> dict:
    """Metric norms of the adapted frame at one reduced configuration.

    The frame consists of the three horizontal fields (unit-norm by
    construction of the reduced metric) and the fibre direction, whose norm
    is sqrt(v(r)).  Everything is computed through the inverted metric
    matrix rather than closed forms, so this doubles as an independent check
    on the reduced-energy coefficients.
    """
    M = reduced_metric(profile, x, y, r)
    frame = np.array(
        [
            [1.0, 0.0, 0.0, -0.5 * y],
            [0.0, 1.0, 0.0, 0.5 * x],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    gram = frame @ M @ frame.T
    norms = np.sqrt(np.diag(gram))
    off = gram - np.diag(np.diag(gram))
    return {
        "X": float(norms[0]),
        "Y": float(norms[1]),
        "R": float(norms[2]),
        "S": float(norms[3]),
        "S_expected": math.sqrt(fiber_coefficient(profile, r)),
        "max_cross": float(np.max(np.abs(off))),
    }


# ---------------------------------------------------------------------------
# analytic vector fields


def _field_h1(u: np.ndarray, k: int) -> np.ndarray:
    x, y, _z, px, py, pz = u
    a = px - 0.5 * k * y * pz
    b = py + 0.5 * k * x * pz
    c = pz
    return np.array(
        [
            a,
            b,
            c + 0.5 * k * (x * b - y * a),
            -0.5 * k * pz * b,
            0.5 * k * pz * a,
            0.0,
        ]
    )


def _field_h1_variant(u: np.ndarray, k: int) -> np.ndarray:
    x, y, _z, px, py, pz = u
    a = px - 0.5 * k * y * pz
    b = py + 0.5 * k * x * pz
    c = pz
    m = 2.0 + math.sin(TWO_PI * y)
    dm = TWO_PI * math.cos(TWO_PI * y)
    e = 0.5 * (a * a + b * b + c * c)
    return np.array(
        [
            m * a,
            m * b,
            m * (c + 0.5 * k * (x * b - y * a)),
            -m * 0.5 * k * pz * b,
            -dm * e + m * 0.5 * k * pz * a,
            0.0,
        ]
    )


def _field_h2_embedded(u: np.ndarray) -> np.ndarray:
    xi, p = u[:3], u[3:6]
    return np.concatenate([p, -(p @ p) * xi])


def _field_h_reduced(u: np.ndarray, profile: FiberProfile) -> np.ndarray:
    x, y, r, _s, px, py, pr, ps = u
    A = px - 0.5 * y * ps
    B = py + 0.5 * x * ps
    v = fiber_coefficient(profile, r)
    dv = profile.dv(r)
    return np.array(
        [
            A,
            B,
            pr,
            -0.5 * y * A + 0.5 * x * B + ps / v,
            -0.5 * ps * B,
            0.5 * ps * A,
            0.5 * ps * ps * dv / (v * v),
            0.0,
        ]
    )


def vector_field(
    hamiltonian: str,
    state,
    k: int = 1,
    profile: Optional[FiberProfile] = None,
) -> np.ndarray:
    """Hamiltonian vector field as a flat phase-velocity array.

    ``hamiltonian`` is one of ``H1``, ``H1_variant``, ``H2``, ``H_product``,
    ``H_reduced``.  The sphere field is the constrained field tangent to
    {|xi| = 1, <xi, p> = 0}; chart fields are canonical (dq/dt, dp/dt).
    """
    if hamiltonian == "H1":
        return _field_h1(state.as_array(), k)
    if hamiltonian == "H1_variant":
        return _field_h1_variant(state.as_array(), k)
    if hamiltonian == "H2":
        return _field_h2_embedded(state.as_array())
    if hamiltonian == "H_product":
        u = state.as_array()
        return np.concatenate([_field_h1(u[:6], k), _field_h2_embedded(u[6:12])])
    if hamiltonian == "H_reduced":
        if profile is None:
            raise ValueError("H_reduced requires a fibre profile")
        return _field_h_reduced(state.as_array(), profile)
    raise ValueError(f"unknown hamiltonian {hamiltonian!r}")
