"""Heisenberg group layer: unipotent matrices, exp/log, lattice deck actions.

The configuration space is the compact quotient of the 3x3 upper-triangular
unipotent group by the lattice generated by three elements: a unit shear in
the (1,2) entry, a unit shear in the (2,3) entry, and a central shear of size
1/k in the (1,3) entry, where the integer k != 0 is the Euler number of the
associated circle bundle over the 2-torus.

Coordinates (x, y, z) are the coefficients of a group element's logarithm in
the basis formed by the logarithms of the three lattice generators.  In these
coordinates the generators act on the left by

    alpha: (x, y, z) -> (x + 1, y, z + (k/2) y)
    beta:  (x, y, z) -> (x, y + 1, z - (k/2) x)
    gamma: (x, y, z) -> (x, y, z + 1)

(exact in a 2-step nilpotent group, where the Baker-Campbell-Hausdorff series
terminates at the quadratic term).  Cotangent lifts transform the canonical
momenta so that the left-invariant frame momenta

    a = px - (k/2) y pz,   b = py + (k/2) x pz,   c = pz

are invariant under every deck transformation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NilElement",
    "NilCotangent",
    "nil_mul",
    "nil_inv",
    "nil_exp",
    "nil_log",
    "frame_momenta",
    "deck_action",
    "reduce_mod_lattice",
    "lattice_generator",
]


@dataclass(frozen=True)
class NilElement:
    """Unipotent upper-triangular 3x3 matrix, stored by its free entries."""

    m12: float
    m13: float
    m23: float

    def as_matrix(self) -> np.ndarray:
        return np.array(
            [[1.0, self.m12, self.m13], [0.0, 1.0, self.m23], [0.0, 0.0, 1.0]]
        )


@dataclass(frozen=True)
class NilCotangent:
    """Cotangent state in lattice-adapted coordinates, on the universal cover.

    Positions (x, y, z) are real (apply :func:`reduce_mod_lattice` for a
    fundamental-domain representative); (px, py, pz) are the conjugate
    canonical momenta.
    """

    x: float
    y: float
    z: float
    px: float
    py: float
    pz: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.px, self.py, self.pz])

    @staticmethod
    def from_array(u) -> "NilCotangent":
        x, y, z, px, py, pz = (float(v) for v in u)
        return NilCotangent(x, y, z, px, py, pz)


def nil_mul(g: NilElement, h: NilElement) -> NilElement:
    """Group product; closed form of the 3x3 matrix product."""
    return NilElement(
        m12=g.m12 + h.m12,
        m13=g.m13 + h.m13 + g.m12 * h.m23,
        m23=g.m23 + h.m23,
    )


def nil_inv(g: NilElement) -> NilElement:
    return NilElement(m12=-g.m12, m13=-g.m13 + g.m12 * g.m23, m23=-g.m23)


def _check_k(k: int) -> None:
    if k == 0:
        raise ValueError("Euler number k must be a nonzero integer")


def nil_exp(coords, k: int = 1) -> NilElement:
    """Exponential of x*log(alpha) + y*log(beta) + z*log(gamma).

    The series terminates at the quadratic term, so this is exact.
    """
    _check_k(k)
    x, y, z = (float(v) for v in coords)
    return NilElement(m12=x, m13=z / k + x * y / 2.0, m23=y)


def nil_log(g: NilElement, k: int = 1) -> np.ndarray:
    """Inverse of :func:`nil_exp`; exact."""
    _check_k(k)
    x, y = g.m12, g.m23
    z = k * (g.m13 - x * y / 2.0)
    return np.array([x, y, z])


def lattice_generator(name: str, k: int = 1) -> NilElement:
    _check_k(k)
    if name == "alpha":
        return NilElement(1.0, 0.0, 0.0)
    if name == "beta":
        return NilElement(0.0, 0.0, 1.0)
    if name == "gamma":
        return NilElement(0.0, 1.0 / k, 0.0)
    raise ValueError(f"unknown lattice generator {name!r}")


def frame_momenta(state: NilCotangent, k: int = 1):
    """Momenta (a, b, c) in the left-invariant orthonormal frame.

    These are constant along every deck transformation and satisfy the
    chart Poisson relations {a, b} = -k c, {a, c} = {b, c} = 0.
    """
    _check_k(k)
    a = state.px - 0.5 * k * state.y * state.pz
    b = state.py + 0.5 * k * state.x * state.pz
    c = state.pz
    return a, b, c


def deck_action(generator: str, state: NilCotangent, k: int = 1, power: int = 1) -> NilCotangent:
    """Cotangent lift of left multiplication by a lattice generator power.

    ``generator`` is one of ``"alpha"``, ``"beta"``, ``"gamma"``.  The
    position part follows the exact BCH formulas quoted in the module
    docstring; momenta transform so the canonical 1-form is preserved.
    """
    _check_k(k)
    n = float(power)
    x, y, z = state.x, state.y, state.z
    px, py, pz = state.px, state.py, state.pz
    if generator == "alpha":
        return NilCotangent(x + n, y, z + 0.5 * k * n * y, px, py - 0.5 * k * n * pz, pz)
    if generator == "beta":
        return NilCotangent(x, y + n, z - 0.5 * k * n * x, px + 0.5 * k * n * pz, py, pz)
    if generator == "gamma":
        return NilCotangent(x, y, z + n, px, py, pz)
    raise ValueError(f"unknown lattice generator {generator!r}")


def reduce_mod_lattice(state: NilCotangent, k: int = 1) -> NilCotangent:
    """Fundamental-domain representative with (x, y, z) in [0, 1)^3.

    Applies integer powers of the three deck actions in the order alpha,
    beta, gamma.  Idempotent, and exact apart from float rounding of the
    coordinate shifts.
    """
    _check_k(k)
    s = deck_action("alpha", state, k, power=-math.floor(state.x))
    s = deck_action("beta", s, k, power=-math.floor(s.y))
    s = deck_action("gamma", s, k, power=-math.floor(s.z))
    return s
