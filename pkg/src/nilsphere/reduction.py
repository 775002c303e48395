"""Product phase space and its circle reduction.

The product carries the anti-diagonal circle action that shifts the nil fibre
coordinate z and the sphere azimuth phi (both mod 1 downstairs) in opposite
senses.  Its momentum map in canonical chart momenta is pz - pphi; on the
zero level the quotient is the cotangent bundle of the reduced space, charted
here by (x, y, r, s) with s = z + phi and canonical momenta (px, py, pr, ps),
where ps equals the common value pz = pphi.

The energy identity h_reduced(reduce(P)) = H1(P) + H2(P) holds exactly on the
zero level; it is enforced to 1e-9 by the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NotHorizontal
from .heisenberg import NilCotangent
from .sphere import (
    DELTA_POLE,
    SphereCotangent,
    SpherePolar,
    embedded_from_polar,
    polar_from_embedded,
)

__all__ = [
    "ProductState",
    "ReducedState",
    "TOL_HORIZONTAL",
    "horizontality_defect",
    "reduced_from_product",
    "product_from_reduced",
]

#: Default tolerance on |pz - pphi| for accepting a state as horizontal.
TOL_HORIZONTAL = 1e-9


@dataclass(frozen=True)
class ProductState:
    """Pair of a nil cotangent state and an embedded sphere cotangent state."""

    nil: NilCotangent
    sphere: SphereCotangent

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.nil.as_array(), self.sphere.as_array()])

    @staticmethod
    def from_array(u) -> "ProductState":
        u = np.asarray(u, dtype=float)
        return ProductState(
            nil=NilCotangent.from_array(u[:6]),
            sphere=SphereCotangent.from_array(u[6:12]),
        )


@dataclass(frozen=True)
class ReducedState:
    """Chart point on the cover of the reduced space.

    x, y are unbounded reals (lattice-unwrapped); r in (0, pi); s is kept as
    an unwrapped real and is an angle mod 1 downstairs.
    """

    x: float
    y: float
    r: float
    s: float
    px: float
    py: float
    pr: float
    ps: float

    def __post_init__(self):
        values = (
            self.x, self.y, self.r, self.s,
            self.px, self.py, self.pr, self.ps,
        )
        if not all(np.isfinite(v) for v in values):
            raise DomainError("reduced state must be finite")
        if not 0.0 < self.r < np.pi:
            raise DomainError("colatitude r must lie in (0, pi)")

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.x, self.y, self.r, self.s, self.px, self.py, self.pr, self.ps]
        )

    @staticmethod
    def from_array(u) -> "ReducedState":
        vals = [float(v) for v in np.asarray(u, dtype=float)]
        return ReducedState(*vals)


def horizontality_defect(state: ProductState, delta_pole: float = DELTA_POLE) -> float:
    """pz - pphi: the anti-diagonal momentum, zero exactly on horizontal states."""
    polar = polar_from_embedded(state.sphere, delta_pole)
    return state.nil.pz - polar.pphi


def reduced_from_product(
    state: ProductState,
    tol_horizontal: float = TOL_HORIZONTAL,
    delta_pole: float = DELTA_POLE,
) -> ReducedState:
    """Project a horizontal product state to the reduced chart.

    Raises :class:`NotHorizontal` when |pz - pphi| exceeds ``tol_horizontal``,
    and :class:`PoleProximity` when the sphere factor sits too close to a
    chart pole.
    """
    polar = polar_from_embedded(state.sphere, delta_pole)
    defect = state.nil.pz - polar.pphi
    if abs(defect) > tol_horizontal:
        raise NotHorizontal(
            f"|pz - pphi| = {abs(defect):.3e} exceeds tolerance {tol_horizontal:.3e}"
        )
    nil = state.nil
    return ReducedState(
        x=nil.x,
        y=nil.y,
        r=polar.r,
        s=nil.z + polar.phi,
        px=nil.px,
        py=nil.py,
        pr=polar.pr,
        ps=nil.pz,
    )


def product_from_reduced(
    state: ReducedState, delta_pole: float = DELTA_POLE
) -> ProductState:
    """Horizontal lift with the gauge choice z = 0, phi = s.

    Projecting the result with :func:`reduced_from_product` recovers the input
    up to reduction of s mod 1.
    """
    sphere = embedded_from_polar(
        SpherePolar(r=state.r, phi=state.s % 1.0, pr=state.pr, pphi=state.ps),
        delta_pole,
    )
    nil = NilCotangent(
        x=state.x, y=state.y, z=0.0, px=state.px, py=state.py, pz=state.ps
    )
    return ProductState(nil=nil, sphere=sphere)
