"""Structure-preserving time integration for each built-in system.

Schemes
-------
``exact-sphere``
    Closed-form great-circle motion for the round-sphere factor.
``euler-arnold-nil``
    Closed-form rotation of the frame momenta (a, b) at rate k*c with exact
    reconstruction of x, y and a symmetric midpoint quadrature for z; c, the
    transverse momenta, and every function of (a, b, c, x, y) that the flow
    preserves are conserved to roundoff.
``implicit-midpoint-chart``
    Implicit midpoint rule (symplectic, order 2) on a chart: the reduced
    8-dimensional chart for ``H_reduced``, or the nil chart for the
    conformally scaled energy ``H1_variant``.
``split-product``
    Product flow integrating both factors by their closed forms; exactly
    preserves the factor energies and momentum maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError, NewtonDivergence, PoleProximity
from .hamiltonians import FiberProfile, submersion_profile
from .heisenberg import NilCotangent
from .reduction import ProductState, ReducedState
from .sphere import SphereCotangent

SCHEMES = (
    "exact-sphere",
    "euler-arnold-nil",
    "implicit-midpoint-chart",
    "split-product",
)

_SCHEME_SYSTEMS = {
    "exact-sphere": ("H2",),
    "euler-arnold-nil": ("H1",),
    "implicit-midpoint-chart": ("H_reduced", "H1_variant"),
    "split-product": ("H_product",),
}

_MACHINE_EPS = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_max: float = 10.0
    scheme: str = "split-product"
    newton_tol: float = 1e-12
    newton_max_iter: int = 25
    sample_stride: int = 1
    delta_pole: float = 1e-3

    def __post_init__(self):
        if not (self.dt > 0.0):
            raise ConfigError("dt must be positive")
        if not (self.t_max > 0.0):
            raise ConfigError("t_max must be positive")
        if self.scheme not in SCHEMES:
            raise ConfigError(
                f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}"
            )
        if self.newton_tol < 10.0 * _MACHINE_EPS:
            raise ConfigError("newton_tol must be at least 10x machine epsilon")
        if self.newton_max_iter < 1:
            raise ConfigError("newton_max_iter must be a positive integer")
        if int(self.sample_stride) != self.sample_stride or self.sample_stride < 1:
            raise ConfigError("sample_stride must be a positive integer")

    def n_samples(self) -> int:
        # small relative guard so that exact-ratio inputs such as t_max=0.7,
        # dt=1e-3 are not floored one sample short by binary roundoff
        ratio = self.t_max / self.dt / self.sample_stride
        return int(math.floor(ratio * (1.0 + 1e-12) + 1e-9)) + 1


@dataclass
class Trajectory:
    """Sampled states with per-sample diagnostics."""

    times: np.ndarray
    states: np.ndarray
    system: str
    kind: str  # "nil" | "sphere" | "product" | "reduced"
    k: int = 1
    profile_name: str | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return len(self.times)

    def state_at(self, i: int):
        row = self.states[i]
        if self.kind == "nil":
            return NilCotangent.from_array(row)
        if self.kind == "sphere":
            return SphereCotangent(row[:3], row[3:6])
        if self.kind == "product":
            return ProductState.from_array(row)
        return ReducedState.from_array(row)

    @property
    def final_state(self):
        return self.state_at(self.n_samples - 1)


# ---------------------------------------------------------------------------
# one-step maps


def step_sphere_exact(state: SphereCotangent, dt: float) -> SphereCotangent:
    """Advance the great-circle flow by dt in closed form."""
    u = np.concatenate([state.xi, state.p])
    out = _kernels.sphere_exact_traj(u, dt, 1, 2)
    return SphereCotangent(out[1, :3], out[1, 3:6])


def step_nil_euler(state: NilCotangent, dt: float, k: int = 1) -> NilCotangent:
    """Advance the left-invariant nil flow by dt.

    The frame momenta rotate in closed form; x and y are reconstructed by the
    exact integral of that rotation, and z by a symmetric midpoint quadrature
    of its reconstruction equation.  c is conserved exactly.
    """
    out = _kernels.nil_closed_traj(state.as_array(), float(k), dt, 1, 2)
    return NilCotangent.from_array(out[1])


def step_chart_midpoint(
    hamiltonian: str,
    state,
    dt: float,
    cfg: IntegratorConfig | None = None,
    k: int = 1,
    profile: FiberProfile | None = None,
):
    """One implicit-midpoint step of a chart Hamiltonian system.

    ``hamiltonian`` is ``"H_reduced"`` (state: ReducedState) or
    ``"H1_variant"`` (state: NilCotangent).
    """
    if cfg is None:
        cfg = IntegratorConfig(dt=dt, scheme="implicit-midpoint-chart")
    if hamiltonian == "H_reduced":
        if not isinstance(state, ReducedState):
            raise ConfigError("H_reduced integration requires a ReducedState")
        prof = profile if profile is not None else submersion_profile()
        u, status = _kernels._midpoint_step_reduced(
            state.as_array(),
            prof.code,
            dt,
            cfg.newton_tol,
            cfg.newton_max_iter,
            cfg.delta_pole,
        )
        if status == _kernels.STATUS_POLE:
            raise PoleProximity(
                "midpoint left the polar chart margin; step rejected"
            )
        if status == _kernels.STATUS_NEWTON:
            raise NewtonDivergence(
                f"Newton iteration did not reach {cfg.newton_tol:g} "
                f"within {cfg.newton_max_iter} iterations"
            )
        return ReducedState.from_array(u)
    if hamiltonian == "H1_variant":
        if not isinstance(state, NilCotangent):
            raise ConfigError("H1_variant integration requires a NilCotangent")
        out, status, _ = _kernels.midpoint_variant_traj(
            state.as_array(),
            float(k),
            dt,
            1,
            2,
            cfg.newton_tol,
            cfg.newton_max_iter,
        )
        if status != _kernels.STATUS_OK:
            raise NewtonDivergence(
                f"Newton iteration did not reach {cfg.newton_tol:g} "
                f"within {cfg.newton_max_iter} iterations"
            )
        return NilCotangent.from_array(out[1])
    raise ConfigError(
        "step_chart_midpoint supports hamiltonian 'H_reduced' or 'H1_variant'"
    )


def step_product_split(state: ProductState, dt: float, k: int = 1) -> ProductState:
    """One split step of the product flow (both factors in closed form)."""
    out = _kernels.split_product_traj(state.as_array(), float(k), dt, 1, 2)
    return ProductState.from_array(out[1])


# ---------------------------------------------------------------------------
# trajectory integration


def _initial_array(system: str, initial) -> tuple[np.ndarray, str]:
    if system == "H1":
        if not isinstance(initial, NilCotangent):
            raise ConfigError("system H1 requires a NilCotangent initial state")
        return initial.as_array(), "nil"
    if system == "H2":
        if not isinstance(initial, SphereCotangent):
            raise ConfigError("system H2 requires a SphereCotangent initial state")
        return np.concatenate([initial.xi, initial.p]), "sphere"
    if system == "H_product":
        if not isinstance(initial, ProductState):
            raise ConfigError("system H_product requires a ProductState initial state")
        return initial.as_array(), "product"
    if system == "H_reduced":
        if not isinstance(initial, ReducedState):
            raise ConfigError("system H_reduced requires a ReducedState initial state")
        return initial.as_array(), "reduced"
    if system == "H1_variant":
        if not isinstance(initial, NilCotangent):
            raise ConfigError(
                "system H1_variant requires a NilCotangent initial state"
            )
        return initial.as_array(), "nil"
    raise ConfigError(f"unknown system {system!r}")


def integrate(
    system: str,
    initial,
    cfg: IntegratorConfig,
    k: int = 1,
    profile: FiberProfile | None = None,
    track: list[str] | None = None,
) -> Trajectory:
    """Integrate ``system`` from ``initial`` under ``cfg``.

    Samples every ``cfg.sample_stride`` steps (initial state included) and
    attaches per-sample diagnostics: the system energy, constraint residuals
    for sphere-bearing systems, and the tracked integral values.  Chart-scheme
    failures are raised with the failure time attached.
    """
    if system not in _SCHEME_SYSTEMS[cfg.scheme]:
        raise ConfigError(
            f"scheme {cfg.scheme!r} does not integrate system {system!r}"
        )
    u0, kind = _initial_array(system, initial)
    n_samples = cfg.n_samples()
    stride = int(cfg.sample_stride)
    kf = float(k)

    if cfg.scheme == "euler-arnold-nil":
        states = _kernels.nil_closed_traj(u0, kf, cfg.dt, stride, n_samples)
    elif cfg.scheme == "exact-sphere":
        states = _kernels.sphere_exact_traj(u0, cfg.dt, stride, n_samples)
    elif cfg.scheme == "split-product":
        states = _kernels.split_product_traj(u0, kf, cfg.dt, stride, n_samples)
    else:  # implicit-midpoint-chart
        if system == "H_reduced":
            prof = profile if profile is not None else submersion_profile()
            states, status, fail_step = _kernels.midpoint_reduced_traj(
                u0,
                prof.code,
                cfg.dt,
                stride,
                n_samples,
                cfg.newton_tol,
                cfg.newton_max_iter,
                cfg.delta_pole,
            )
            if status == _kernels.STATUS_POLE:
                raise PoleProximity(
                    "midpoint left the polar chart margin; step rejected",
                    time=(fail_step + 1) * cfg.dt,
                )
        else:
            states, status, fail_step = _kernels.midpoint_variant_traj(
                u0,
                kf,
                cfg.dt,
                stride,
                n_samples,
                cfg.newton_tol,
                cfg.newton_max_iter,
            )
        if status == _kernels.STATUS_NEWTON:
            raise NewtonDivergence(
                "Newton iteration failed to converge",
                time=(fail_step + 1) * cfg.dt,
            )

    times = np.arange(n_samples) * (cfg.dt * stride)
    profile_name = None
    if system == "H_reduced":
        profile_name = (profile if profile is not None else submersion_profile()).name
    traj = Trajectory(
        times=times,
        states=states,
        system=system,
        kind=kind,
        k=k,
        profile_name=profile_name,
    )
    _attach_diagnostics(traj, profile, track)
    return traj


_DEFAULT_TRACK = {
    "H1": ["f1", "f2", "f3"],
    "H2": ["psi2"],
    "H_product": ["f1", "f2", "f3", "psi", "nu1", "nu2", "nu3", "H1", "H2"],
    "H_reduced": [],
    "H1_variant": ["f1", "f2"],
}


def _attach_diagnostics(traj: Trajectory, profile, track):
    # imported here: invariants imports this module's Trajectory for reports
    from .invariants import evaluate_energy_series, evaluate_series

    diag = {}
    diag["H"] = evaluate_energy_series(traj, profile)
    if traj.kind == "sphere":
        xi = traj.states[:, 0:3]
        p = traj.states[:, 3:6]
        diag["constraint_norm"] = np.abs(
            np.sqrt(np.sum(xi * xi, axis=1)) - 1.0
        )
        diag["constraint_tangency"] = np.abs(np.sum(xi * p, axis=1))
    elif traj.kind == "product":
        xi = traj.states[:, 6:9]
        p = traj.states[:, 9:12]
        diag["constraint_norm"] = np.abs(
            np.sqrt(np.sum(xi * xi, axis=1)) - 1.0
        )
        diag["constraint_tangency"] = np.abs(np.sum(xi * p, axis=1))
    tags = _DEFAULT_TRACK[traj.system] if track is None else list(track)
    for tag in tags:
        diag[tag] = evaluate_series(tag, traj)
    traj.diagnostics = diag
