"""Torus-fibration values, rotation vectors, recurrence, and Lyapunov bounds.

Everything here consumes trajectories or single states produced by the
integrators and reports plain data: conserved fibration components with their
differential rank, least-squares rotation frequencies with explicit
residuals, first-return times on the cover, and renormalized
largest-Lyapunov estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import (
    ConfigError,
    DomainError,
    NotHorizontal,
    NotOnRegularFiber,
)
from .invariants import (
    TWO_PI,
    _nil_series,
    _sphere_series,
    evaluate,
    evaluate_energy_series,
    evaluate_series,
    projected_rank,
)
from .reduction import ProductState, horizontality_defect

FIBRATION_KINDS = ("fprime1", "f1")

# regularity margin: each factor of the singular locus's defining product
# c * e1 * e2 must exceed this for a state to count as regular
SINGULAR_MARGIN = 0.1


@dataclass(frozen=True)
class FibrationValue:
    """Value of the invariant torus fibration at one horizontal state.

    ``fprime1`` has components (theta1 mod 1, theta2 mod 1, c, e2, e1);
    ``f1`` drops theta2.  e1 = 2*H1 - c^2 and e2 = 2*H2 - psi2^2 are the
    squared transverse momentum norms of the two factors; the state is
    regular exactly when c, e1, e2 are all nonzero.
    """

    kind: str
    theta1: float
    theta2: float | None
    c: float
    e2: float
    e1: float
    singular: bool = False

    def as_array(self) -> np.ndarray:
        if self.kind == "fprime1":
            return np.array([self.theta1, self.theta2, self.c, self.e2, self.e1])
        return np.array([self.theta1, self.c, self.e2, self.e1])


def fibration_value(
    kind: str,
    state: ProductState,
    k: int = 1,
    horizontal_tol: float = 1e-9,
    singular_margin: float = SINGULAR_MARGIN,
) -> FibrationValue:
    """Evaluate the 5-component (or 4-component) fibration at a state."""
    if kind not in FIBRATION_KINDS:
        raise ConfigError(f"unknown fibration kind {kind!r}")
    defect = horizontality_defect(state)
    if abs(defect) > horizontal_tol:
        raise NotHorizontal(
            f"fibration requires a horizontal state (defect {defect:.3g})"
        )
    from .heisenberg import frame_momenta

    a, b, c = frame_momenta(state.nil, k)
    if c == 0.0:
        raise DomainError("fibration angle components are undefined at c = 0")
    theta1 = (a / c + state.nil.y) % 1.0
    theta2 = (b / c - state.nil.x) % 1.0
    e1 = a * a + b * b
    psi2 = evaluate("psi2", state.sphere)
    e2 = 2.0 * evaluate("H2", state.sphere) - psi2 * psi2
    singular = (
        abs(c) <= singular_margin
        or e1 <= singular_margin
        or e2 <= singular_margin
    )
    if kind == "f1":
        return FibrationValue(
            kind=kind, theta1=theta1, theta2=None, c=c, e2=e2, e1=e1,
            singular=singular,
        )
    return FibrationValue(
        kind=kind, theta1=theta1, theta2=theta2, c=c, e2=e2, e1=e1,
        singular=singular,
    )


def fibration_series(kind: str, traj) -> dict[str, np.ndarray]:
    """Fibration components along a product trajectory.

    The angle components are returned unreduced (no mod 1): they are
    conserved as real numbers along the flow, which makes drift measurement
    wrap-free.
    """
    if kind not in FIBRATION_KINDS:
        raise ConfigError(f"unknown fibration kind {kind!r}")
    x, y, _, a, b, c = _nil_series(traj)
    if np.min(np.abs(c)) == 0.0:
        raise DomainError("fibration angle components are undefined at c = 0")
    xi, p = _sphere_series(traj)
    psi2 = xi[:, 1] * p[:, 2] - xi[:, 2] * p[:, 1]
    h2 = 0.5 * np.sum(p * p, axis=1)
    out = {
        "theta1": a / c + y,
        "c": c.copy(),
        "e2": 2.0 * h2 - psi2 * psi2,
        "e1": a * a + b * b,
    }
    if kind == "fprime1":
        out["theta2"] = b / c - x
    return out


def fibration_drift(kind: str, traj) -> dict[str, float]:
    """Max relative drift of each fibration component along a trajectory."""
    series = fibration_series(kind, traj)
    return {
        name: float(np.max(np.abs(vals - vals[0])) / max(1.0, abs(vals[0])))
        for name, vals in series.items()
    }


def rank_of_fibration(kind: str, state, h: float = 1e-5, k: int = 1) -> int:
    """Numerical rank of the fibration differential restricted to {psi = 0}."""
    if kind not in FIBRATION_KINDS:
        raise ConfigError(f"unknown fibration kind {kind!r}")
    kf = float(k)

    def _ab(chart):
        a = chart[5] - 0.5 * kf * chart[1] * chart[7]
        b = chart[6] + 0.5 * kf * chart[0] * chart[7]
        return a, b

    def g_theta1(chart):
        a, _ = _ab(chart)
        return a / chart[7] + chart[1]

    def g_theta2(chart):
        _, b = _ab(chart)
        return b / chart[7] - chart[0]

    def g_c(chart):
        return chart[7]

    def g_e2(chart):
        r, pr, pphi = chart[3], chart[8], chart[9]
        sr = math.sin(r)
        h2 = 0.5 * (pr * pr + (pphi * pphi) / (TWO_PI * TWO_PI * sr * sr))
        psi2 = pphi / TWO_PI
        return 2.0 * h2 - psi2 * psi2

    def g_e1(chart):
        a, b = _ab(chart)
        return a * a + b * b

    if kind == "fprime1":
        funcs = [g_theta1, g_theta2, g_c, g_e2, g_e1]
    else:
        funcs = [g_theta1, g_c, g_e2, g_e1]
    return projected_rank(funcs, state, h)


# ---------------------------------------------------------------------------
# rotation vectors


@dataclass
class RotationEstimate:
    """Least-squares angle frequencies with explicit fit residuals."""

    frequencies: dict[str, float]
    residuals: dict[str, float]
    window: float
    angles: list[str] = field(default_factory=list)

    def frequency_vector(self) -> np.ndarray:
        return np.array([self.frequencies[name] for name in self.angles])


_DEFAULT_ANGLES = {
    "product": ["x", "y", "s", "nil-phase", "sphere-phase"],
    "nil": ["x", "y", "nil-phase"],
    "sphere": ["phi", "sphere-phase"],
    "reduced": ["x", "y", "s"],
}

# maximum per-sample angle increment (in cycles) before aliasing is suspected
_UNWRAP_GUARD = 0.4


def _unwrap_cycles(raw_angle: np.ndarray) -> np.ndarray:
    return np.unwrap(raw_angle) / TWO_PI


def _angle_series(traj, name: str) -> np.ndarray:
    kind = traj.kind
    if name == "x" or name == "y":
        if kind in ("nil", "product", "reduced"):
            return traj.states[:, 0 if name == "x" else 1].copy()
    if name == "s" and kind == "reduced":
        return traj.states[:, 3].copy()
    if name == "nil-phase" and kind in ("nil", "product"):
        _, _, _, a, b, _ = _nil_series(traj)
        return _unwrap_cycles(np.arctan2(b, a))
    if kind in ("sphere", "product"):
        xi, p = _sphere_series(traj)
        if name == "phi":
            return _unwrap_cycles(np.arctan2(xi[:, 2], xi[:, 1]))
        if name == "sphere-phase":
            e1v = xi[0] / np.linalg.norm(xi[0])
            p0 = p[0]
            nrm = np.linalg.norm(p0)
            if nrm == 0.0:
                return np.zeros(len(xi))
            e2v = p0 / nrm
            return _unwrap_cycles(
                np.arctan2(xi @ e2v, xi @ e1v)
            )
        if name == "s" and kind == "product":
            z = traj.states[:, 2]
            phi = _unwrap_cycles(np.arctan2(xi[:, 2], xi[:, 1]))
            return z + phi
    raise ConfigError(
        f"angle observable {name!r} is not defined for a {kind!r} trajectory"
    )


_FIBER_CHECK_TAGS = {
    "product": ["f1", "H1", "H2", "psi2"],
    "nil": ["f1", "H1"],
    "sphere": ["H2", "psi2"],
}


def _require_single_fiber(traj, tol: float) -> None:
    if traj.kind == "reduced":
        h = evaluate_energy_series(traj, None)
        ps = traj.states[:, 7]
        worst = max(
            float(np.max(np.abs(h - h[0])) / max(1.0, abs(h[0]))),
            float(np.max(np.abs(ps - ps[0]))),
        )
    else:
        worst = 0.0
        for tag in _FIBER_CHECK_TAGS[traj.kind]:
            series = evaluate_series(tag, traj)
            drift = float(
                np.max(np.abs(series - series[0])) / max(1.0, abs(series[0]))
            )
            worst = max(worst, drift)
    if worst > tol:
        raise NotOnRegularFiber(
            f"conserved-quantity drift {worst:.3g} exceeds {tol:.3g}; "
            "trajectory is not confined to a single fiber"
        )


def rotation_vector(
    traj,
    angles: list[str] | None = None,
    fiber_tol: float = 1e-6,
) -> RotationEstimate:
    """Least-squares rotation frequencies of the tracked angle observables.

    The phase observables (``nil-phase``, ``sphere-phase``) wind linearly on
    a fiber and fit with tiny residuals; coordinate observables (``x``,
    ``y``, ``s``, ``phi``) carry a bounded oscillation on top of their linear
    winding, which shows up in the reported residual, never hidden.
    """
    if traj.n_samples < 3:
        raise ConfigError("rotation estimation needs at least 3 samples")
    _require_single_fiber(traj, fiber_tol)
    names = _DEFAULT_ANGLES[traj.kind] if angles is None else list(angles)
    t = traj.times
    freqs = {}
    residuals = {}
    for name in names:
        series = _angle_series(traj, name)
        step_max = float(np.max(np.abs(np.diff(series))))
        if step_max >= _UNWRAP_GUARD:
            raise ConfigError(
                f"angle {name!r} advances {step_max:.3f} cycles per sample; "
                "decrease dt * sample_stride below the unwrap guard"
            )
        slope, intercept = np.polyfit(t, series, 1)
        fit = slope * t + intercept
        freqs[name] = float(slope)
        residuals[name] = float(np.max(np.abs(series - fit)))
    return RotationEstimate(
        frequencies=freqs,
        residuals=residuals,
        window=float(t[-1] - t[0]),
        angles=names,
    )


# ---------------------------------------------------------------------------
# recurrence on the cover


def recurrence_stat(
    initial,
    eps_values=(0.5, 0.2, 0.1),
    dt: float = 1e-3,
    t_max: float = 1e4,
    k: int = 1,
) -> dict:
    """Forward and backward first-return times to a chart ball on the cover.

    ``initial`` is a ProductState (or a trajectory, whose initial state is
    used).  Distances are Euclidean in the cover chart
    (x, y, r, s mod 1, px, py, pr, ps) with the s-difference wrapped; the
    orbit must first leave the ball before a return counts.  Absence of a
    return within ``t_max`` is reported as None, not an error.
    """
    if hasattr(initial, "state_at"):
        state = initial.state_at(0)
        k = initial.k
    else:
        state = initial
    if not isinstance(state, ProductState):
        raise ConfigError("recurrence_stat requires a product (cover) state")
    if abs(state.nil.pz) < 0.1:
        raise DomainError(
            "recurrence statistics require |c| >= 0.1 (compact-fiber regime)"
        )
    u0 = state.as_array()
    n_max = int(round(t_max / dt))
    table = []
    for eps in eps_values:
        row = {"eps": float(eps)}
        fwd = _kernels.recurrence_search(u0, float(k), dt, n_max, float(eps), 0)
        row["forward_time"] = None if fwd < 0 else fwd * dt
        rev = u0.copy()
        rev[3:6] = -rev[3:6]
        rev[9:12] = -rev[9:12]
        bwd = _kernels.recurrence_search(rev, float(k), dt, n_max, float(eps), 0)
        row["backward_time"] = None if bwd < 0 else bwd * dt
        table.append(row)
    return {"dt": dt, "t_max": t_max, "k": int(k), "table": table}


# ---------------------------------------------------------------------------
# largest Lyapunov exponent


def lyapunov_max(
    initial,
    k: int = 1,
    dt: float = 1e-3,
    t_max: float = 1e4,
    delta0: float = 1e-8,
    renorm_time: float = 1.0,
    n_checkpoints: int = 16,
) -> dict:
    """Benettin largest-exponent estimates at logarithmic checkpoints.

    A companion trajectory offset by ``delta0`` is renormalized back to that
    separation every ``renorm_time``; lambda(t) is the accumulated log-growth
    divided by elapsed time, reported at roughly geometric checkpoint times.
    """
    if hasattr(initial, "state_at"):
        state = initial.state_at(0)
        k = initial.k
    else:
        state = initial
    if not isinstance(state, ProductState):
        raise ConfigError("lyapunov_max requires a product state")
    renorm_steps = max(1, int(round(renorm_time / dt)))
    total_steps = int(round(t_max / dt))
    total_steps = (total_steps // renorm_steps) * renorm_steps
    if total_steps < renorm_steps:
        raise ConfigError("t_max must cover at least one renormalization")
    # checkpoints start an order of magnitude past the first renormalization:
    # the log-growth/t quotient of a polynomially separating flow peaks near
    # t ~ 1 and only decreases monotonically beyond it
    first = min(10 * renorm_steps, total_steps)
    raw = np.geomspace(first, total_steps, n_checkpoints)
    checkpoints = np.unique(
        np.clip(
            np.round(raw / renorm_steps).astype(np.int64) * renorm_steps,
            renorm_steps,
            total_steps,
        )
    )
    u0 = state.as_array()
    v0 = u0 + delta0 / math.sqrt(12.0)
    # re-impose the sphere constraints on the companion, then restore the
    # separation to exactly delta0
    nrm = np.linalg.norm(v0[6:9])
    v0[6:9] /= nrm
    v0[9:12] -= np.dot(v0[6:9], v0[9:12]) * v0[6:9]
    offset = v0 - u0
    v0 = u0 + offset * (delta0 / np.linalg.norm(offset))
    lambdas = _kernels.lyapunov_benettin(
        u0, v0, float(k), dt, renorm_steps, checkpoints
    )
    return {
        "checkpoint_times": [float(s * dt) for s in checkpoints],
        "lambda_max": [float(v) for v in lambdas],
        "delta0": delta0,
        "renorm_time": renorm_steps * dt,
        "dt": dt,
    }


# ---------------------------------------------------------------------------
# minimality heuristic


def _has_rational_relation(x: float, qmax: int, tol: float) -> bool:
    """Continued-fraction test: is x within tol of p/q with q <= qmax?"""
    if not math.isfinite(x):
        return False
    p0, q0 = 1, 0
    p1, q1 = int(math.floor(x)), 1
    if abs(x - p1) < tol:
        return True
    frac = x - math.floor(x)
    while True:
        if frac == 0.0:
            return False
        frac = 1.0 / frac
        a = math.floor(frac)
        frac -= a
        p2 = int(a) * p1 + p0
        q2 = int(a) * q1 + q0
        if q2 > qmax:
            return False
        if abs(x - p2 / q2) < tol:
            return True
        p0, q0, p1, q1 = p1, q1, p2, q2


_MINIMALITY_QMAX = 10_000


def minimality_heuristic(est: RotationEstimate, tol: float = 1e-9) -> str:
    """Heuristic verdict on dense winding: one of
    ``likely-minimal``, ``resonant``, ``inconclusive``.

    Gates on the fit residuals, then looks for a rational relation among the
    frequency ratios with denominator at most 10^4.  A verdict, not a proof.
    """
    if not est.frequencies:
        return "inconclusive"
    if max(est.residuals.values()) > tol:
        return "inconclusive"
    freqs = [est.frequencies[name] for name in est.angles] if est.angles else list(
        est.frequencies.values()
    )
    order = sorted(range(len(freqs)), key=lambda i: -abs(freqs[i]))
    freqs = [freqs[i] for i in order]
    if abs(freqs[0]) == 0.0:
        return "resonant"
    for i in range(len(freqs)):
        for j in range(i + 1, len(freqs)):
            if abs(freqs[i]) == 0.0:
                continue
            ratio = freqs[j] / freqs[i]
            if _has_rational_relation(ratio, _MINIMALITY_QMAX, tol):
                return "resonant"
    return "likely-minimal"
