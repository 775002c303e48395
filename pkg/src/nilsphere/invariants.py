"""First integrals, momentum maps, and an independent derivative auditor.

The Poisson-bracket and rank auditors work purely by central finite
differences on the canonical product chart (x, y, z, r, phi) with conjugate
momenta (px, py, pz, pr, pphi).  They share no derivative code with the
analytic vector fields in :mod:`nilsphere.hamiltonians`, so agreement between
the two routes is evidence, not tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, PoleProximity, SingularProximity
from .hamiltonians import FiberProfile, builtin_profile, submersion_profile
from .heisenberg import NilCotangent, frame_momenta
from .reduction import ProductState
from .sphere import SphereCotangent, SpherePolar, angular_momentum_about_axis

TWO_PI = 2.0 * math.pi

TAGS = (
    "f1",
    "f2",
    "f3",
    "psi1",
    "psi2",
    "psi",
    "nu1",
    "nu2",
    "nu3",
    "H1",
    "H2",
    "H1_variant",
)

_NIL_TAGS = frozenset(
    {"f1", "f2", "f3", "psi1", "nu1", "nu2", "nu3", "H1", "H1_variant"}
)
_SPHERE_TAGS = frozenset({"psi2", "H2"})

# inverse-square exponent beyond which the flat factor exp(-1/c^2) is
# clamped to exactly zero (threshold where the true value underflows to a
# subnormal noise floor; the clamp makes the flat regime deterministic)
C_FLAT_EXPONENT = 700.0

# canonical (coordinate, momentum) index pairs of the auditor chart
_CHART_PAIRS = ((0, 5), (1, 6), (2, 7), (3, 8), (4, 9))


def _flat_factor(c: float) -> float:
    if c == 0.0:
        return 0.0
    inv = 1.0 / (c * c)
    if inv > C_FLAT_EXPONENT:
        return 0.0
    return math.exp(-inv)


def _flat_factor_series(c: np.ndarray) -> np.ndarray:
    out = np.zeros_like(c)
    with np.errstate(divide="ignore"):
        inv = 1.0 / (c * c)
    live = inv <= C_FLAT_EXPONENT
    out[live] = np.exp(-inv[live])
    return out


# ---------------------------------------------------------------------------
# typed-state evaluation


def _evaluate_nil(tag: str, state: NilCotangent, k: int) -> float:
    a, b, c = frame_momenta(state, k)
    if tag == "f1" or tag == "psi1":
        return c
    if tag == "f2":
        fac = _flat_factor(c)
        if fac == 0.0:
            return 0.0
        return fac * math.sin(TWO_PI * (a / c + state.y))
    if tag == "f3":
        fac = _flat_factor(c)
        if fac == 0.0:
            return 0.0
        return fac * math.sin(TWO_PI * (b / c - state.x))
    if tag == "nu1":
        return a + c * state.y
    if tag == "nu2":
        return b - c * state.x
    if tag == "nu3":
        return c
    if tag == "H1":
        return 0.5 * (a * a + b * b + c * c)
    if tag == "H1_variant":
        return (2.0 + math.sin(TWO_PI * state.y)) * 0.5 * (a * a + b * b + c * c)
    raise DomainError(f"integral {tag!r} is not a function of the nil factor")


def _evaluate_sphere(tag: str, state) -> float:
    if isinstance(state, SpherePolar):
        if tag == "psi2":
            return state.pphi / TWO_PI
        if tag == "H2":
            sr = math.sin(state.r)
            return 0.5 * (
                state.pr**2 + state.pphi**2 / (TWO_PI**2 * sr * sr)
            )
        raise DomainError(f"integral {tag!r} is not a function of the sphere factor")
    if tag == "psi2":
        return angular_momentum_about_axis(state, 1)
    if tag == "H2":
        return 0.5 * float(np.dot(state.p, state.p))
    raise DomainError(f"integral {tag!r} is not a function of the sphere factor")


def evaluate(tag: str, state, k: int = 1) -> float:
    """Evaluate integral ``tag`` at a typed state or a 10-chart array."""
    if tag not in TAGS:
        raise ConfigError(f"unknown integral tag {tag!r}")
    if isinstance(state, np.ndarray):
        chart = np.asarray(state, dtype=float)
        if chart.shape != (10,):
            raise DomainError("chart arrays must have 10 components")
        return evaluate_chart(tag, chart, k)
    if isinstance(state, ProductState):
        if tag in _NIL_TAGS:
            return _evaluate_nil(tag, state.nil, k)
        if tag in _SPHERE_TAGS:
            return _evaluate_sphere(tag, state.sphere)
        # psi: total momentum of the circle actions, zero on horizontal states
        return state.nil.pz - TWO_PI * angular_momentum_about_axis(state.sphere, 1)
    if isinstance(state, NilCotangent):
        return _evaluate_nil(tag, state, k)
    if isinstance(state, (SphereCotangent, SpherePolar)):
        return _evaluate_sphere(tag, state)
    raise DomainError(f"cannot evaluate {tag!r} on {type(state).__name__}")


# ---------------------------------------------------------------------------
# auditor chart


def chart_from_product(state: ProductState) -> np.ndarray:
    """Canonical chart (x, y, z, r, phi, px, py, pz, pr, pphi)."""
    from .sphere import polar_from_embedded

    pol = polar_from_embedded(state.sphere)
    n = state.nil
    return np.array(
        [n.x, n.y, n.z, pol.r, pol.phi, n.px, n.py, n.pz, pol.pr, pol.pphi]
    )


def product_from_chart(chart: np.ndarray) -> ProductState:
    from .sphere import embedded_from_polar

    chart = np.asarray(chart, dtype=float)
    nil = NilCotangent(
        x=chart[0], y=chart[1], z=chart[2], px=chart[5], py=chart[6], pz=chart[7]
    )
    sphere = embedded_from_polar(
        SpherePolar(r=chart[3], phi=chart[4] % 1.0, pr=chart[8], pphi=chart[9])
    )
    return ProductState(nil=nil, sphere=sphere)


def evaluate_chart(tag: str, chart: np.ndarray, k: int = 1) -> float:
    """Evaluate integral ``tag`` as a plain function of the auditor chart."""
    x, y, z, r, phi, px, py, pz, pr, pphi = chart
    a = px - 0.5 * k * y * pz
    b = py + 0.5 * k * x * pz
    c = pz
    if tag == "f1" or tag == "psi1" or tag == "nu3":
        return c
    if tag == "f2":
        fac = _flat_factor(c)
        return 0.0 if fac == 0.0 else fac * math.sin(TWO_PI * (a / c + y))
    if tag == "f3":
        fac = _flat_factor(c)
        return 0.0 if fac == 0.0 else fac * math.sin(TWO_PI * (b / c - x))
    if tag == "psi2":
        return pphi / TWO_PI
    if tag == "psi":
        return pz - pphi
    if tag == "nu1":
        return a + c * y
    if tag == "nu2":
        return b - c * x
    if tag == "H1":
        return 0.5 * (a * a + b * b + c * c)
    if tag == "H1_variant":
        return (2.0 + math.sin(TWO_PI * y)) * 0.5 * (a * a + b * b + c * c)
    if tag == "H2":
        sr = math.sin(r)
        if sr == 0.0:
            raise PoleProximity("chart energy of the sphere factor at a pole")
        return 0.5 * (pr * pr + (pphi * pphi) / (TWO_PI * TWO_PI * sr * sr))
    raise ConfigError(f"unknown integral tag {tag!r}")


def _as_chart_function(f, k: int):
    if callable(f):
        return f
    if f in TAGS:
        return lambda chart: evaluate_chart(f, chart, k)
    raise ConfigError(f"unknown integral tag {f!r}")


def _chart_gradient(func, chart: np.ndarray, h: float) -> np.ndarray:
    grad = np.empty(10)
    for i in range(10):
        up = chart.copy()
        dn = chart.copy()
        up[i] += h
        dn[i] -= h
        grad[i] = (func(up) - func(dn)) / (2.0 * h)
    return grad


def _require_margin(chart: np.ndarray, h: float) -> None:
    margin = 10.0 * h
    r = chart[3]
    if not (margin < r < math.pi - margin):
        raise SingularProximity(
            f"polar radius {r:.6g} within finite-difference margin "
            f"{margin:.3g} of a pole"
        )
    if abs(chart[7]) < margin:
        raise SingularProximity(
            f"|pz| = {abs(chart[7]):.6g} within finite-difference margin "
            f"{margin:.3g} of the flat locus"
        )


def _bracket_at_step(fa, ga, chart: np.ndarray, h: float) -> float:
    gf = _chart_gradient(fa, chart, h)
    gg = _chart_gradient(ga, chart, h)
    total = 0.0
    for iq, ip in _CHART_PAIRS:
        total += gf[iq] * gg[ip] - gf[ip] * gg[iq]
    return total


def poisson_bracket(F, G, state, h: float = 1e-5, k: int = 1) -> float:
    """Canonical bracket {F, G} by Richardson-refined central differences.

    ``F`` and ``G`` are integral tags or callables on the 10-chart; ``state``
    is a ProductState or a chart array.  Entirely independent of the analytic
    derivative code used by the integrators.
    """
    if not (1e-6 <= h <= 1e-4):
        raise ConfigError("finite-difference step h must lie in [1e-6, 1e-4]")
    chart = state if isinstance(state, np.ndarray) else chart_from_product(state)
    chart = np.asarray(chart, dtype=float)
    _require_margin(chart, h)
    fa = _as_chart_function(F, k)
    ga = _as_chart_function(G, k)
    coarse = _bracket_at_step(fa, ga, chart, h)
    fine = _bracket_at_step(fa, ga, chart, 0.5 * h)
    return (4.0 * fine - coarse) / 3.0


@dataclass
class BracketReport:
    """Bracket values of one integral pair over a sample set."""

    pair: tuple[str, str]
    h: float
    margin: float
    per_sample: list[float]
    expected_commuting: bool | None = None

    @property
    def max_abs(self) -> float:
        return max(abs(v) for v in self.per_sample) if self.per_sample else 0.0

    def to_json_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "samples": len(self.per_sample),
            "h": self.h,
            "margin": self.margin,
            "max_abs": self.max_abs,
            "expected_commuting": self.expected_commuting,
            "per_sample": list(self.per_sample),
        }


def _pair_key(i: str, j: str) -> frozenset:
    return frozenset((i, j))


# pairs that commute for the built-in integrable families (the square-energy
# family with f1, f2, f3 and the conformally scaled variant family)
EXPECTED_COMMUTING_PAIRS = frozenset(
    _pair_key(i, j)
    for i, j in (
        ("H1", "H2"),
        ("H1", "f1"),
        ("H1", "f2"),
        ("H1", "f3"),
        ("H2", "f1"),
        ("H2", "f2"),
        ("H2", "f3"),
        ("f1", "f2"),
        ("f1", "f3"),
        ("H1_variant", "H2"),
        ("H1_variant", "f1"),
        ("H1_variant", "f2"),
    )
)


def commutation_matrix(
    ids: list[str], states: list, h: float = 1e-5, k: int = 1
) -> dict[tuple[str, str], BracketReport]:
    """All pairwise bracket reports over the sample states."""
    reports = {}
    for idx, fi in enumerate(ids):
        for fj in ids[idx + 1 :]:
            values = [poisson_bracket(fi, fj, st, h=h, k=k) for st in states]
            expected = None
            if fi in TAGS and fj in TAGS:
                expected = _pair_key(fi, fj) in EXPECTED_COMMUTING_PAIRS
            reports[(fi, fj)] = BracketReport(
                pair=(fi, fj),
                h=h,
                margin=10.0 * h,
                per_sample=values,
                expected_commuting=expected,
            )
    return reports


_RANK_CUTOFF = 1e-8


def projected_rank(funcs: list, state, h: float = 1e-5) -> int:
    """Rank of chart functions restricted to the zero set of psi.

    Gradients are taken by Richardson-refined finite differences on the
    auditor chart and projected onto the tangent space of {psi = 0}; the rank
    counts singular values above 1e-8 times the largest.
    """
    if not (1e-6 <= h <= 1e-4):
        raise ConfigError("finite-difference step h must lie in [1e-6, 1e-4]")
    chart = state if isinstance(state, np.ndarray) else chart_from_product(state)
    chart = np.asarray(chart, dtype=float)
    _require_margin(chart, h)
    grads = np.empty((len(funcs), 10))
    for row, func in enumerate(funcs):
        coarse = _chart_gradient(func, chart, h)
        fine = _chart_gradient(func, chart, 0.5 * h)
        grads[row] = (4.0 * fine - coarse) / 3.0
    # psi = pz - pphi has constant chart gradient
    normal = np.zeros(10)
    normal[7] = 1.0
    normal[9] = -1.0
    normal /= np.linalg.norm(normal)
    grads = grads - np.outer(grads @ normal, normal)
    sv = np.linalg.svd(grads, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > _RANK_CUTOFF * sv[0]))


def independence_rank(ids: list[str], state, h: float = 1e-5, k: int = 1) -> int:
    """Rank of the listed integrals restricted to the zero set of psi."""
    funcs = [_as_chart_function(f, k) for f in ids]
    return projected_rank(funcs, state, h)


# ---------------------------------------------------------------------------
# trajectory series


def _nil_series(traj):
    s = traj.states
    if traj.kind == "nil" or traj.kind == "product":
        x, y, z = s[:, 0], s[:, 1], s[:, 2]
        px, py, pz = s[:, 3], s[:, 4], s[:, 5]
        kf = float(traj.k)
        a = px - 0.5 * kf * y * pz
        b = py + 0.5 * kf * x * pz
        return x, y, z, a, b, pz
    raise DomainError(f"trajectory kind {traj.kind!r} has no nil factor")


def _sphere_series(traj):
    s = traj.states
    if traj.kind == "sphere":
        return s[:, 0:3], s[:, 3:6]
    if traj.kind == "product":
        return s[:, 6:9], s[:, 9:12]
    raise DomainError(f"trajectory kind {traj.kind!r} has no sphere factor")


def evaluate_series(tag: str, traj) -> np.ndarray:
    """Vectorized integral values along a trajectory's samples."""
    if tag in _NIL_TAGS:
        x, y, z, a, b, c = _nil_series(traj)
        if tag == "f1" or tag == "psi1" or tag == "nu3":
            return c.copy()
        if tag == "f2" or tag == "f3":
            fac = _flat_factor_series(c)
            out = np.zeros_like(c)
            live = fac > 0.0
            if tag == "f2":
                out[live] = fac[live] * np.sin(
                    TWO_PI * (a[live] / c[live] + y[live])
                )
            else:
                out[live] = fac[live] * np.sin(
                    TWO_PI * (b[live] / c[live] - x[live])
                )
            return out
        if tag == "nu1":
            return a + c * y
        if tag == "nu2":
            return b - c * x
        if tag == "H1":
            return 0.5 * (a * a + b * b + c * c)
        if tag == "H1_variant":
            return (2.0 + np.sin(TWO_PI * y)) * 0.5 * (a * a + b * b + c * c)
    if tag in _SPHERE_TAGS:
        xi, p = _sphere_series(traj)
        if tag == "H2":
            return 0.5 * np.sum(p * p, axis=1)
        # psi2: angular momentum about the first axis
        return xi[:, 1] * p[:, 2] - xi[:, 2] * p[:, 1]
    if tag == "psi":
        _, _, _, _, _, c = _nil_series(traj)
        xi, p = _sphere_series(traj)
        return c - TWO_PI * (xi[:, 1] * p[:, 2] - xi[:, 2] * p[:, 1])
    raise ConfigError(f"unknown integral tag {tag!r}")


def _v_series(profile: FiberProfile, r: np.ndarray) -> np.ndarray:
    from .hamiltonians import (
        PROFILE_SUBMERSION,
        PROFILE_U_SIN,
        PROFILE_U_SIN_CUBED,
    )

    if profile.code == PROFILE_SUBMERSION:
        w2 = (TWO_PI * np.sin(r)) ** 2
        return w2 / (1.0 + w2)
    if profile.code == PROFILE_U_SIN:
        return (TWO_PI * np.sin(r)) ** 2
    if profile.code == PROFILE_U_SIN_CUBED:
        return (TWO_PI * np.sin(r) + np.sin(r) ** 3) ** 2
    return np.array([profile.u(ri) ** 2 for ri in r])


def resolve_profile(traj, profile: FiberProfile | None) -> FiberProfile:
    if profile is not None:
        return profile
    if traj.profile_name is None:
        return submersion_profile()
    try:
        return builtin_profile(traj.profile_name)
    except ValueError:
        raise ConfigError(
            f"trajectory used custom profile {traj.profile_name!r}; pass it "
            "explicitly"
        ) from None


def evaluate_energy_series(traj, profile: FiberProfile | None = None) -> np.ndarray:
    """The system energy along a trajectory's samples."""
    system = traj.system
    if system == "H1":
        return evaluate_series("H1", traj)
    if system == "H1_variant":
        return evaluate_series("H1_variant", traj)
    if system == "H2":
        return evaluate_series("H2", traj)
    if system == "H_product":
        return evaluate_series("H1", traj) + evaluate_series("H2", traj)
    if system == "H_reduced":
        prof = resolve_profile(traj, profile)
        s = traj.states
        x, y, r = s[:, 0], s[:, 1], s[:, 2]
        px, py, pr, ps = s[:, 4], s[:, 5], s[:, 6], s[:, 7]
        A = px - 0.5 * y * ps
        B = py + 0.5 * x * ps
        v = _v_series(prof, r)
        return 0.5 * (A * A + B * B + pr * pr + ps * ps / v)
    raise ConfigError(f"unknown system {system!r}")


def drift_report(traj, ids: list[str]) -> dict[str, float]:
    """Max relative drift |F(t) - F(0)| / max(1, |F(0)|) per integral."""
    out = {}
    for tag in ids:
        series = traj.diagnostics.get(tag) if traj.diagnostics else None
        if series is None:
            series = evaluate_series(tag, traj)
        ref = series[0]
        out[tag] = float(np.max(np.abs(series - ref)) / max(1.0, abs(ref)))
    return out


def nu_bound_check(traj, tol: float = 1e-9) -> dict:
    """Verify the translation-momentum confinement bound along a trajectory.

    Checks that |x(t)| <= (|b(t)| + |nu2|)/|nu3| + tol and
    |y(t)| <= (|a(t)| + |nu1|)/|nu3| + tol at every sample, and reports the
    conservation drift of (nu1, nu2, nu3).
    """
    x, y, _, a, b, c = _nil_series(traj)
    nu1 = a + c * y
    nu2 = b - c * x
    nu3 = c
    if np.min(np.abs(nu3)) < 1e-8:
        raise DomainError("confinement bound requires |nu3| bounded away from 0")
    n1, n2, n3 = nu1[0], nu2[0], nu3[0]
    bound_x = (np.abs(b) + abs(n2)) / abs(n3) + tol
    bound_y = (np.abs(a) + abs(n1)) / abs(n3) + tol
    viol_x = np.abs(x) > bound_x
    viol_y = np.abs(y) > bound_y
    first = None
    if np.any(viol_x) or np.any(viol_y):
        idx_candidates = []
        if np.any(viol_x):
            idx_candidates.append((int(np.argmax(viol_x)), "x"))
        if np.any(viol_y):
            idx_candidates.append((int(np.argmax(viol_y)), "y"))
        idx, which = min(idx_candidates)
        first = {
            "index": idx,
            "time": float(traj.times[idx]),
            "coordinate": which,
        }
    drifts = {
        "nu1": float(np.max(np.abs(nu1 - n1)) / max(1.0, abs(n1))),
        "nu2": float(np.max(np.abs(nu2 - n2)) / max(1.0, abs(n2))),
        "nu3": float(np.max(np.abs(nu3 - n3)) / max(1.0, abs(n3))),
    }
    return {
        "bound_ok": first is None,
        "first_violation": first,
        "nu_drift": drifts,
        "conserved": all(d < 1e-7 for d in drifts.values()),
        "tol": tol,
    }
