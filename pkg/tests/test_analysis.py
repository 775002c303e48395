"""Fibration values, rotation vectors, recurrence, and Lyapunov estimates."""

import math
from fractions import Fraction

import numpy as np
import pytest

from nilsphere.analysis import (
    FIBRATION_KINDS,
    RotationEstimate,
    fibration_drift,
    fibration_value,
    lyapunov_max,
    minimality_heuristic,
    rank_of_fibration,
    recurrence_stat,
    rotation_vector,
)
from nilsphere.errors import (
    ConfigError,
    DomainError,
    NotHorizontal,
    NotOnRegularFiber,
)
from nilsphere.heisenberg import NilCotangent, deck_action
from nilsphere.integrators import IntegratorConfig, integrate
from nilsphere.reduction import ProductState, ReducedState
from nilsphere.sampling import random_regular_product_states
from nilsphere.sphere import SphereCotangent, SpherePolar, embedded_from_polar

TWO_PI = 2.0 * math.pi


def _horizontal_state(nil: NilCotangent, r, phi, pr) -> ProductState:
    sphere = embedded_from_polar(SpherePolar(r=r, phi=phi, pr=pr, pphi=nil.pz))
    return ProductState(nil=nil, sphere=sphere)


def test_fibration_unit_example():
    state = _horizontal_state(
        NilCotangent(0.0, 0.0, 0.0, 1.0, 0.0, 1.0), math.pi / 2, 0.3, 1.0
    )
    val = fibration_value("fprime1", state)
    assert val.as_array() == pytest.approx([0.0, 0.0, 1.0, 1.0, 1.0], abs=1e-12)
    assert not val.singular
    short = fibration_value("f1", state)
    assert short.theta2 is None
    assert short.as_array() == pytest.approx([0.0, 1.0, 1.0, 1.0], abs=1e-12)


def test_fibration_marks_zero_transverse_momentum_singular():
    state = _horizontal_state(
        NilCotangent(0.0, 0.0, 0.0, 0.0, 0.0, 1.0), math.pi / 2, 0.1, 1.0
    )
    val = fibration_value("fprime1", state)
    assert val.e1 == 0.0
    assert val.singular


def test_fibration_requires_horizontal_state():
    nil = NilCotangent(0.0, 0.0, 0.0, 0.3, 0.2, 0.5)
    sphere = embedded_from_polar(SpherePolar(1.2, 0.1, 0.4, 0.6))
    with pytest.raises(NotHorizontal):
        fibration_value("fprime1", ProductState(nil, sphere))


def test_fibration_rejects_flat_vertical_momentum():
    state = _horizontal_state(
        NilCotangent(0.0, 0.0, 0.0, 0.4, 0.1, 0.0), 1.0, 0.2, 0.7
    )
    with pytest.raises(DomainError):
        fibration_value("fprime1", state)
    with pytest.raises(ConfigError):
        fibration_value("not-a-kind", state)


def test_fibration_angles_deck_invariant():
    nil = NilCotangent(0.2, -0.3, 0.1, 0.7, 0.4, 0.8)
    state = _horizontal_state(nil, 1.1, 0.25, 0.5)
    base = fibration_value("fprime1", state)
    for gen in ("alpha", "beta", "gamma"):
        moved_nil = deck_action(gen, nil, k=1, power=1)
        moved = ProductState(moved_nil, state.sphere)
        val = fibration_value("fprime1", moved)
        assert val.theta1 == pytest.approx(base.theta1, abs=1e-12)
        assert val.theta2 == pytest.approx(base.theta2, abs=1e-12)
        assert val.c == base.c
        assert val.e1 == pytest.approx(base.e1, abs=1e-12)
        assert val.e2 == base.e2


def test_fibration_ranks_at_regular_state():
    state = random_regular_product_states(1, 90)[0]
    assert rank_of_fibration("fprime1", state) == 5
    assert rank_of_fibration("f1", state) == 4


def test_fibration_conserved_along_product_flow():
    state = random_regular_product_states(1, 91)[0]
    cfg = IntegratorConfig(
        dt=1e-3, t_max=100.0, scheme="split-product", sample_stride=100
    )
    traj = integrate("H_product", state, cfg)
    for kind in FIBRATION_KINDS:
        drift = fibration_drift(kind, traj)
        assert max(drift.values()) < 1e-11


def test_rotation_vector_straight_line_nil():
    # abelian regime: c = 0 makes the nil flow a straight drift
    nil = NilCotangent(0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
    cfg = IntegratorConfig(
        dt=1e-2, t_max=20.0, scheme="euler-arnold-nil", sample_stride=10
    )
    traj = integrate("H1", nil, cfg)
    est = rotation_vector(traj)
    assert est.frequencies["x"] == pytest.approx(1.0, abs=1e-9)
    assert est.frequencies["y"] == pytest.approx(0.0, abs=1e-9)
    assert est.residuals["x"] < 1e-9
    assert est.window == pytest.approx(20.0, abs=1e-9)


def test_rotation_vector_nil_phase_frequency():
    # the transverse momentum pair rotates at rate k*c, i.e. c/(2*pi) cycles
    nil = NilCotangent(0.1, -0.2, 0.0, 0.5, 0.3, 0.7)
    cfg = IntegratorConfig(
        dt=1e-2, t_max=50.0, scheme="euler-arnold-nil", sample_stride=10
    )
    traj = integrate("H1", nil, cfg)
    est = rotation_vector(traj, angles=["nil-phase"])
    assert est.frequencies["nil-phase"] == pytest.approx(
        0.7 / TWO_PI, abs=1e-9
    )
    assert est.residuals["nil-phase"] < 1e-4


def test_rotation_vector_great_circle():
    omega = 0.5
    sphere = SphereCotangent(
        np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, omega])
    )
    cfg = IntegratorConfig(
        dt=1e-2, t_max=40.0, scheme="exact-sphere", sample_stride=10
    )
    traj = integrate("H2", sphere, cfg)
    est = rotation_vector(traj)
    assert est.frequencies["phi"] == pytest.approx(omega / TWO_PI, abs=1e-9)
    assert est.frequencies["sphere-phase"] == pytest.approx(
        omega / TWO_PI, abs=1e-9
    )
    assert max(est.residuals.values()) < 1e-6


def test_rotation_vector_guards():
    sphere = SphereCotangent(
        np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 30.0])
    )
    cfg = IntegratorConfig(
        dt=1e-2, t_max=5.0, scheme="exact-sphere", sample_stride=10
    )
    traj = integrate("H2", sphere, cfg)
    with pytest.raises(ConfigError, match="guard"):
        rotation_vector(traj)
    short_cfg = IntegratorConfig(
        dt=1e-2, t_max=0.01, scheme="exact-sphere", sample_stride=1
    )
    short = integrate("H2", sphere, short_cfg)
    with pytest.raises(ConfigError, match="3 samples"):
        rotation_vector(short)


def test_rotation_vector_rejects_drifting_trajectory():
    state = ReducedState(
        x=0.1, y=0.2, r=1.0, s=0.0, px=0.3, py=0.2, pr=0.4, ps=0.6
    )
    cfg = IntegratorConfig(
        dt=1e-3, t_max=2.0, scheme="implicit-midpoint-chart", sample_stride=10
    )
    traj = integrate("H_reduced", state, cfg)
    with pytest.raises(NotOnRegularFiber):
        rotation_vector(traj, fiber_tol=1e-16)


def _estimate(freqs, residual):
    names = [f"a{i}" for i in range(len(freqs))]
    return RotationEstimate(
        frequencies=dict(zip(names, freqs)),
        residuals={name: residual for name in names},
        window=100.0,
        angles=names,
    )


def test_minimality_verdicts():
    irrational = (1.0, math.sqrt(2.0), math.sqrt(3.0))
    # independent check that no ratio admits a small-denominator rational
    # approximation at the verdict tolerance
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            ratio = irrational[j] / irrational[i]
            best = Fraction(ratio).limit_denominator(10_000)
            assert abs(ratio - float(best)) > 1e-9
    assert minimality_heuristic(_estimate(irrational, 1e-12)) == "likely-minimal"
    assert minimality_heuristic(_estimate((1.0, 0.5, 0.25), 1e-12)) == "resonant"
    assert minimality_heuristic(_estimate((1.0, math.sqrt(2.0)), 1e-3)) == (
        "inconclusive"
    )


def test_recurrence_periodic_orbit():
    # zero transverse momentum freezes every chart coordinate except the
    # circle coordinate, which winds at rate c * (1 + 1/(4 pi^2))
    c = 1.0
    nil = NilCotangent(0.3, -0.2, 0.1, 0.5 * (-0.2) * c, -0.5 * 0.3 * c, c)
    state = _horizontal_state(nil, math.pi / 2, 0.3, 0.0)
    eps = 0.2
    report = recurrence_stat(state, eps_values=(eps,), dt=1e-3, t_max=50.0)
    row = report["table"][0]
    rate = c * (1.0 + 1.0 / (TWO_PI * TWO_PI))
    expected = (1.0 - eps) / rate
    assert row["forward_time"] == pytest.approx(expected, abs=2e-3)
    assert row["backward_time"] == pytest.approx(expected, abs=2e-3)
    assert abs(row["forward_time"] - row["backward_time"]) <= 1e-3


def test_recurrence_requires_compact_fiber_regime():
    nil = NilCotangent(0.0, 0.0, 0.0, 0.4, 0.3, 0.05)
    state = _horizontal_state(nil, 1.2, 0.1, 0.6)
    with pytest.raises(DomainError):
        recurrence_stat(state, eps_values=(0.5,), t_max=1.0)


def test_recurrence_reports_absent_returns_as_none():
    state = random_regular_product_states(1, 92)[0]
    report = recurrence_stat(state, eps_values=(1e-6,), dt=1e-3, t_max=1.0)
    assert report["table"][0]["forward_time"] is None
    assert report["table"][0]["backward_time"] is None


def test_lyapunov_offset_insensitivity():
    state = random_regular_product_states(1, 93)[0]
    base = lyapunov_max(state, t_max=200.0, delta0=1e-8, n_checkpoints=6)
    double = lyapunov_max(state, t_max=200.0, delta0=2e-8, n_checkpoints=6)
    lam0 = base["lambda_max"][-1]
    lam1 = double["lambda_max"][-1]
    assert abs(lam1 - lam0) <= 0.2 * abs(lam0)


def test_lyapunov_flat_factor_bound():
    state = random_regular_product_states(1, 94)[0]
    report = lyapunov_max(state, t_max=100.0, n_checkpoints=8)
    assert report["checkpoint_times"][-1] == pytest.approx(100.0, abs=1e-9)
    assert report["lambda_max"][-1] <= 2.0 * math.log(100.0) / 100.0


def test_lyapunov_requires_product_state():
    with pytest.raises(ConfigError):
        lyapunov_max(NilCotangent(0.0, 0.0, 0.0, 0.1, 0.2, 0.3), t_max=10.0)
