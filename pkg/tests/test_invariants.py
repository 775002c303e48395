"""First integrals, the flat clamp, and the finite-difference bracket auditor."""

import math

import numpy as np
import pytest

from nilsphere.errors import ConfigError, DomainError, SingularProximity
from nilsphere.heisenberg import NilCotangent
from nilsphere.integrators import IntegratorConfig, integrate
from nilsphere.invariants import (
    TAGS,
    chart_from_product,
    commutation_matrix,
    drift_report,
    evaluate,
    evaluate_chart,
    evaluate_series,
    independence_rank,
    nu_bound_check,
    poisson_bracket,
)
from nilsphere.reduction import ProductState
from nilsphere.sampling import random_regular_product_states
from nilsphere.sphere import SphereCotangent, SpherePolar, embedded_from_polar


def test_tag_inventory():
    assert set(TAGS) == {
        "f1", "f2", "f3", "psi1", "psi2", "psi",
        "nu1", "nu2", "nu3", "H1", "H2", "H1_variant",
    }


def test_flat_clamp_is_exact_zero():
    st = NilCotangent(0.3, 0.7, 0.0, 0.2, 0.4, 0.01)
    assert evaluate("f2", st) == 0.0
    assert evaluate("f3", st) == 0.0
    assert evaluate("f1", st) == 0.01


def test_f2_vanishes_on_integer_phase():
    # a = c, y = 0: the phase is one full turn, and sin(2 pi) ~ 0
    st = NilCotangent(0.0, 0.0, 0.0, 1.0, 0.3, 1.0)
    assert abs(evaluate("f2", st)) < 1e-15


def test_f2_closed_form_at_generic_point():
    st = NilCotangent(0.2, -0.3, 0.1, 0.7, 0.4, 0.8)
    a = st.px - 0.5 * st.y * st.pz
    c = st.pz
    expected = math.exp(-1.0 / c**2) * math.sin(2 * math.pi * (a / c + st.y))
    assert evaluate("f2", st) == pytest.approx(expected, abs=1e-15)


def test_nu_at_origin_is_frame_momenta():
    st = NilCotangent(0.0, 0.0, 0.4, 0.9, -0.2, 0.6)
    assert evaluate("nu1", st) == pytest.approx(0.9, abs=1e-15)
    assert evaluate("nu2", st) == pytest.approx(-0.2, abs=1e-15)
    assert evaluate("nu3", st) == pytest.approx(0.6, abs=1e-15)


def test_psi_vanishes_on_horizontal_states():
    st = random_regular_product_states(1, 60)[0]
    assert abs(evaluate("psi", st)) < 1e-12
    assert evaluate("psi1", st) == pytest.approx(st.nil.pz, abs=1e-14)


def test_canonical_pairs_bracket():
    state = random_regular_product_states(1, 61)[0]
    x_fn = lambda chart: chart[0]
    px_fn = lambda chart: chart[5]
    py_fn = lambda chart: chart[6]
    assert poisson_bracket(x_fn, px_fn, state) == pytest.approx(1.0, abs=1e-9)
    assert poisson_bracket(x_fn, py_fn, state) == pytest.approx(0.0, abs=1e-9)


def test_frame_momenta_bracket_relation():
    # {a, b} = -k c in the canonical chart
    k = 1
    a_fn = lambda chart: chart[5] - 0.5 * k * chart[1] * chart[7]
    b_fn = lambda chart: chart[6] + 0.5 * k * chart[0] * chart[7]
    for state in random_regular_product_states(5, 62):
        c = state.nil.pz
        val = poisson_bracket(a_fn, b_fn, state)
        assert val == pytest.approx(-k * c, abs=1e-6)


def test_bracket_of_function_with_itself_vanishes():
    state = random_regular_product_states(1, 63)[0]
    assert poisson_bracket("H1", "H1", state) == 0.0
    assert poisson_bracket("f2", "f2", state) == 0.0


def test_bracket_antisymmetry():
    state = random_regular_product_states(1, 64)[0]
    fg = poisson_bracket("H1", "f2", state)
    gf = poisson_bracket("f2", "H1", state)
    assert fg == pytest.approx(-gf, abs=1e-12)


def test_leibniz_rule_spot_check():
    state = random_regular_product_states(1, 65)[0]
    chart = chart_from_product(state)
    g_val = evaluate_chart("f1", chart)
    h_val = evaluate_chart("H2", chart)
    gh = lambda ch: evaluate_chart("f1", ch) * evaluate_chart("H2", ch)
    left = poisson_bracket("H1", gh, state)
    right = g_val * poisson_bracket("H1", "H2", state) + h_val * (
        poisson_bracket("H1", "f1", state)
    )
    assert left == pytest.approx(right, abs=1e-5)


def test_psi_commutes_with_total_energy():
    total = lambda chart: evaluate_chart("H1", chart) + evaluate_chart(
        "H2", chart
    )
    for state in random_regular_product_states(10, 66):
        assert abs(poisson_bracket("psi", total, state)) < 1e-6


def test_bracket_step_range_enforced():
    state = random_regular_product_states(1, 67)[0]
    for h in (1e-7, 1e-3):
        with pytest.raises(ConfigError):
            poisson_bracket("H1", "H2", state, h=h)


def test_singular_margin_enforced():
    # |pz| below the 10h margin
    nil = NilCotangent(0.0, 0.0, 0.0, 0.3, 0.2, 1e-5)
    sphere = embedded_from_polar(SpherePolar(1.2, 0.3, 0.5, 1e-5))
    state = ProductState(nil, sphere)
    with pytest.raises(SingularProximity):
        poisson_bracket("f2", "f3", state)
    # colatitude too close to the chart boundary (chart array bypasses the
    # polar-chart constructor guard, the auditor must still refuse)
    chart = np.array([0.0, 0.0, 0.0, 2e-5, 0.3, 0.3, 0.2, 0.6, 0.5, 0.6])
    with pytest.raises(SingularProximity):
        poisson_bracket("H2", "f1", chart)


def test_duplicate_rank_is_one():
    state = random_regular_product_states(1, 68)[0]
    assert independence_rank(["H1", "H1"], state) == 1


def test_commutation_matrix_shapes_and_flags():
    states = random_regular_product_states(3, 69)
    reports = commutation_matrix(["H1", "f2", "f3"], states)
    assert set(reports) == {("H1", "f2"), ("H1", "f3"), ("f2", "f3")}
    rep = reports[("H1", "f2")]
    assert rep.expected_commuting
    assert len(rep.per_sample) == 3
    assert not reports[("f2", "f3")].expected_commuting
    payload = rep.to_json_dict()
    for key in ("pair", "samples", "h", "max_abs", "per_sample"):
        assert key in payload


def test_constant_trajectory_has_zero_drift():
    nil = NilCotangent(0.2, 0.3, 0.1, 0.0, 0.0, 0.0)
    sphere = SphereCotangent(np.array([0.0, 1.0, 0.0]), np.zeros(3))
    state = ProductState(nil, sphere)
    cfg = IntegratorConfig(
        dt=1e-3, t_max=1.0, scheme="split-product", sample_stride=100
    )
    traj = integrate("H_product", state, cfg)
    drifts = drift_report(traj, ["H1", "H2", "f1", "f2", "f3", "psi"])
    assert all(v == 0.0 for v in drifts.values())


def test_evaluate_series_matches_pointwise():
    state = random_regular_product_states(1, 70)[0]
    cfg = IntegratorConfig(
        dt=1e-3, t_max=0.5, scheme="split-product", sample_stride=50
    )
    traj = integrate("H_product", state, cfg)
    series = evaluate_series("f2", traj)
    for i in (0, traj.n_samples - 1):
        assert series[i] == pytest.approx(
            evaluate("f2", traj.state_at(i)), abs=1e-14
        )


def test_nu_bound_check_requires_nonzero_c():
    nil = NilCotangent(0.0, 0.0, 0.0, 0.4, 0.3, 0.0)
    sphere = SphereCotangent(np.array([0.0, 1.0, 0.0]), np.zeros(3))
    cfg = IntegratorConfig(
        dt=1e-3, t_max=0.1, scheme="split-product", sample_stride=10
    )
    traj = integrate("H_product", ProductState(nil, sphere), cfg)
    with pytest.raises(DomainError):
        nu_bound_check(traj)


def test_nu_bound_holds_along_regular_trajectory():
    state = random_regular_product_states(1, 71)[0]
    cfg = IntegratorConfig(
        dt=1e-3, t_max=50.0, scheme="split-product", sample_stride=10
    )
    traj = integrate("H_product", state, cfg)
    report = nu_bound_check(traj)
    assert report["bound_ok"]
    assert report["conserved"]
    assert report["first_violation"] is None
