"""Product states, the momentum constraint, and the reduced chart."""

import math

import numpy as np
import pytest

from nilsphere.errors import DomainError, NotHorizontal
from nilsphere.hamiltonians import h1, h2, h_reduced, submersion_profile
from nilsphere.heisenberg import NilCotangent
from nilsphere.reduction import (
    ProductState,
    ReducedState,
    horizontality_defect,
    product_from_reduced,
    reduced_from_product,
)
from nilsphere.sampling import random_regular_product_states
from nilsphere.sphere import SpherePolar, embedded_from_polar


def horizontal_state(z, phi, pz=0.4, r=1.3, pr=0.2, x=0.1, y=-0.2):
    nil = NilCotangent(x, y, z, 0.3, -0.1, pz)
    sphere = embedded_from_polar(SpherePolar(r, phi, pr, pz))
    return ProductState(nil, sphere)


def test_s_coordinate_is_sum():
    st = horizontal_state(z=0.25, phi=0.5)
    red = reduced_from_product(st)
    assert red.s == pytest.approx(0.75, abs=1e-12)


def test_non_horizontal_rejected():
    nil = NilCotangent(0.0, 0.0, 0.0, 0.0, 0.0, 0.5)
    sphere = embedded_from_polar(SpherePolar(1.3, 0.2, 0.1, 0.4))  # pphi != pz
    with pytest.raises(NotHorizontal):
        reduced_from_product(ProductState(nil, sphere))
    assert horizontality_defect(ProductState(nil, sphere)) == pytest.approx(
        0.1, abs=1e-12
    )


def test_energy_identity_on_random_horizontal_states():
    profile = submersion_profile()
    for state in random_regular_product_states(100, 900):
        total = h1(state.nil) + h2(state.sphere)
        red = reduced_from_product(state)
        assert h_reduced(red, profile) == pytest.approx(total, abs=1e-9)


def test_round_trip_product_reduced_product():
    # the lift fixes a gauge, so the circle coordinate comes back mod 1
    for state in random_regular_product_states(10, 901):
        red = reduced_from_product(state)
        back = product_from_reduced(red)
        red2 = reduced_from_product(back)
        a, b = red.as_array(), red2.as_array()
        np.testing.assert_allclose(a[:3], b[:3], atol=1e-10)
        np.testing.assert_allclose(a[4:], b[4:], atol=1e-10)
        wrapped = (a[3] - b[3] + 0.5) % 1.0 - 0.5
        assert abs(wrapped) < 1e-10


def test_product_array_round_trip():
    state = random_regular_product_states(1, 902)[0]
    arr = state.as_array()
    assert arr.shape == (12,)
    back = ProductState.from_array(arr)
    np.testing.assert_allclose(back.as_array(), arr, atol=0.0)


def test_reduced_array_round_trip():
    red = ReducedState(0.1, 0.2, 1.3, 0.4, 0.5, 0.6, 0.7, 0.8)
    back = ReducedState.from_array(red.as_array())
    assert back == red


def test_reduced_r_range_validated():
    with pytest.raises(DomainError):
        ReducedState(0.0, 0.0, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        ReducedState(0.0, 0.0, math.pi + 0.5, 0.0, 0.0, 0.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        ReducedState(math.nan, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0)
