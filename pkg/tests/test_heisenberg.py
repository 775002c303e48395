"""Group layer: exact matrix arithmetic, exp/log, deck actions, reduction."""

import numpy as np
import pytest

from nilsphere.heisenberg import (
    NilCotangent,
    NilElement,
    deck_action,
    frame_momenta,
    lattice_generator,
    nil_exp,
    nil_inv,
    nil_log,
    nil_mul,
    reduce_mod_lattice,
)

IDENTITY = NilElement(0.0, 0.0, 0.0)


def random_elements(n, seed):
    rng = np.random.default_rng(seed)
    return [NilElement(*rng.uniform(-2, 2, size=3)) for _ in range(n)]


def test_identity_multiplication():
    g = NilElement(0.3, -1.2, 0.7)
    for prod in (nil_mul(IDENTITY, g), nil_mul(g, IDENTITY)):
        assert prod == g


def test_alpha_gamma_product_log_coordinates():
    # log(alpha * gamma) = (1, 0, 1): the central generator commutes
    g = nil_mul(lattice_generator("alpha"), lattice_generator("gamma"))
    np.testing.assert_allclose(nil_log(g), [1.0, 0.0, 1.0], atol=1e-15)


@pytest.mark.parametrize("k", [1, 2, 3, -2])
def test_generator_commutator_is_central_power(k):
    al = lattice_generator("alpha", k)
    be = lattice_generator("beta", k)
    comm = nil_mul(nil_mul(al, be), nil_mul(nil_inv(al), nil_inv(be)))
    ga = lattice_generator("gamma", k)
    power = IDENTITY
    for _ in range(abs(k)):
        power = nil_mul(power, ga if k > 0 else nil_inv(ga))
    np.testing.assert_allclose(
        comm.as_matrix(), power.as_matrix(), atol=1e-15
    )


def test_associativity_on_random_triples():
    g, h, l = random_elements(3, 1)
    left = nil_mul(nil_mul(g, h), l)
    right = nil_mul(g, nil_mul(h, l))
    np.testing.assert_allclose(
        left.as_matrix(), right.as_matrix(), atol=1e-12
    )


def test_inverse():
    for g in random_elements(4, 2):
        np.testing.assert_allclose(
            nil_mul(g, nil_inv(g)).as_matrix(), np.eye(3), atol=1e-14
        )


def test_exp_of_zero_is_identity():
    assert nil_exp([0.0, 0.0, 0.0]) == IDENTITY


def test_exp_log_inverse_pair():
    rng = np.random.default_rng(3)
    for _ in range(10):
        v = rng.uniform(-3, 3, size=3)
        k = int(rng.integers(1, 4))
        np.testing.assert_allclose(nil_log(nil_exp(v, k), k), v, atol=1e-12)


def test_exp_quadratic_term():
    # exp along (1,1,0): the commutator contributes half to the corner entry
    g = nil_exp([1.0, 1.0, 0.0], k=1)
    assert (g.m12, g.m23, g.m13) == (1.0, 1.0, 0.5)


def test_central_deck_action_shifts_z_only():
    st = NilCotangent(0.2, -0.4, 0.9, 1.1, -0.3, 0.8)
    moved = deck_action("gamma", st, k=2)
    assert (moved.x, moved.y, moved.z) == (st.x, st.y, st.z + 1.0)
    assert (moved.px, moved.py, moved.pz) == (st.px, st.py, st.pz)


def test_first_deck_action_position_rule():
    st = NilCotangent(0.2, -0.4, 0.9, 0.0, 0.0, 0.0)
    moved = deck_action("alpha", st, k=1)
    assert (moved.x, moved.y) == (st.x + 1.0, st.y)
    assert moved.z == pytest.approx(st.z + 0.5 * st.y, abs=1e-15)


@pytest.mark.parametrize("generator", ["alpha", "beta", "gamma"])
@pytest.mark.parametrize("k", [1, 3])
def test_frame_momenta_deck_invariant(generator, k):
    rng = np.random.default_rng(4)
    for _ in range(5):
        st = NilCotangent(*rng.uniform(-2, 2, size=6))
        moved = deck_action(generator, st, k, power=int(rng.integers(-3, 4)))
        np.testing.assert_allclose(
            frame_momenta(moved, k), frame_momenta(st, k), atol=1e-12
        )


def test_reduce_example():
    st = NilCotangent(1.25, 0.0, 0.0, 0.0, 0.0, 0.0)
    red = reduce_mod_lattice(st)
    assert (red.x, red.y, red.z) == (0.25, 0.0, 0.0)


def test_reduce_leaves_fundamental_domain_untouched():
    st = NilCotangent(0.25, 0.5, 0.75, 1.0, -1.0, 0.5)
    assert reduce_mod_lattice(st) == st


def test_reduce_idempotent_and_in_domain():
    rng = np.random.default_rng(5)
    for _ in range(10):
        st = NilCotangent(*rng.uniform(-4, 4, size=6))
        once = reduce_mod_lattice(st, k=2)
        for coord in (once.x, once.y, once.z):
            assert 0.0 <= coord < 1.0
        assert reduce_mod_lattice(once, k=2) == once
        # reduction is a deck motion: frame momenta unchanged
        np.testing.assert_allclose(
            frame_momenta(once, 2), frame_momenta(st, 2), atol=1e-12
        )


def test_k_zero_rejected():
    with pytest.raises(ValueError):
        nil_exp([1.0, 0.0, 0.0], k=0)
    with pytest.raises(ValueError):
        lattice_generator("alpha", k=0)


def test_unknown_generator_rejected():
    st = NilCotangent(0, 0, 0, 0, 0, 0)
    with pytest.raises(ValueError):
        deck_action("delta", st)
    with pytest.raises(ValueError):
        lattice_generator("delta")
