import numpy as np
import pytest

from ptsim.states import (
    maximally_mixed,
    partial_trace,
    purity,
    random_product_state,
    reduced_density_matrix,
    renyi2_columns,
    renyi2_halfcut,
    trace_distance,
)


def bell():
    return np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def test_purity_limits():
    assert purity(maximally_mixed(3)) == pytest.approx(1 / 8)
    psi = random_product_state(3, 1)
    assert purity(np.outer(psi, psi.conj())) == pytest.approx(1.0)
    # unnormalized input is fine
    assert purity(5 * maximally_mixed(2)) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        purity(np.zeros((2, 2)))


def test_bell_state_entropy_is_one_bit():
    assert renyi2_halfcut(bell()) == pytest.approx(1.0)
    np.testing.assert_allclose(reduced_density_matrix(bell(), 1), np.eye(2) / 2)


def test_product_state_has_zero_entropy():
    psi = random_product_state(6, 3)
    for cut in range(1, 6):
        assert abs(renyi2_halfcut(psi, cut)) < 1e-12


def test_partial_trace_of_pure_state_matches_reduced(rng):
    psi = rng.normal(size=16) + 1j * rng.normal(size=16)
    psi /= np.linalg.norm(psi)
    rho = np.outer(psi, psi.conj())
    np.testing.assert_allclose(partial_trace(rho, 2), reduced_density_matrix(psi, 2), atol=1e-14)


def test_renyi2_columns_matches_scalar(rng):
    V = rng.normal(size=(32, 5)) + 1j * rng.normal(size=(32, 5))
    for cut in (1, 2, 4):
        batch = renyi2_columns(V, cut)
        single = [renyi2_halfcut(v / np.linalg.norm(v), cut) for v in V.T]
        np.testing.assert_allclose(batch, single, atol=1e-12)


def test_renyi2_rejects_bad_cut_and_unnormalized():
    with pytest.raises(ValueError):
        renyi2_halfcut(bell(), 0)
    with pytest.raises(ValueError):
        renyi2_halfcut(2 * bell())


def test_trace_distance():
    a = np.diag([1.0, 0.0])
    b = np.diag([0.0, 1.0])
    assert trace_distance(a, b) == pytest.approx(1.0)
    assert trace_distance(a, a) == 0.0
