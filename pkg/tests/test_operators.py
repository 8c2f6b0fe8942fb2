import numpy as np
import pytest

from ptsim.operators import (
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    embed,
    pauli,
    spin_configurations,
    two_site_zz,
    z_diagonal,
)


def test_pauli_algebra():
    I = np.eye(2)
    for s in (SIGMA_X, SIGMA_Y, SIGMA_Z):
        np.testing.assert_allclose(s @ s, I)
    np.testing.assert_allclose(SIGMA_X @ SIGMA_Y, 1j * SIGMA_Z)
    np.testing.assert_allclose((SIGMA_X + 1j * SIGMA_Y) / 2, SIGMA_PLUS)


def test_site_zero_is_most_significant_bit():
    # |0 1> has index 1: site 0 up, site 1 down
    Z0, Z1 = pauli("z", 0, 2), pauli("z", 1, 2)
    assert Z0[1, 1] == 1 and Z1[1, 1] == -1
    np.testing.assert_allclose(Z0, np.kron(SIGMA_Z, np.eye(2)))


@pytest.mark.parametrize("L", [1, 2, 3, 5])
def test_embedded_paulis_commute_across_sites(L):
    for i in range(L):
        for j in range(L):
            X, Z = pauli("x", i, L), pauli("z", j, L)
            comm = X @ Z - Z @ X
            if i == j:
                assert np.max(np.abs(comm)) > 1
            else:
                assert np.max(np.abs(comm)) == 0


def test_z_diagonal_matches_dense():
    for L in (1, 3, 4):
        for i in range(L):
            np.testing.assert_array_equal(z_diagonal(i, L), np.real(np.diag(pauli("z", i, L))))


def test_two_site_zz():
    L = 4
    np.testing.assert_allclose(two_site_zz(1, 3, L), pauli("z", 1, L) @ pauli("z", 3, L))
    with pytest.raises(ValueError):
        two_site_zz(2, 2, L)
    with pytest.raises(ValueError):
        two_site_zz(0, 4, L)


def test_errors():
    with pytest.raises(ValueError):
        pauli("w", 0, 2)
    with pytest.raises(ValueError):
        embed(SIGMA_X, 3, 3)
    with pytest.raises(ValueError):
        pauli("x", 0, 0)


def test_spin_configurations():
    c = spin_configurations(3)
    assert c.shape == (8, 3)
    np.testing.assert_array_equal(c[0], [1, 1, 1])
    np.testing.assert_array_equal(c[5], [-1, 1, -1])
