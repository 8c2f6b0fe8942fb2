import warnings

import numpy as np
import pytest

from ptsim.hamiltonians import ChainParameters, build_chain, build_tls
from ptsim.spectral import decompose
from ptsim.states import purity, trace_distance
from ptsim.steady_state import (
    PhaseError,
    diagonal_ensemble,
    eigenvalue_histogram,
    long_time_average_oracle,
    pure_phase_steady_state,
    purity_scaling_fit,
    read_rho_binary,
    site_averaged_sigma_z,
    steady_state,
    write_rho_binary,
)


@pytest.mark.parametrize("b", [0.1, 0.5, 0.9])
def test_tls_closed_forms(b):
    res = diagonal_ensemble(decompose(build_tls(b)))
    assert res.purity == pytest.approx((1 + b * b) / 2, abs=1e-12)
    assert res.sigma_z_mean == pytest.approx(-b, abs=1e-12)


def test_orderings_share_purity_but_flip_magnetization():
    s = decompose(build_tls(0.4))
    a, b = diagonal_ensemble(s, "TdagT"), diagonal_ensemble(s, "TTdag")
    assert a.purity == pytest.approx(b.purity)
    assert a.sigma_z_mean == pytest.approx(-b.sigma_z_mean)
    with pytest.raises(ValueError):
        diagonal_ensemble(s, "TT")


def test_hermitian_limit_is_maximally_mixed():
    s = decompose(build_chain(ChainParameters(L=4, epsilon=0.1, seed=0)))
    res = diagonal_ensemble(s)
    np.testing.assert_allclose(res.rho_ss, np.eye(16) / 16, atol=1e-12)


@pytest.mark.parametrize("ordering", ["TdagT", "TTdag"])
def test_matches_brute_force_time_average(ordering):
    s = decompose(build_chain(ChainParameters(L=3, epsilon=0.1, gamma=0.3, seed=2)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = diagonal_ensemble(s, ordering)
    ref = long_time_average_oracle(s, 2000.0, 4000, ordering=ordering)
    assert trace_distance(res.rho_ss, ref) < 1e-2


def test_tls_brute_force_average():
    s = decompose(build_tls(0.6))
    ref = long_time_average_oracle(s, 3000.0, 6000)
    assert purity(ref) == pytest.approx((1 + 0.36) / 2, abs=1e-3)


def test_pure_phase():
    s = decompose(build_tls(2.0))
    with pytest.raises(PhaseError):
        diagonal_ensemble(s)
    res = steady_state(s)
    assert res.phase == "pure" and res.purity == pytest.approx(1.0)
    # T^dagger T at late times projects on the dominant left eigenvector
    v = np.linalg.eig(s.hamiltonian.conj().T)[1]
    w = np.linalg.eigvals(s.hamiltonian.conj().T)
    left = v[:, np.argmin(w.imag)]
    assert abs(np.vdot(left, res.rho_ss @ left)) == pytest.approx(1.0)
    assert pure_phase_steady_state(s, "TTdag").purity == pytest.approx(1.0)


def test_degenerate_real_parts_keep_cross_terms():
    # two identical uncoupled spins: lambda_a + lambda_b = lambda_b + lambda_a
    s = decompose(build_chain(ChainParameters(L=2, J=0.0, gamma=0.2)))
    with pytest.warns(UserWarning, match="coinciding real parts"):
        res = diagonal_ensemble(s)
    assert res.merged_blocks > 0
    assert np.linalg.eigvalsh(res.rho_ss).min() > -1e-10
    ref = long_time_average_oracle(s, 2000.0, 4000)
    assert trace_distance(res.rho_ss, ref) < 1e-2


def test_histogram_and_sigma_z():
    rho = np.diag([0.5, 0.25, 0.25, 0.0])
    h = eigenvalue_histogram(rho, bins=10)
    assert h.counts.sum() + h.n_below == 4 and h.n_below == 1
    assert site_averaged_sigma_z(np.diag([1.0, 0, 0, 0])) == 1.0
    assert site_averaged_sigma_z(np.diag([0, 1.0, 0, 0])) == 0.0


def test_purity_scaling_fit():
    c = purity_scaling_fit([(L, 2.0 ** (-0.8 * L)) for L in (6, 8, 10)])
    assert c == pytest.approx(0.8)
    with pytest.raises(ValueError):
        purity_scaling_fit([(6, 0.1), (8, 0.01)])


def test_rho_binary_round_trip(tmp_path):
    rho = np.array([[0.5, 0.1j], [-0.1j, 0.5]])
    path = tmp_path / "rho.bin"
    write_rho_binary(path, rho)
    raw = path.read_bytes()
    assert raw[:5] == b"RHOSS" and len(raw) == 16 + 4 * 16
    np.testing.assert_array_equal(read_rho_binary(path), rho)
    (tmp_path / "bad.bin").write_bytes(b"nope")
    with pytest.raises(ValueError):
        read_rho_binary(tmp_path / "bad.bin")
