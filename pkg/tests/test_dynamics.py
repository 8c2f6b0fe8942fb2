import numpy as np
import pytest
import scipy.linalg as sla

from ptsim.dynamics import (
    choose_method,
    entropy_series,
    evolve_mixed,
    evolve_pure,
    log_time_grid,
    propagator,
    purity_series,
    return_probability,
    tls_eigenvalues,
    tls_exceptional_state,
    tls_gap,
    tls_revival_scale,
    tls_spectrum,
    tls_steady_purity,
    write_timeseries_csv,
)
from ptsim.hamiltonians import ChainParameters, build_chain, build_tls
from ptsim.spectral import decompose, purification_gap
from ptsim.states import purity, random_product_state


@pytest.fixture(scope="module")
def chain():
    return decompose(build_chain(ChainParameters(L=5, epsilon=0.1, gamma=0.3, seed=1)))


def test_eigen_and_expm_paths_agree(chain):
    for t in (0.0, 0.7, 5.0):
        np.testing.assert_allclose(propagator(chain, t, "eigen"), propagator(chain, t, "expm"), atol=1e-9)


def test_bare_propagator_matches_scipy(chain):
    t = 0.4
    np.testing.assert_allclose(propagator(chain, t, shift=0.0), sla.expm(-1j * chain.hamiltonian * t), atol=1e-9)


def test_semigroup(chain):
    a, b = 0.8, 1.9
    np.testing.assert_allclose(
        propagator(chain, a + b), propagator(chain, a) @ propagator(chain, b), atol=1e-9
    )


def test_pure_evolution_norm_log(chain, rng):
    psi0 = random_product_state(5, rng)
    times = [0.0, 0.5, 2.0]
    states, nl = evolve_pure(psi0, chain, times, return_norm_log=True)
    for t, psi, n in zip(times, states, nl):
        raw = sla.expm(-1j * chain.hamiltonian * t) @ psi0
        assert n == pytest.approx(np.log(np.linalg.norm(raw)), rel=1e-10)
        assert abs(abs(np.vdot(raw / np.linalg.norm(raw), psi)) - 1) < 1e-10
    s2 = evolve_pure(psi0, chain, times, method="expm")
    np.testing.assert_allclose(np.abs(np.sum(s2.conj() * states, axis=1)), 1.0, atol=1e-9)


def test_mixed_states_are_density_matrices(chain):
    for rho in evolve_mixed(None, chain, [0.0, 1.0, 10.0]):
        assert np.trace(rho).real == pytest.approx(1.0)
        np.testing.assert_allclose(rho, rho.conj().T, atol=1e-14)
        assert np.linalg.eigvalsh(rho).min() > -1e-12


def test_tls_closed_forms():
    for b in (0.3, 0.8):
        w = np.linalg.eigvals(build_tls(b))
        np.testing.assert_allclose(np.sort(w.real), np.sort(tls_eigenvalues(b).real), atol=1e-12)
    assert tls_gap(2.0) == pytest.approx(2 * np.sqrt(3))
    assert tls_gap(0.5) == 0.0
    assert tls_steady_purity(0.5) == 0.625
    assert tls_revival_scale(1 - 1 / 200) == pytest.approx(5.0)


def test_exceptional_point_state():
    s = tls_spectrum(1.0)
    assert choose_method(s) == "expm"
    with pytest.raises(ValueError):
        choose_method(s, "eigen")
    theta = 0.4
    psi0 = np.array([np.cos(theta), np.sin(theta)])
    times = np.array([0.0, 1.0, 7.5])
    states = evolve_pure(psi0, s, times)
    for t, psi in zip(times, states):
        ref = tls_exceptional_state(theta, t)
        assert abs(abs(np.vdot(ref / np.linalg.norm(ref), psi)) - 1) < 1e-10


def test_pure_phase_purification_rate_is_twice_gap():
    s = decompose(build_tls(2.0))
    times = np.linspace(0.5, 3.0, 30)
    pur, _ = purity_series(s, times)
    slope = np.polyfit(times[10:], np.log(1 - pur[10:]), 1)[0]
    assert -slope == pytest.approx(2 * purification_gap(s), rel=0.01)


def test_return_probability_periodic_in_mixed_phase():
    b = 0.6
    s = decompose(build_tls(b))
    period = 2 * np.pi / (2 * np.sqrt(1 - b * b))
    p = return_probability([1.0, 0.0], s, [0.0, period, 2 * period])
    np.testing.assert_allclose(p, 1.0, atol=1e-10)


def test_entropy_series_starts_at_zero(chain, rng):
    psi0 = random_product_state(5, rng)
    s2, _ = entropy_series(psi0, chain, [0.0, 3.0])
    assert abs(s2[0]) < 1e-12 and s2[1] > 0.01


def test_invalid_inputs(chain):
    with pytest.raises(ValueError):
        propagator(chain, -1.0)
    with pytest.raises(ValueError):
        evolve_pure(np.ones(3), chain, [0.0])
    with pytest.raises(ValueError):
        evolve_mixed(np.eye(32), chain, [0.0])
    with pytest.raises(ValueError):
        choose_method(chain, "magic")


def test_log_grid_and_csv(tmp_path):
    grid = log_time_grid(0.1, 10, 3)
    np.testing.assert_allclose(grid, [0.0, 0.1, 1.0, 10.0])
    path = tmp_path / "ts.csv"
    write_timeseries_csv(path, [0.0, 1.0], purity=[1.0, 0.5])
    lines = path.read_text().splitlines()
    assert lines[0] == "t,purity,S2,norm_log"
    assert lines[2] == "1,0.5,,"


def test_purity_of_maximally_mixed_start(chain):
    pur, nl = purity_series(chain, [0.0])
    assert pur[0] == pytest.approx(1 / 32)
    assert nl[0] == pytest.approx(0.0, abs=1e-14)
    assert purity(np.eye(2) / 2) == 0.5
