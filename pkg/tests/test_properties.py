"""Randomized invariants (hypothesis, 100 cases each)."""

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from ptsim.dynamics import evolve_mixed, propagator
from ptsim.hamiltonians import ChainParameters, build_chain, sample_couplings, sample_fields
from ptsim.operators import pauli
from ptsim.scan import ScanSpec, run_scan
from ptsim.spectral import decompose
from ptsim.states import renyi2_halfcut

SETTINGS = settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])

chains = st.builds(
    ChainParameters,
    L=st.integers(1, 4),
    h0=st.floats(0.5, 1.5),
    epsilon=st.floats(0.0, 0.05),
    g=st.floats(0.5, 1.5),
    gamma=st.floats(0.0, 2.5),
    J=st.floats(0.0, 2.0),
    coupling_disorder=st.floats(0.0, 0.05),
    boundary=st.sampled_from(["open", "periodic"]),
    seed=st.integers(0, 2 ** 63),
)


def _decomposable(p):
    s = decompose(build_chain(p))
    return s if s.condition < 1e8 else None


@SETTINGS
@given(chains, st.floats(0.0, 20.0))
def test_evolved_density_matrix_is_physical(p, t):
    s = _decomposable(p)
    if s is None:
        return
    (rho,) = evolve_mixed(None, s, [t])
    assert abs(np.trace(rho).real - 1) < 1e-10
    assert np.max(np.abs(rho - rho.conj().T)) < 1e-12
    assert np.linalg.eigvalsh(rho).min() > -1e-9


@SETTINGS
@given(chains)
def test_eigendecomposition_residual(p):
    s = decompose(build_chain(p))
    r = np.max(np.linalg.norm(s.hamiltonian @ s.P - s.P * s.eigenvalues, axis=0))
    assert r <= 1e-8 * s.norm


@SETTINGS
@given(chains, st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_semigroup(p, a, b):
    s = decompose(build_chain(p))
    Tab = propagator(s, a + b, "expm")
    TaTb = propagator(s, a, "expm") @ propagator(s, b, "expm")
    assert np.max(np.abs(Tab - TaTb)) < 1e-8 * max(1.0, np.max(np.abs(Tab)))


@SETTINGS
@given(st.integers(2, 7), st.data())
def test_schmidt_symmetry(L, data):
    seed = data.draw(st.integers(0, 2 ** 32))
    cut = data.draw(st.integers(1, L - 1))
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=2 ** L) + 1j * rng.normal(size=2 ** L)
    psi /= np.linalg.norm(psi)
    # entropy of the complement: move the last L-cut sites to the front
    M = psi.reshape(2 ** cut, 2 ** (L - cut)).T.reshape(-1)
    assert abs(renyi2_halfcut(psi, cut) - renyi2_halfcut(M, L - cut)) < 1e-10


@SETTINGS
@given(chains)
def test_spectrum_conjugates_under_gamma_reversal(p):
    w = np.linalg.eigvals(build_chain(p))
    # H(-gamma) assembled independently from Pauli matrices
    L, fields, Jb = p.L, sample_fields(p), sample_couplings(p)
    H = -1j * p.gamma * L * np.eye(2 ** L, dtype=complex)
    for i in range(L):
        H += fields[i] * pauli("z", i, L) + p.g * pauli("x", i, L) - 1j * p.gamma * pauli("y", i, L)
    bonds = [(i, (i + 1) % L) for i in range(L - 1 if p.boundary == "open" or L <= 2 else L)]
    for c, (i, j) in zip(Jb, bonds):
        H += c * pauli("z", i, L) @ pauli("z", j, L)
    wm = np.linalg.eigvals(H)
    a = np.sort_complex(np.round(np.conj(w), 6))
    b = np.sort_complex(np.round(wm, 6))
    # compare as multisets with a tolerance-friendly matching
    cost = np.abs(np.conj(w)[:, None] - wm[None, :])
    from scipy.optimize import linear_sum_assignment

    r, c = linear_sum_assignment(cost)
    assert cost[r, c].max() < 1e-6 * max(1.0, np.abs(w).max()), (a, b)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.sampled_from([0.0, 0.3, 0.8, 1.5]), min_size=1, max_size=2, unique=True),
    st.integers(0, 2 ** 63),
    st.integers(1, 2),
)
def test_scan_determinism(gammas, seed, n_real):
    spec = ScanSpec(gamma_grid=gammas, J_grid=[0.95], L_list=[2, 3], n_realizations=n_real,
                    epsilon=0.1, base_seed=seed, observables=["gap", "purity_ss", "d_eff"])
    a = [r.row() for r in run_scan(spec)]
    b = [r.row() for r in run_scan(spec)]
    assert a == b


@SETTINGS
@given(chains, st.integers(0, 2 ** 32))
def test_effective_dimension_invariant_under_reference_unitary(p, seed):
    from scipy.stats import unitary_group

    from ptsim.spectral import effective_dimension

    s = decompose(build_chain(p))
    U = unitary_group.rvs(s.dim, random_state=seed) if s.dim > 1 else np.eye(1)
    rotated = np.linalg.svd(U @ s.P, compute_uv=False)
    assert abs(effective_dimension(rotated) - effective_dimension(s)) < 1e-9 * s.dim


@SETTINGS
@given(
    st.lists(st.floats(-100, 100), min_size=3, max_size=60, unique=True),
    st.floats(0.01, 100.0),
    st.floats(-100.0, 100.0),
)
def test_spacing_ratios_bounded_and_affine_invariant(levels, a, c):
    from ptsim.spectral import MERGE_TOL, spacing_ratios

    x = np.sort(np.array(levels))
    if np.min(np.diff(x)) < 1e-6:
        return
    r = spacing_ratios(x)
    assert np.all((r >= 0) & (r <= 1))
    r2 = spacing_ratios(a * x + c)
    if a * np.min(np.diff(x)) > 1e3 * MERGE_TOL:
        np.testing.assert_allclose(r2, r, atol=1e-6)
