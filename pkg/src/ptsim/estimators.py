"""Estimator-style wrappers around the chain and two-level pipelines.

``fit`` builds the Hamiltonian for the constructor parameters and
eigendecomposes it; ``transform`` expresses state vectors in the
(non-orthogonal) right-eigenvector basis and ``inverse_transform`` maps
coefficients back.  Hyperparameters follow the scikit-learn conventions,
so ``get_params`` / ``set_params`` / ``clone`` work unchanged.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ptsim import dynamics, spectral
from ptsim.hamiltonians import ChainParameters, build_chain, build_tls, sample_couplings, sample_fields
from ptsim.steady_state import SteadyStateResult, steady_state
from ptsim.validation import check_pure_state


class _SpectralEstimator(TransformerMixin, BaseEstimator):
    """Shared transform / dynamics methods; subclasses implement ``_hamiltonian``."""

    ordering = "TdagT"

    def _hamiltonian(self, X):
        raise NotImplementedError

    def fit(self, X=None, y=None):
        H = self._hamiltonian(X)
        self.hamiltonian_ = H
        self.spectrum_ = spectral.decompose(H)
        self.eigenvalues_ = self.spectrum_.eigenvalues
        self.gap_ = spectral.purification_gap(self.spectrum_)
        self.phase_ = spectral.classify_pt(self.spectrum_)
        self.n_features_in_ = H.shape[0]
        return self

    def _states(self, X):
        check_is_fitted(self, "spectrum_")
        X = np.asarray(X, dtype=complex)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected states of dimension {self.n_features_in_}, got {X.shape[1]}")
        return X, single

    def transform(self, X):
        """Eigenbasis coefficients c = P^-1 psi for each row psi of X."""
        X, single = self._states(X)
        C = X @ self.spectrum_.P_inv.T
        return C[0] if single else C

    def inverse_transform(self, C):
        """Rows P c back in the computational basis."""
        C, single = self._states(C)
        X = C @ self.spectrum_.P.T
        return X[0] if single else X

    def evolve(self, psi0, times, method: str = "auto", return_norm_log: bool = False):
        check_is_fitted(self, "spectrum_")
        psi0 = check_pure_state(psi0, self.n_features_in_, normalized=False)
        return dynamics.evolve_pure(psi0, self.spectrum_, times, method, return_norm_log)

    def purity_series(self, times, rho0=None, method: str = "auto"):
        check_is_fitted(self, "spectrum_")
        return dynamics.purity_series(self.spectrum_, times, rho0, method)

    def steady_state(self, histogram_bins: Optional[int] = None) -> SteadyStateResult:
        check_is_fitted(self, "spectrum_")
        return steady_state(self.spectrum_, self.ordering, histogram_bins)

    def effective_dimension(self, weights: str = "squared") -> float:
        check_is_fitted(self, "spectrum_")
        return spectral.effective_dimension(self.spectrum_, weights)


class NonHermitianChain(_SpectralEstimator):
    """Disordered Ising chain under continuous weak measurement.

    Parameters
    ----------
    L, h0, epsilon, g, gamma, J, coupling_disorder, boundary, seed
        Same meaning as in :class:`ptsim.hamiltonians.ChainParameters`.

    Attributes
    ----------
    fields_, couplings_ : ndarray
        Disorder realization used by the last ``fit``.
    hamiltonian_ : ndarray
    spectrum_ : SpectralData
    gap_ : float
        Purification gap, zero in the mixed phase.
    phase_ : {'mixed', 'pure'}

    Notes
    -----
    ``fit(X)`` accepts an optional array of explicit longitudinal fields in
    place of sampling them from ``(h0, epsilon, seed)``.
    """

    def __init__(
        self,
        L: int = 8,
        h0: float = 1.25,
        epsilon: float = 0.0,
        g: float = 1.0,
        gamma: float = 0.0,
        J: float = 0.95,
        coupling_disorder: float = 0.0,
        boundary: str = "open",
        seed: int = 0,
    ):
        self.L = L
        self.h0 = h0
        self.epsilon = epsilon
        self.g = g
        self.gamma = gamma
        self.J = J
        self.coupling_disorder = coupling_disorder
        self.boundary = boundary
        self.seed = seed

    def parameters(self) -> ChainParameters:
        return ChainParameters(**self.get_params())

    def _hamiltonian(self, X):
        p = self.parameters()
        if X is None:
            fields = sample_fields(p)
        else:
            fields = np.asarray(X, dtype=float).ravel()
            if fields.size != p.L:
                raise ValueError(f"expected {p.L} fields, got {fields.size}")
        self.fields_ = fields
        self.couplings_ = sample_couplings(p)
        return build_chain(p, fields, self.couplings_)

    def level_statistics(self, bins: int = 50) -> spectral.LevelStatistics:
        check_is_fitted(self, "spectrum_")
        return spectral.r_statistics(self.spectrum_, bins)

    def entropy_profile(self, cut: Optional[int] = None) -> np.ndarray:
        check_is_fitted(self, "spectrum_")
        return spectral.eigenstate_entropy_profile(self.spectrum_, cut)


class TwoLevelSystem(_SpectralEstimator):
    """Single measured qubit with Hamiltonian [[i b, 1 + b], [1 - b, i b]]."""

    def __init__(self, b: float = 0.5):
        self.b = b

    def _hamiltonian(self, X):
        return build_tls(float(self.b))
