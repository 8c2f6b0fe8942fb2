"""Normalized time evolution under T(t) = exp(-i H t).

Non-unitary evolution grows or shrinks norms exponentially, so every
routine here works with a rescaled propagator and reports the discarded
normalization separately as ``norm_log`` (natural log of ``|T(t) psi0|``
for pure states, of ``Tr T rho0 T^dagger`` for mixed ones).

Two propagator paths exist: the eigen path ``P diag(exp(-i lambda t)) P^-1``
and a scaling-and-squaring matrix exponential of ``H`` itself.  The eigen
path is used while the eigenvector matrix has condition number below
``EIGEN_PATH_MAX_CONDITION``.
"""

from __future__ import annotations

import csv
from typing import Iterator, Optional

import numpy as np
import scipy.linalg as sla

from ptsim.spectral import SpectralData
from ptsim.states import maximally_mixed, purity, renyi2_halfcut  # noqa: F401  (re-exported)
from ptsim.validation import check_density_matrix, check_pure_state, check_times

EIGEN_PATH_MAX_CONDITION = 1e8
ORDERINGS = ("TTdag", "TdagT")


def _dominant_rate(s: SpectralData) -> float:
    return float(np.max(s.eigenvalues.imag))


def choose_method(s: SpectralData, method: str = "auto") -> str:
    if method not in ("auto", "eigen", "expm"):
        raise ValueError(f"method must be 'auto', 'eigen' or 'expm', got {method!r}")
    if method == "eigen" and not np.isfinite(s.residual):
        raise ValueError("no valid eigendecomposition (defective matrix); use method='expm'")
    if method != "auto":
        return method
    if not np.isfinite(s.residual):
        return "expm"
    return "eigen" if s.condition < EIGEN_PATH_MAX_CONDITION else "expm"


def propagator(s: SpectralData, t: float, method: str = "auto", shift: Optional[float] = None) -> np.ndarray:
    """exp(-i H t) * exp(-shift * t).

    ``shift`` defaults to the largest imaginary eigenvalue part, so the
    dominant mode keeps unit modulus and nothing overflows.  Pass
    ``shift=0`` for the bare propagator.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    mu = _dominant_rate(s) if shift is None else float(shift)
    method = choose_method(s, method)
    if method == "eigen":
        phases = np.exp(-1j * s.eigenvalues * t - mu * t)
        T = (s.P * phases) @ s.P_inv
    else:
        A = -1j * (s.hamiltonian - 1j * mu * np.eye(s.dim)) * t
        T = sla.expm(A)
    if not np.all(np.isfinite(T)):
        raise FloatingPointError(f"propagator overflowed at t={t} via the {method} path")
    return T


def _log_weights(c: np.ndarray, lam: np.ndarray, t: float) -> np.ndarray:
    """c_k exp(-i lambda_k t), rescaled so the largest magnitude is 1; returns (vec, log scale)."""
    mag = np.abs(c)
    nz = mag > 0
    logs = np.full(c.shape, -np.inf)
    logs[nz] = np.log(mag[nz]) + lam.imag[nz] * t
    top = np.max(logs)
    out = np.zeros_like(c, dtype=complex)
    out[nz] = np.exp(logs[nz] - top) * np.exp(1j * (np.angle(c[nz]) - lam.real[nz] * t))
    return out, top


def evolve_pure(psi0, s: SpectralData, times, method: str = "auto", return_norm_log: bool = False):
    """Normalized states T(t) psi0 / |T(t) psi0| at each time.

    Returns an array of shape ``(len(times), dim)``; with
    ``return_norm_log=True`` also the natural log of ``|T(t) psi0|``.
    """
    psi0 = check_pure_state(psi0, s.dim, normalized=False)
    times = check_times(times)
    method = choose_method(s, method)
    states = np.empty((times.size, s.dim), dtype=complex)
    norm_log = np.empty(times.size)

    if method == "eigen":
        c = s.P_inv @ psi0
        for k, t in enumerate(times):
            coeff, scale = _log_weights(c, s.eigenvalues, t)
            psi = s.P @ coeff
            nrm = np.linalg.norm(psi)
            if nrm == 0 or not np.isfinite(nrm):
                raise FloatingPointError(f"state norm underflow at t={t}")
            states[k] = psi / nrm
            norm_log[k] = scale + np.log(nrm)
    else:
        psi, acc, t_prev = psi0.astype(complex), 0.0, 0.0
        mu = _dominant_rate(s)
        for k, t in enumerate(times):
            dt = t - t_prev
            if dt > 0:
                psi = propagator(s, dt, "expm", shift=mu) @ psi
                acc += mu * dt
            nrm = np.linalg.norm(psi)
            if nrm == 0 or not np.isfinite(nrm):
                raise FloatingPointError(f"state norm underflow at t={t}")
            psi = psi / nrm
            acc += np.log(nrm)
            states[k] = psi
            norm_log[k] = acc
            t_prev = t
    if return_norm_log:
        return states, norm_log
    return states


def iter_mixed(rho0, s: SpectralData, times, method: str = "auto", ordering: str = "TTdag") -> Iterator:
    """Yield ``(t, rho(t), norm_log)`` with rho(t) normalized to unit trace.

    ``ordering='TTdag'`` gives T rho0 T^dagger (state evolution);
    ``'TdagT'`` gives T^dagger rho0 T.
    """
    if ordering not in ORDERINGS:
        raise ValueError(f"ordering must be one of {ORDERINGS}, got {ordering!r}")
    if rho0 is None:
        rho0 = maximally_mixed(s.n_sites)
    rho0 = check_density_matrix(rho0, s.dim, tol=1e-8)
    times = check_times(times)
    method = choose_method(s, method)
    mu = _dominant_rate(s)
    for t in times:
        T = propagator(s, t, method, shift=mu)
        if ordering == "TTdag":
            rho = T @ rho0 @ T.conj().T
        else:
            rho = T.conj().T @ rho0 @ T
        tr = np.trace(rho).real
        if tr <= 0 or not np.isfinite(tr):
            raise FloatingPointError(f"density-matrix trace underflow at t={t}")
        rho = rho / tr
        yield t, 0.5 * (rho + rho.conj().T), 2 * mu * t + np.log(tr)


def evolve_mixed(rho0, s: SpectralData, times, method: str = "auto", ordering: str = "TTdag"):
    """List of normalized density matrices rho(t); default rho0 = I / 2^L."""
    return [rho for _, rho, _ in iter_mixed(rho0, s, times, method, ordering)]


def purity_series(s: SpectralData, times, rho0=None, method: str = "auto", ordering: str = "TTdag"):
    """Purity and norm_log of the evolving mixed state, without storing matrices."""
    out = [(purity(rho), nl) for _, rho, nl in iter_mixed(rho0, s, times, method, ordering)]
    arr = np.array(out).reshape(-1, 2)
    return arr[:, 0], arr[:, 1]


def entropy_series(psi0, s: SpectralData, times, cut: Optional[int] = None, method: str = "auto"):
    """Half-cut S2 and norm_log along a pure trajectory."""
    states, norm_log = evolve_pure(psi0, s, times, method, return_norm_log=True)
    return np.array([renyi2_halfcut(psi, cut) for psi in states]), norm_log


def return_probability(psi0, s: SpectralData, times, target=None, method: str = "auto") -> np.ndarray:
    """|<target|psi(t)>|^2 for the normalized trajectory; target defaults to psi0."""
    psi0 = np.asarray(psi0, dtype=complex)
    target = psi0 if target is None else np.asarray(target, dtype=complex)
    states = evolve_pure(psi0, s, times, method)
    return np.abs(states @ target.conj()) ** 2


def energy_expectation(psi, H) -> complex:
    psi = np.asarray(psi)
    return complex(psi.conj() @ (H @ psi) / (psi.conj() @ psi))


def log_time_grid(t_min: float, t_max: float, n: int, include_zero: bool = True) -> np.ndarray:
    """Logarithmically spaced times, optionally prefixed by t = 0."""
    grid = np.geomspace(t_min, t_max, n)
    return np.concatenate(([0.0], grid)) if include_zero else grid


# Two-level closed forms ----------------------------------------------------

def tls_eigenvalues(b: float) -> np.ndarray:
    """i b +- sqrt(1 - b^2) (complex sqrt beyond the exceptional point)."""
    r = np.sqrt(complex(1.0 - b * b))
    return np.array([1j * b + r, 1j * b - r])


def tls_spectrum(b: float) -> SpectralData:
    """Spectral data of the two-level Hamiltonian, usable at the exceptional point.

    At |b| = 1 the matrix is defective; the returned object then carries a
    placeholder eigenvector matrix and only the ``'expm'`` path is valid.
    """
    from ptsim.hamiltonians import build_tls
    from ptsim.spectral import decompose

    H = build_tls(b)
    if abs(abs(b) - 1.0) > 1e-6:
        return decompose(H)
    return SpectralData(
        eigenvalues=np.array([1j * b, 1j * b]), P=np.eye(2, dtype=complex), hamiltonian=H,
        residual=float("inf"), norm=float(np.linalg.norm(H)), imag_offset=b,
    )


def tls_gap(b: float) -> float:
    return float(2.0 * np.sqrt(b * b - 1.0)) if abs(b) > 1 else 0.0


def tls_steady_purity(b: float) -> float:
    return 0.5 * (1.0 + b * b) if abs(b) < 1 else 1.0


def tls_sigma_z(b: float) -> float:
    return -abs(b)


def tls_revival_scale(b: float) -> float:
    """1 / [2 sqrt(2 (1 - b))]: inverse splitting of the two levels near b = 1.

    The return probability is periodic in time with period 2*pi times this.
    """
    return 1.0 / (2.0 * np.sqrt(2.0 * (1.0 - b)))


def tls_exceptional_state(theta: float, t: float) -> np.ndarray:
    """Unnormalized state at b = 1 with the growth factor e^t removed.

    At the exceptional point H - i = [[0, 2], [0, 0]] is nilpotent, so
    exp(-i (H - i) t) = 1 - 2 i t sigma^+, giving (cos th - 2 i t sin th, sin th).
    """
    return np.array([np.cos(theta) - 2j * t * np.sin(theta), np.sin(theta)])


def write_timeseries_csv(path, times, purity=None, s2=None, norm_log=None) -> None:
    """CSV with columns t, purity, S2, norm_log; missing series are left empty."""
    n = len(times)
    cols = [purity, s2, norm_log]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "purity", "S2", "norm_log"])
        for k in range(n):
            row = [format(float(times[k]), ".17g")]
            for col in cols:
                row.append("" if col is None else format(float(col[k]), ".17g"))
            w.writerow(row)
