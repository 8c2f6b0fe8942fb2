"""Input validation helpers shared by the functional modules and estimators."""

from __future__ import annotations

import numpy as np

STATE_TOL = 1e-10


def n_sites(dim: int) -> int:
    """Number of qubits for a Hilbert-space dimension; rejects non powers of two."""
    L = int(dim).bit_length() - 1
    if dim < 1 or 2 ** L != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return L


def check_square(H, name: str = "H") -> np.ndarray:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ValueError(f"{name} contains non-finite entries")
    return H


def check_pure_state(psi, dim: int | None = None, normalized: bool = True) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValueError(f"state vector must be 1-d, got shape {psi.shape}")
    if dim is not None and psi.size != dim:
        raise ValueError(f"state has dimension {psi.size}, expected {dim}")
    norm = np.linalg.norm(psi)
    if normalized and abs(norm - 1.0) > 1e-8:
        raise ValueError(f"state is not normalized (norm = {norm:.3g})")
    if norm == 0:
        raise ValueError("zero state vector")
    return psi


def check_density_matrix(rho, dim: int | None = None, tol: float = STATE_TOL) -> np.ndarray:
    """Raise unless ``rho`` is Hermitian, PSD and has unit trace (all within ``tol``)."""
    rho = check_square(rho, "rho")
    if dim is not None and rho.shape[0] != dim:
        raise ValueError(f"rho has dimension {rho.shape[0]}, expected {dim}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol:
        raise ValueError(f"rho is not Hermitian (max deviation {herm:.2e})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise ValueError(f"rho does not have unit trace (trace = {tr!r})")
    lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lowest < -tol:
        raise ValueError(f"rho is not positive semidefinite (min eigenvalue {lowest:.2e})")
    return rho


def check_times(times) -> np.ndarray:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.ndim != 1:
        raise ValueError("times must be one-dimensional")
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be ascending")
    return times
