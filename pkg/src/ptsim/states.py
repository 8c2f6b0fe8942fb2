"""Purity, partial traces and Renyi-2 entropies on qubit registers.

States are plain numpy arrays: a pure state is a length-2^L complex vector,
a density matrix a (2^L, 2^L) complex array.  Subsystem A is always the
leading block of sites ``[0, cut)`` (most significant bits).  Entropies are
in bits (log base 2).
"""

from __future__ import annotations

import numpy as np

from ptsim.validation import check_pure_state, n_sites


def purity(rho) -> float:
    """Tr(rho^2) / (Tr rho)^2, valid for unnormalized Hermitian input."""
    rho = np.asarray(rho)
    tr = np.trace(rho).real
    if tr == 0 or not np.isfinite(tr):
        raise ValueError("purity undefined for zero-trace input")
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(rho) ** 2) / tr ** 2)


def _split(psi: np.ndarray, cut: int, L: int) -> np.ndarray:
    return psi.reshape(2 ** cut, 2 ** (L - cut))


def reduced_density_matrix(psi, cut: int) -> np.ndarray:
    """rho_A for sites [0, cut) of a pure state."""
    psi = np.asarray(psi, dtype=complex)
    L = n_sites(psi.size)
    if not 0 <= cut <= L:
        raise ValueError(f"cut {cut} out of range for L={L}")
    M = _split(psi, cut, L)
    return M @ M.conj().T


def partial_trace(rho, keep: int) -> np.ndarray:
    """Trace out sites [keep, L) of a density matrix."""
    rho = np.asarray(rho)
    L = n_sites(rho.shape[0])
    if not 0 <= keep <= L:
        raise ValueError(f"keep {keep} out of range for L={L}")
    da, db = 2 ** keep, 2 ** (L - keep)
    return np.einsum("ajbj->ab", rho.reshape(da, db, da, db))


def renyi2_halfcut(psi, cut: int | None = None) -> float:
    """S2 = -log2 Tr(rho_A^2) for A = sites [0, cut); default cut = L // 2."""
    psi = check_pure_state(psi)
    L = n_sites(psi.size)
    if cut is None:
        cut = L // 2
    if not 1 <= cut <= L - 1:
        raise ValueError(f"cut must satisfy 1 <= cut <= L-1, got cut={cut}, L={L}")
    M = _split(psi, cut, L)
    # Tr(rho_A^2) via the smaller Gram matrix
    G = M @ M.conj().T if M.shape[0] <= M.shape[1] else M.conj().T @ M
    return float(-np.log2(np.sum(np.abs(G) ** 2)))


def renyi2_columns(V: np.ndarray, cut: int) -> np.ndarray:
    """Renyi-2 entropy of every column of ``V`` (columns are normalized first)."""
    V = np.asarray(V)
    L = n_sites(V.shape[0])
    if not 1 <= cut <= L - 1:
        raise ValueError(f"cut must satisfy 1 <= cut <= L-1, got cut={cut}, L={L}")
    V = V / np.linalg.norm(V, axis=0)
    M = V.reshape(2 ** cut, 2 ** (L - cut), V.shape[1])
    if 2 ** cut <= 2 ** (L - cut):
        G = np.einsum("ajk,bjk->abk", M, M.conj())
    else:
        G = np.einsum("jak,jbk->abk", M.conj(), M)
    return -np.log2(np.sum(np.abs(G) ** 2, axis=(0, 1)))


def random_product_state(L: int, rng=None) -> np.ndarray:
    """Tensor product of Haar-random single-qubit states."""
    rng = np.random.default_rng(rng)
    psi = np.ones(1, dtype=complex)
    for _ in range(L):
        q = rng.normal(size=2) + 1j * rng.normal(size=2)
        psi = np.kron(psi, q / np.linalg.norm(q))
    return psi


def maximally_mixed(L: int) -> np.ndarray:
    dim = 2 ** L
    return np.eye(dim, dtype=complex) / dim


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of rho - sigma (inputs Hermitian)."""
    diff = np.asarray(rho) - np.asarray(sigma)
    diff = 0.5 * (diff + diff.conj().T)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))
