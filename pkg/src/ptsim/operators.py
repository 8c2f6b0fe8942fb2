"""Pauli operators and their embeddings into an L-qubit register.

Basis convention: site 0 is the most significant bit of the
computational-basis index, i.e. operators are built as
``kron(op_0, op_1, ..., op_{L-1})``.  With this ordering the basis state
``|s_0 s_1 ... s_{L-1}>`` has index ``sum_i s_i 2^(L-1-i)`` where ``s_i = 0``
is spin up (sigma^z = +1).
"""

from __future__ import annotations

import numpy as np

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
# sigma^+ = (sigma^x + i sigma^y) / 2
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)

_PAULI = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


def _check_register(L: int) -> None:
    if not isinstance(L, (int, np.integer)) or L <= 0:
        raise ValueError(f"register size L must be a positive integer, got {L!r}")


def _check_site(site: int, L: int) -> None:
    if not 0 <= site < L:
        raise ValueError(f"site {site} out of range for L={L}")


def embed(op: np.ndarray, site: int, L: int) -> np.ndarray:
    """Place a single-site operator at ``site`` of an ``L``-site register."""
    _check_register(L)
    _check_site(site, L)
    left = np.eye(2 ** site)
    right = np.eye(2 ** (L - site - 1))
    return np.kron(np.kron(left, op), right)


def pauli(axis: str, site: int, L: int) -> np.ndarray:
    """Return sigma^axis acting on ``site``, identity elsewhere.

    Parameters
    ----------
    axis : {"x", "y", "z"}
    site : int
        0-based site index, ``0 <= site < L``.
    L : int
        Number of sites.

    Returns
    -------
    numpy.ndarray
        Dense complex matrix of shape ``(2**L, 2**L)``.
    """
    try:
        op = _PAULI[axis]
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}; expected 'x', 'y' or 'z'") from None
    return embed(op, site, L)


def two_site_zz(i: int, j: int, L: int) -> np.ndarray:
    """sigma^z_i sigma^z_j as a dense diagonal matrix."""
    _check_register(L)
    _check_site(i, L)
    _check_site(j, L)
    if i == j:
        raise ValueError(f"two_site_zz needs distinct sites, got i = j = {i}")
    return np.diag(z_diagonal(i, L) * z_diagonal(j, L)).astype(complex)


def z_diagonal(site: int, L: int) -> np.ndarray:
    """Diagonal of sigma^z_site as a real vector of +-1 (cheap, no matrix)."""
    _check_register(L)
    _check_site(site, L)
    idx = np.arange(2 ** L)
    bit = (idx >> (L - 1 - site)) & 1
    return 1.0 - 2.0 * bit


def spin_configurations(L: int) -> np.ndarray:
    """All 2^L configurations s_i = +-1 in computational-basis order, shape (2^L, L)."""
    _check_register(L)
    return np.stack([z_diagonal(i, L) for i in range(L)], axis=1)
