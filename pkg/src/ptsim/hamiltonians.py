"""Non-Hermitian Ising Hamiltonians: the two-level toy model and the L-site chain.

The chain is

    H = sum_i [h_i sz_i + g sx_i + i*gamma*(1 + sy_i)] + sum_<ij> J_ij sz_i sz_j

with the anti-Hermitian part taken with the ``+i*gamma`` sign exactly as
written above.  The physically decaying convention (``-i*gamma``) is the
adjoint, ``H(-gamma) = H(gamma)^dagger``, so the spectrum is complex
conjugated and normalized observables (purity, entropies, gaps) are
unchanged.  Under the ``+`` convention the slowest-decaying mode is the one
with the *largest* imaginary eigenvalue part.

Because ``i*sy`` is a real matrix, ``H - i*gamma*L`` is real; the spectral
module relies on this.
"""

from __future__ import annotations

import itertools
import os
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from ptsim._seeding import mix_seed
from ptsim.operators import z_diagonal

DEFAULT_MAX_L = 14
BOUNDARIES = ("open", "periodic")


def max_sites() -> int:
    """Largest chain length allowed for dense construction (env ``PTSIM_MAX_L``)."""
    raw = os.environ.get("PTSIM_MAX_L")
    if raw is None:
        return DEFAULT_MAX_L
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"PTSIM_MAX_L must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class TLSParameters:
    """Two-level system: measurement strength ``b`` and initial-state angle ``theta``."""

    b: float = 0.5
    theta: float = 0.0


@dataclass(frozen=True)
class ChainParameters:
    """Parameters of the disordered non-Hermitian Ising chain.

    ``epsilon`` is the half-width of the uniform disorder on the longitudinal
    fields; ``coupling_disorder`` is the *relative* half-width on J, so
    ``J_i`` is uniform on ``J*[1 - delta, 1 + delta]``.
    """

    L: int = 8
    h0: float = 1.25
    epsilon: float = 0.0
    g: float = 1.0
    gamma: float = 0.0
    J: float = 0.95
    coupling_disorder: float = 0.0
    boundary: str = "open"
    seed: int = 0

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 1:
            raise ValueError(f"L must be an integer >= 1, got {self.L!r}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.epsilon < 0 or self.coupling_disorder < 0:
            raise ValueError("disorder widths must be non-negative")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if self.epsilon > abs(self.h0) / 10 + 1e-15:
            warnings.warn(
                f"epsilon={self.epsilon} exceeds h0/10={abs(self.h0) / 10}; "
                "outside the weak-disorder regime",
                stacklevel=3,
            )

    def replace(self, **changes) -> "ChainParameters":
        from dataclasses import replace

        return replace(self, **changes)

    def for_realization(self, index: int) -> "ChainParameters":
        """Copy with the seed for disorder realization ``index``."""
        return self.replace(seed=mix_seed(self.seed, index))


def build_tls(p: Union[TLSParameters, float]) -> np.ndarray:
    """[[i b, 1 + b], [1 - b, i b]], the two-level Hamiltonian ``M_0 + i b``."""
    b = p.b if isinstance(p, TLSParameters) else float(p)
    return np.array([[1j * b, 1.0 + b], [1.0 - b, 1j * b]], dtype=complex)


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & ((1 << 64) - 1), stream])


def sample_fields(p: ChainParameters) -> np.ndarray:
    """Longitudinal fields h_i, i.i.d. uniform on [h0 - epsilon, h0 + epsilon]."""
    if p.epsilon == 0:
        return np.full(p.L, float(p.h0))
    return _rng(p.seed, 0).uniform(p.h0 - p.epsilon, p.h0 + p.epsilon, size=p.L)


def n_bonds(L: int, boundary: str) -> int:
    if boundary == "periodic" and L > 2:
        return L
    return L - 1


def sample_couplings(p: ChainParameters) -> np.ndarray:
    """Bond couplings J_i (bond i joins sites i and i+1 mod L)."""
    nb = n_bonds(p.L, p.boundary)
    if p.coupling_disorder == 0:
        return np.full(nb, float(p.J))
    delta = p.coupling_disorder
    return p.J * _rng(p.seed, 1).uniform(1.0 - delta, 1.0 + delta, size=nb)


def _bond_sites(L: int, boundary: str):
    return [(i, (i + 1) % L) for i in range(n_bonds(L, boundary))]


def ising_diagonal(fields: Sequence[float], couplings, boundary: str = "open") -> np.ndarray:
    """Classical energies sum_i h_i s_i + sum_b J_b s_i s_j in basis order (unsorted)."""
    fields = np.asarray(fields, dtype=float)
    L = fields.size
    bonds = _bond_sites(L, boundary)
    couplings = np.broadcast_to(np.asarray(couplings, dtype=float), (len(bonds),))
    zs = [z_diagonal(i, L) for i in range(L)]
    diag = np.zeros(2 ** L)
    for h, z in zip(fields, zs):
        diag += h * z
    for Jb, (i, j) in zip(couplings, bonds):
        diag += Jb * zs[i] * zs[j]
    return diag


def build_chain_real(
    p: ChainParameters,
    fields: Optional[Sequence[float]] = None,
    couplings: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """Real matrix ``H - i*gamma*L`` of the chain (see module docstring)."""
    L = int(p.L)
    if L > max_sites():
        raise ValueError(
            f"L={L} exceeds the dense-matrix cap {max_sites()} (set PTSIM_MAX_L to raise it)"
        )
    if fields is None:
        fields = sample_fields(p)
    fields = np.asarray(fields, dtype=float)
    if fields.shape != (L,):
        raise ValueError(f"expected {L} fields, got shape {fields.shape}")
    if couplings is None:
        couplings = sample_couplings(p)

    dim = 2 ** L
    R = np.zeros((dim, dim))
    R[np.diag_indices(dim)] = ising_diagonal(fields, couplings, p.boundary)
    idx = np.arange(dim)
    for site in range(L):
        mask = 1 << (L - 1 - site)
        up = (idx & mask) == 0
        # g*sx + gamma*(i sy); i sy = [[0, 1], [-1, 0]]
        R[idx[up] ^ mask, idx[up]] = p.g - p.gamma
        R[idx[~up] ^ mask, idx[~up]] = p.g + p.gamma
    return R


def build_chain(
    p: ChainParameters,
    fields: Optional[Sequence[float]] = None,
    couplings: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """Dense complex chain Hamiltonian of dimension 2^L.

    Fields and couplings are sampled from ``p`` when not given.  The J sum
    runs over bonds (0,1), ..., (L-2, L-1) for open boundaries and also
    (L-1, 0) for periodic ones.
    """
    R = build_chain_real(p, fields, couplings)
    H = R.astype(complex)
    H[np.diag_indices(H.shape[0])] += 1j * p.gamma * p.L
    return H


def hermitian_part(H: np.ndarray) -> np.ndarray:
    return 0.5 * (H + H.conj().T)


def antihermitian_part(H: np.ndarray) -> np.ndarray:
    """(H - H^dagger)/2, which equals i*gamma*sum(1 + sy_i) for the chain."""
    return 0.5 * (H - H.conj().T)


def classical_ising_spectrum(
    fields: Sequence[float], J, boundary: str = "open"
) -> np.ndarray:
    """Sorted energies of all 2^L classical configurations.

    This is the solvable-line oracle: at gamma = g = 1 the chain is upper
    triangular with these energies (plus i*L) on the diagonal.  ``J`` may be
    a scalar or one value per bond.  Enumerates explicit spin configurations
    rather than reusing the Hamiltonian builder.
    """
    fields = np.asarray(fields, dtype=float)
    L = fields.size
    if L > 24:
        raise ValueError("classical enumeration limited to L <= 24")
    bonds = _bond_sites(L, boundary)
    Jb = np.broadcast_to(np.asarray(J, dtype=float), (len(bonds),))
    energies = []
    for s in itertools.product((1.0, -1.0), repeat=L):
        e = sum(h * si for h, si in zip(fields, s))
        e += sum(c * s[i] * s[j] for c, (i, j) in zip(Jb, bonds))
        energies.append(e)
    return np.sort(np.array(energies))
