"""Time-averaged (diagonal-ensemble) density matrix of the mixed phase.

With T = P D P^-1 and all eigenvalues sharing one imaginary part, the
oscillating cross terms of T^dagger T average away and what is left is

    rho_ss  propto  (P^dagger)^-1  G_diag  P^-1,   G = P^dagger P,

i.e. rho_ss = sum_j G_jj l_j l_j^dagger with l_j the j-th column of
(P^dagger)^-1.  That literal index contraction corresponds to the
``'TdagT'`` ordering.  ``ordering='TTdag'`` gives the partner expression
P diag(P^-1 P^-dagger) P^dagger; both have the same purity for a maximally
mixed start but the opposite sign of <sigma^z> for the two-level system.

Eigenvalues whose real parts coincide within ``degeneracy_tol`` do not
dephase; their cross terms are kept (block-diagonal ensemble), which keeps
rho_ss positive.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ptsim.dynamics import ORDERINGS, iter_mixed
from ptsim.operators import z_diagonal
from ptsim.spectral import SpectralData, classify_pt
from ptsim.states import purity

RHO_MAGIC = b"RHOSS\x00\x00\x00"


class PhaseError(ValueError):
    """Operation requires the other phase (e.g. diagonal ensemble on a PT-broken spectrum)."""


@dataclass
class EigenvalueHistogram:
    """Counts of rho_ss eigenvalues phi over logarithmic bins; ``n_below`` counts phi < edges[0]."""

    edges: np.ndarray
    counts: np.ndarray
    n_below: int


@dataclass
class SteadyStateResult:
    rho_ss: np.ndarray
    purity: float
    sigma_z_mean: float
    eigenvalue_histogram: Optional[EigenvalueHistogram] = None
    merged_blocks: int = 0
    phase: str = "mixed"


def _real_part_blocks(re: np.ndarray, tol: float):
    order = np.argsort(re, kind="stable")
    blocks, current = [], [order[0]]
    for a, b in zip(order[:-1], order[1:]):
        if re[b] - re[a] < tol:
            current.append(b)
        else:
            blocks.append(current)
            current = [b]
    blocks.append(current)
    return [blk for blk in blocks if len(blk) > 1]


def site_averaged_sigma_z(rho: np.ndarray) -> float:
    L = rho.shape[0].bit_length() - 1
    diag = np.real(np.diagonal(rho)) / np.trace(rho).real
    return float(np.mean([diag @ z_diagonal(i, L) for i in range(L)]))


def _finish(rho, merged, histogram_bins, phase):
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    if np.isrealobj(rho) or not np.any(rho.imag):
        rho = np.real(rho)
    hist = eigenvalue_histogram(rho, histogram_bins) if histogram_bins else None
    return SteadyStateResult(
        rho_ss=rho,
        purity=purity(rho),
        sigma_z_mean=site_averaged_sigma_z(rho),
        eigenvalue_histogram=hist,
        merged_blocks=merged,
        phase=phase,
    )


def diagonal_ensemble(
    s: SpectralData,
    ordering: str = "TdagT",
    degeneracy_tol: float = 1e-9,
    histogram_bins: Optional[int] = None,
    pt_tol: Optional[float] = None,
) -> SteadyStateResult:
    """rho_ss of the mixed phase, normalized to unit trace.

    Raises :class:`PhaseError` for a PT-broken spectrum; use
    :func:`pure_phase_steady_state` (or :func:`steady_state`) there.
    """
    if ordering not in ORDERINGS:
        raise ValueError(f"ordering must be one of {ORDERINGS}, got {ordering!r}")
    if classify_pt(s, pt_tol) != "mixed":
        raise PhaseError("diagonal ensemble needs a PT-unbroken (mixed-phase) spectrum")
    P, Q = s.P, s.P_inv
    if ordering == "TdagT":
        # weights (P^dag P)_jj = 1 for unit-norm columns, kept general
        w = np.sum(np.abs(P) ** 2, axis=0)
        A = Q  # rho = A^dag W A
    else:
        w = np.sum(np.abs(Q) ** 2, axis=1)
        A = P.conj().T  # rho = P W P^dag = A^dag W A
    rho = (A.conj().T * w) @ A

    blocks = _real_part_blocks(s.eigenvalues.real, degeneracy_tol)
    if blocks:
        warnings.warn(
            f"{len(blocks)} groups of eigenvalues with coinciding real parts; keeping their cross terms",
            stacklevel=2,
        )
        G = P.conj().T @ P if ordering == "TdagT" else Q @ Q.conj().T
        for blk in blocks:
            idx = np.asarray(blk)
            Gb = G[np.ix_(idx, idx)].copy()
            np.fill_diagonal(Gb, 0.0)
            Ab = A[idx]
            rho = rho + Ab.conj().T @ Gb @ Ab
    return _finish(rho, len(blocks), histogram_bins, "mixed")


def pure_phase_steady_state(s: SpectralData, ordering: str = "TdagT", histogram_bins=None) -> SteadyStateResult:
    """Late-time state when PT symmetry is broken: a projector on the dominant mode.

    For T T^dagger that is the dominant right eigenvector; for T^dagger T
    the (conjugated) dominant left eigenvector, i.e. row 0 of P^-1.
    """
    if ordering not in ORDERINGS:
        raise ValueError(f"ordering must be one of {ORDERINGS}, got {ordering!r}")
    v = s.P[:, 0] if ordering == "TTdag" else s.P_inv[0].conj()
    v = v / np.linalg.norm(v)
    return _finish(np.outer(v, v.conj()), 0, histogram_bins, "pure")


def steady_state(s: SpectralData, ordering: str = "TdagT", histogram_bins=None) -> SteadyStateResult:
    """Diagonal ensemble in the mixed phase, dominant-mode projector in the pure phase."""
    if classify_pt(s) == "mixed":
        return diagonal_ensemble(s, ordering, histogram_bins=histogram_bins)
    return pure_phase_steady_state(s, ordering, histogram_bins)


def long_time_average_oracle(
    s: SpectralData,
    t_max: float,
    n_samples: int,
    rho0=None,
    t_burn: float = 0.0,
    ordering: str = "TdagT",
    method: str = "expm",
    sampling: str = "grid",
    normalize_each: bool = False,
    rng=None,
) -> np.ndarray:
    """Brute-force time average of rho(t) over [t_burn, t_max], unit trace.

    By default the rescaled but unnormalized T^dagger rho0 T (or
    T rho0 T^dagger) is averaged and normalized once at the end, which is the
    quantity the diagonal ensemble describes.  ``normalize_each=True``
    averages the unit-trace states instead; the two differ at O(amplitude of
    the trace oscillations).

    ``sampling='grid'`` uses evenly spaced times; ``'random'`` draws them
    uniformly (Monte Carlo error ~ n_samples^-1/2 on the cross terms).
    Defaults to the matrix-exponential propagator so the check never touches
    the eigenvector matrix that the diagonal ensemble is built from.
    """
    if sampling == "grid":
        times = np.linspace(t_burn, t_max, n_samples)
    elif sampling == "random":
        times = np.sort(np.random.default_rng(rng).uniform(t_burn, t_max, size=n_samples))
    else:
        raise ValueError(f"sampling must be 'grid' or 'random', got {sampling!r}")
    mu = float(np.max(s.eigenvalues.imag))
    acc = np.zeros((s.dim, s.dim), dtype=complex)
    for t, rho, norm_log in iter_mixed(rho0, s, times, method=method, ordering=ordering):
        acc += rho if normalize_each else rho * np.exp(norm_log - 2 * mu * t)
    return acc / np.trace(acc).real


def purity_scaling_fit(results) -> float:
    """Slope c of -log2(Pi_ss) against L, i.e. Pi_ss ~ 2^(-c L)."""
    data = np.asarray(list(results), dtype=float)
    if data.ndim != 2 or data.shape[0] < 3:
        raise ValueError("purity_scaling_fit needs at least 3 (L, purity) pairs")
    if np.unique(data[:, 0]).size < 2:
        raise ValueError("degenerate fit: all sizes equal")
    return float(np.polyfit(data[:, 0], -np.log2(data[:, 1]), 1)[0])


def eigenvalue_histogram(rho, bins: int = 40, phi_min: Optional[float] = None) -> EigenvalueHistogram:
    """Histogram of the eigenvalues of rho over log-spaced bins up to 1.

    ``phi_min`` defaults to 1e-3 / dim; eigenvalues below it (including
    exact zeros of a projector) are counted in ``n_below``.
    """
    rho = np.asarray(rho)
    phi = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)) / np.trace(rho).real
    dim = rho.shape[0]
    if phi_min is None:
        phi_min = 1e-3 / dim
    edges = np.geomspace(phi_min, 1.0 + 1e-12, bins + 1)
    counts, _ = np.histogram(phi, bins=edges)
    return EigenvalueHistogram(edges=edges, counts=counts, n_below=int(np.sum(phi < phi_min)))


def write_rho_binary(path, rho) -> None:
    """RHOSS format: 8-byte magic (b"RHOSS" + 3 NULs), int64 dim, then row-major (re, im) float64 pairs, little-endian."""
    rho = np.asarray(rho, dtype=np.complex128)
    dim = rho.shape[0]
    with open(path, "wb") as fh:
        fh.write(RHO_MAGIC)
        fh.write(struct.pack("<q", dim))
        fh.write(np.ascontiguousarray(rho).astype("<c16").tobytes())


def read_rho_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:5] != b"RHOSS":
            raise ValueError(f"{path}: not an RHOSS file")
        (dim,) = struct.unpack("<q", header[8:])
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != dim * dim:
        raise ValueError(f"{path}: expected {dim * dim} entries, found {data.size}")
    return data.reshape(dim, dim).astype(complex)
