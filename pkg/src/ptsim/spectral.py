"""Eigendecomposition of non-Hermitian Hamiltonians and spectrum diagnostics.

``decompose`` returns a :class:`SpectralData` with unit-norm right
eigenvectors as the columns of ``P``.  Eigenvalues are sorted by imaginary
part descending, then real part ascending, so under the ``+i*gamma``
convention index 0 is the slowest-decaying (dominant) mode.

When ``H - i*c*I`` is real for some constant ``c`` (true for every chain
and two-level Hamiltonian built here), the real eigensolver is used on that
matrix.  Its eigenvalues are then exactly real or exact conjugate pairs,
which makes the PT classification free of round-off noise in the mixed
phase.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from ptsim.hamiltonians import ChainParameters, build_chain_real, sample_couplings, sample_fields
from ptsim.states import renyi2_columns
from ptsim.validation import check_square

ILL_CONDITIONED = 1e10
MERGE_TOL = 1e-12


class DecompositionError(RuntimeError):
    """The eigensolver failed or returned an inaccurate decomposition."""


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Eigenpairs of H plus residual and conditioning diagnostics.

    ``P_inv``, ``singular_values`` and ``condition`` are computed on first
    access (an inverse and an SVD of a 4096 x 4096 matrix are not free).
    """

    eigenvalues: np.ndarray
    P: np.ndarray
    hamiltonian: np.ndarray
    residual: float
    norm: float
    imag_offset: Optional[float] = None
    # Real basis spanning the same columns as P up to 2x2 unitary blocks on
    # conjugate pairs; lets the inverse and SVD run in real arithmetic.
    _real_basis: Optional[np.ndarray] = field(default=None, repr=False)
    _pairs: tuple = field(default=(), repr=False)

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def n_sites(self) -> int:
        return self.dim.bit_length() - 1

    @cached_property
    def P_inv(self) -> np.ndarray:
        if self._real_basis is None:
            return sla.inv(self.P)
        Binv = sla.inv(self._real_basis)
        if not self._pairs:
            return Binv
        Pinv = Binv.astype(complex)
        for a, b in self._pairs:
            ra, rb = Binv[a], Binv[b]
            Pinv[a] = (ra - 1j * rb) / np.sqrt(2)
            Pinv[b] = (ra + 1j * rb) / np.sqrt(2)
        return Pinv

    @cached_property
    def singular_values(self) -> np.ndarray:
        M = self.P if self._real_basis is None else self._real_basis
        return sla.svdvals(M, check_finite=False)

    @property
    def condition(self) -> float:
        s = self.singular_values
        return float(s[0] / s[-1]) if s[-1] > 0 else float("inf")

    @property
    def ill_conditioned(self) -> bool:
        return self.condition > ILL_CONDITIONED

    def inverse_error(self) -> float:
        """max |P P^-1 - I|, which should stay below 1e-8 * condition."""
        return float(np.max(np.abs(self.P @ self.P_inv - np.eye(self.dim))))


def _imag_offset(H: np.ndarray) -> Optional[float]:
    """c such that H - i*c*I is real, or None."""
    if not np.iscomplexobj(H):
        return 0.0
    im = H.imag
    c = im[0, 0]
    if np.any(np.diagonal(im) != c):
        return None
    off = im.copy()
    np.fill_diagonal(off, 0.0)
    if np.any(off != 0):
        return None
    return float(c)


def _sort_order(w: np.ndarray) -> np.ndarray:
    return np.lexsort((w.real, -w.imag))


def _norm_lower_bound(H: np.ndarray, w: np.ndarray) -> float:
    # both are lower bounds on the spectral norm
    frob = np.linalg.norm(H) / np.sqrt(H.shape[0])
    return float(max(np.max(np.abs(w)), frob))


def _real_structured(R: np.ndarray, offset: float):
    """Eigenpairs of a real matrix, plus the real basis of its eigenvectors."""
    if np.array_equal(R, R.T):
        w, V = sla.eigh(R, check_finite=False)
        return w.astype(complex) + 1j * offset, V, V, ()
    w, vr = sla.eig(R, check_finite=False)
    raw_pairs = []
    j = 0
    n = w.size
    while j < n:
        if w[j].imag != 0:
            raw_pairs.append((j, j + 1))
            j += 2
        else:
            j += 1
    if not raw_pairs:
        V = vr.real
        V /= np.linalg.norm(V, axis=0)
        return w.real.astype(complex) + 1j * offset, V, V, ()
    V = vr / np.linalg.norm(vr, axis=0)
    B = V.real.copy()
    for a, b in raw_pairs:
        B[:, a] = np.sqrt(2) * V[:, a].real
        B[:, b] = np.sqrt(2) * V[:, a].imag
    return w + 1j * offset, V, B, tuple(raw_pairs)


def decompose(H, *, residual_tol: float = 1e-8, context: str = "") -> SpectralData:
    """Full non-Hermitian eigendecomposition with diagnostics.

    Parameters
    ----------
    H : (n, n) array_like
    residual_tol : float
        Accept only if ``max_k |H p_k - lambda_k p_k| <= residual_tol * |H|``
        where ``|H|`` is a lower bound on the spectral norm.
    context : str
        Included in error messages (e.g. the parameters that built ``H``).

    Raises
    ------
    DecompositionError
        Eigensolver non-convergence or residual above tolerance.
    """
    H = check_square(H)
    offset = _imag_offset(H)
    try:
        if offset is not None:
            R = H.real if np.iscomplexobj(H) else H
            w, V, B, raw_pairs = _real_structured(R, offset)
            shifted = w - 1j * offset
            resid_cols = R @ V - V * (shifted if raw_pairs else shifted.real)
        else:
            if np.array_equal(H, H.conj().T):
                w, V = sla.eigh(H, check_finite=False)
                w = w.astype(complex)
            else:
                w, V = sla.eig(H, check_finite=False)
                V = V / np.linalg.norm(V, axis=0)
            B, raw_pairs = None, ()
            resid_cols = H @ V - V * w
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise DecompositionError(f"eigensolver failed{': ' + context if context else ''}: {exc}") from exc

    residual = float(np.max(np.linalg.norm(resid_cols, axis=0)))
    norm = _norm_lower_bound(H, w)
    if not np.isfinite(residual) or residual > residual_tol * max(norm, 1e-300):
        raise DecompositionError(
            f"eigendecomposition residual {residual:.3e} exceeds {residual_tol:g} * |H| = "
            f"{residual_tol * norm:.3e}{': ' + context if context else ''}"
        )

    order = _sort_order(w)
    inverse = np.empty_like(order)
    inverse[order] = np.arange(order.size)
    pairs = tuple((int(inverse[a]), int(inverse[b])) for a, b in raw_pairs)
    return SpectralData(
        eigenvalues=w[order],
        P=V[:, order],
        hamiltonian=H,
        residual=residual,
        norm=norm,
        imag_offset=offset,
        _real_basis=None if B is None else B[:, order],
        _pairs=pairs,
    )


def eigenvalues_only(H) -> np.ndarray:
    """Sorted eigenvalues without eigenvectors (cheaper; used in bisection)."""
    H = check_square(H)
    offset = _imag_offset(H)
    if offset is not None:
        R = H.real if np.iscomplexobj(H) else H
        if np.array_equal(R, R.T):
            w = sla.eigvalsh(R).astype(complex)
        else:
            w = sla.eigvals(R)
        w = w + 1j * offset
    else:
        w = sla.eigvals(H)
    return w[_sort_order(w)]


def _eigs(s) -> np.ndarray:
    return s.eigenvalues if isinstance(s, SpectralData) else np.asarray(s)


def default_pt_tol(eigenvalues) -> float:
    """1e-7 times the common decay scale (gamma*L for the chain), floored at 1e-7."""
    w = _eigs(eigenvalues)
    return 1e-7 * max(abs(float(np.mean(w.imag))), 1.0)


def classify_pt(s, tol: Optional[float] = None) -> str:
    """'mixed' if all eigenvalues share one imaginary part (PT unbroken), else 'pure'."""
    w = _eigs(s)
    if tol is None:
        tol = default_pt_tol(w)
    spread = float(np.max(w.imag) - np.min(w.imag))
    return "mixed" if spread < tol else "pure"


def purification_gap(s) -> float:
    """Im lambda_(1) - Im lambda_(2), imaginary parts sorted descending."""
    w = _eigs(s)
    if w.size < 2:
        return 0.0
    im = np.sort(w.imag)[::-1]
    return float(max(im[0] - im[1], 0.0))


def gap_threshold(gamma: float) -> float:
    """Gap above which a cell is declared pure: max(1e-6, 1e-4 * gamma)."""
    return max(1e-6, 1e-4 * gamma)


@dataclass
class CriticalPoint:
    """Result of :func:`find_gamma_c`."""

    gamma_c: float
    bracket: tuple
    widths: list
    # Top two eigenvalues (by imaginary part) on each side of the bracket.
    pair_mixed: np.ndarray
    pair_pure: np.ndarray


def find_gamma_c(
    p: ChainParameters,
    gamma_lo: float,
    gamma_hi: float,
    tol: float = 1e-3,
    fields: Optional[Sequence[float]] = None,
    couplings: Optional[Sequence[float]] = None,
) -> CriticalPoint:
    """Bisect in gamma for the first PT-breaking point of one disorder realization.

    The phase at gamma is 'pure' when ``purification_gap > gap_threshold(gamma)``.
    """
    if fields is None:
        fields = sample_fields(p)
    if couplings is None:
        couplings = sample_couplings(p)

    def spectrum(gamma):
        R = build_chain_real(p.replace(gamma=gamma), fields, couplings)
        return eigenvalues_only(R) + 1j * gamma * p.L

    def is_pure(w, gamma):
        return purification_gap(w) > gap_threshold(gamma)

    w_lo, w_hi = spectrum(gamma_lo), spectrum(gamma_hi)
    if is_pure(w_lo, gamma_lo) or not is_pure(w_hi, gamma_hi):
        raise ValueError(
            f"invalid bracket [{gamma_lo}, {gamma_hi}]: need mixed at the low end and pure at the high end"
        )
    lo, hi = float(gamma_lo), float(gamma_hi)
    widths = [hi - lo]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        w_mid = spectrum(mid)
        if is_pure(w_mid, mid):
            hi, w_hi = mid, w_mid
        else:
            lo, w_lo = mid, w_mid
        widths.append(hi - lo)

    top = w_hi[:2]
    # the two real levels closest to the colliding pair's real part
    near = w_lo[np.argsort(np.abs(w_lo.real - top[0].real))[:2]]
    return CriticalPoint(
        gamma_c=0.5 * (lo + hi),
        bracket=(lo, hi),
        widths=widths,
        pair_mixed=np.sort_complex(near),
        pair_pure=top,
    )


@dataclass
class LevelStatistics:
    r_values: np.ndarray
    r_mean: float
    histogram: np.ndarray
    bin_edges: np.ndarray


def spacing_ratios(levels) -> np.ndarray:
    """min/max ratio of consecutive spacings of real levels.

    Levels closer than ``MERGE_TOL`` are merged into one before computing
    spacings, so exact degeneracies do not produce 0/0.
    """
    x = np.sort(np.asarray(levels, dtype=float))
    if x.size:
        keep = np.concatenate(([True], np.diff(x) >= MERGE_TOL))
        x = x[keep]
    if x.size < 3:
        raise ValueError("need at least 3 distinct levels for spacing ratios")
    d = np.diff(x)
    return np.minimum(d[1:], d[:-1]) / np.maximum(d[1:], d[:-1])


def r_statistics(s, bins: int = 50) -> LevelStatistics:
    """Level-spacing ratio statistics on the real parts of the spectrum."""
    w = _eigs(s)
    r = spacing_ratios(w.real)
    hist, edges = np.histogram(r, bins=bins, range=(0.0, 1.0), density=True)
    return LevelStatistics(r_values=r, r_mean=float(np.mean(r)), histogram=hist, bin_edges=edges)


def poisson_r_oracle(n_levels: int = 100_000, rng=None) -> float:
    """Mean spacing ratio of i.i.d. uniform levels (Monte Carlo, Poisson limit 2 ln 2 - 1)."""
    rng = np.random.default_rng(rng)
    return float(np.mean(spacing_ratios(rng.uniform(0.0, 1.0, size=n_levels))))


def participation_ratio(singular_values, weights: str = "squared") -> float:
    s = np.asarray(singular_values, dtype=float)
    if weights == "squared":
        p = s ** 2
    elif weights == "linear":
        p = s.copy()
    else:
        raise ValueError(f"weights must be 'squared' or 'linear', got {weights!r}")
    p = p / np.sum(p)
    return float(1.0 / np.sum(p ** 2))


def effective_dimension(s, weights: str = "squared") -> float:
    """Participation ratio of the singular values of the eigenvector matrix P.

    ``weights='squared'`` (default) uses p_k = s_k^2 / sum s^2, which gives
    exactly 2^L for unitary P; ``'linear'`` normalizes the bare s_k.
    """
    sv = s.singular_values if isinstance(s, SpectralData) else np.asarray(s)
    return participation_ratio(sv, weights)


def fit_alpha(d_eff_by_L) -> float:
    """Least-squares slope of log2(D_eff) against L."""
    data = np.asarray(list(d_eff_by_L), dtype=float)
    if data.ndim != 2 or data.shape[0] < 3:
        raise ValueError("fit_alpha needs at least 3 (L, D_eff) pairs")
    Ls, D = data[:, 0], data[:, 1]
    if np.unique(Ls).size < 2:
        raise ValueError("degenerate fit: all sizes equal")
    return float(np.polyfit(Ls, np.log2(D), 1)[0])


def eigenstate_entropy_profile(s: SpectralData, cut: Optional[int] = None) -> np.ndarray:
    """(Re lambda_k, S2_k) for every right eigenvector, sorted by Re lambda.

    S2 is the Renyi-2 entropy (bits) of sites [0, cut); default cut = L // 2.
    """
    L = s.n_sites
    if cut is None:
        cut = L // 2
    if not 1 <= cut <= L - 1:
        raise ValueError(f"cut must satisfy 1 <= cut <= L-1, got cut={cut}, L={L}")
    S2 = renyi2_columns(s.P, cut)
    re = s.eigenvalues.real
    order = np.argsort(re, kind="stable")
    return np.column_stack([re[order], S2[order]])


def central_entropy_spread(profile: np.ndarray, fraction: float = 0.2) -> float:
    """Standard deviation of S2 over the central ``fraction`` of the spectrum (by rank)."""
    n = profile.shape[0]
    k = max(int(round(fraction * n)), 2)
    start = (n - k) // 2
    return float(np.std(profile[start:start + k, 1]))
