"""Weiss mean-field theory of the purification transition.

Each spin sees the single-site non-Hermitian Hamiltonian

    h_eff = (h + J z m) sz + g sx + i gamma (1 + sy),   m = <sz>,

whose diagonal-ensemble magnetization is -g gamma / (g^2 + h_eff^2).
Self-consistency gives the cubic

    m (g^2 + (h + J z m)^2) + g gamma = 0,

and the mixed phase ends where the tracked root reaches m = -1, i.e.
g gamma = g^2 + (h - J z)^2.

``sign=-1`` flips the sign of the mean-field shift and ``squared=False``
drops the square in the denominator; both exist only for comparison.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np
from scipy.optimize import brentq


class MeanFieldTransition(ValueError):
    """No admissible root with |m| <= 1: the parameters lie beyond the mean-field transition."""

    def __init__(self, message: str, gamma_c: float | None = None):
        super().__init__(message)
        self.gamma_c = gamma_c


@dataclass(frozen=True)
class MeanFieldParameters:
    h: float = 1.25
    g: float = 1.0
    J: float = 0.95
    z: int = 2
    gamma: float = 0.0

    def __post_init__(self):
        if self.g == 0:
            raise ValueError("g must be non-zero")
        if self.z < 0:
            raise ValueError(f"coordination number z must be >= 0, got {self.z}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")


def _residual(m, gamma, p: MeanFieldParameters, squared: bool, sign: int):
    field = p.h + sign * p.J * p.z * m
    denom = p.g ** 2 + (field ** 2 if squared else field)
    return m * denom + p.g * gamma


def _slope(m, p, squared, sign, eps=1e-7):
    return (_residual(m + eps, 0.0, p, squared, sign) - _residual(m - eps, 0.0, p, squared, sign)) / (2 * eps)


def _continue_root(m_prev, gamma, p, squared, sign, floor=-1.5):
    """Follow the root from m_prev to the new gamma; None when the branch is lost."""
    f = lambda m: _residual(m, gamma, p, squared, sign)  # noqa: E731
    hi = m_prev
    if f(hi) < 0:
        # gamma decreased; search upward instead
        step = 1e-3
        lo = hi
        while f(hi) < 0:
            lo, hi = hi, hi + step
            step *= 2
            if hi > 1.5:
                return None
    else:
        step = 1e-3 * max(1.0, abs(m_prev))
        lo = hi - step
        while f(lo) > 0:
            step *= 2
            lo = hi - step
            if lo < floor:
                return None
        if f(lo) == 0:
            return lo
    if f(hi) == 0:
        return hi
    root = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    # stay on the branch connected to m = 0: f must increase between the old and new root
    probe = np.linspace(min(root, m_prev), max(root, m_prev), 9)
    if np.any(np.array([_slope(x, p, squared, sign) for x in probe]) <= 0):
        return None
    return root


def _track(p: MeanFieldParameters, gamma_target: float, squared: bool, sign: int, n_steps: int):
    m, gamma_prev = 0.0, 0.0
    for gamma in np.linspace(0.0, gamma_target, n_steps + 1)[1:]:
        m_new = _continue_root(m, gamma, p, squared, sign)
        if m_new is None or m_new < -1.0:
            return None, gamma_prev, m
        m, gamma_prev = m_new, gamma
    return m, gamma_prev, m


def solve_self_consistency(
    p: MeanFieldParameters, squared: bool = True, sign: int = 1, n_steps: int = 200
) -> float:
    """Magnetization m = <sz> on the root branch continued from m = 0 at gamma = 0.

    Raises :class:`MeanFieldTransition` when that branch leaves |m| <= 1 (or
    folds) before reaching ``p.gamma``.
    """
    if p.gamma == 0:
        return 0.0
    m, last_gamma, _ = _track(p, p.gamma, squared, sign, n_steps)
    if m is None:
        raise MeanFieldTransition(
            f"gamma={p.gamma} lies beyond the mean-field transition (branch lost after gamma={last_gamma:.6g})",
            gamma_c=critical_gamma(p, squared=squared, sign=sign),
        )
    return float(m)


def magnetization_curve(p: MeanFieldParameters, gammas: Iterable[float], squared: bool = True, sign: int = 1):
    """(gamma, m) pairs along an ascending gamma grid; stops at the transition."""
    out = []
    m, g_prev = 0.0, 0.0
    for gamma in gammas:
        if gamma == 0:
            out.append((0.0, 0.0))
            continue
        m_new = m
        # sub-step so that each continuation move is small
        for gg in np.linspace(g_prev, gamma, 5)[1:]:
            m_new = _continue_root(m_new, gg, p, squared, sign)
            if m_new is None or m_new < -1:
                return np.array(out).reshape(-1, 2)
        m, g_prev = m_new, gamma
        out.append((gamma, m))
    return np.array(out).reshape(-1, 2)


def critical_gamma(
    p: MeanFieldParameters, squared: bool = True, sign: int = 1, dgamma: float = 0.01, tol: float = 1e-12
) -> float:
    """gamma_c from the self-consistent solver: where the continued root hits m = -1 or folds.

    Steps gamma upward by ``dgamma`` following the root, then bisects the
    last step.  Independent of :func:`phase_boundary`, which it should
    reproduce whenever the branch does not fold first.
    """
    m, gamma = 0.0, 0.0
    limit = 1e3 * max(1.0, abs(p.g) + abs(p.h) + abs(p.J) * p.z) ** 2
    while True:
        nxt = gamma + dgamma
        m_new = _continue_root(m, nxt, p, squared, sign)
        if m_new is None or m_new < -1.0:
            break
        m, gamma = m_new, nxt
        if gamma > limit:
            return float("inf")
    lo, hi, m_lo = gamma, gamma + dgamma, m
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        m_mid = _continue_root(m_lo, mid, p, squared, sign)
        if m_mid is None or m_mid < -1.0:
            hi = mid
        else:
            lo, m_lo = mid, m_mid
    return 0.5 * (lo + hi)


def phase_boundary(p: MeanFieldParameters) -> float:
    """Closed form gamma_c = [g^2 + (h - J z)^2] / g (``p.gamma`` is ignored)."""
    if p.g <= 0:
        raise ValueError("phase_boundary requires g > 0")
    return (p.g ** 2 + (p.h - p.J * p.z) ** 2) / p.g


def boundary_curve(g: float, h: float, z: int, J_grid) -> np.ndarray:
    """Array of (J, gamma_c) rows over ``J_grid``."""
    base = MeanFieldParameters(h=h, g=g, z=z)
    return np.array([(J, phase_boundary(replace(base, J=float(J)))) for J in J_grid]).reshape(-1, 2)


def write_curve_csv(path, rows, header) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([format(float(x), ".17g") for x in row])
