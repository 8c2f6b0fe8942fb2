"""Exact-diagonalization toolkit for the purification transition of a
non-Hermitian Ising chain under continuous weak measurement."""

__version__ = "0.1.0"

from ptsim.hamiltonians import ChainParameters, TLSParameters, build_chain, build_tls  # noqa: E402
from ptsim.spectral import SpectralData, decompose, find_gamma_c, purification_gap  # noqa: E402
from ptsim.steady_state import diagonal_ensemble  # noqa: E402
from ptsim.meanfield import MeanFieldParameters, phase_boundary  # noqa: E402
from ptsim.scan import ScanSpec, run_scan  # noqa: E402
from ptsim.estimators import NonHermitianChain, TwoLevelSystem  # noqa: E402

__all__ = [
    "ChainParameters",
    "TLSParameters",
    "build_chain",
    "build_tls",
    "SpectralData",
    "decompose",
    "find_gamma_c",
    "purification_gap",
    "diagonal_ensemble",
    "MeanFieldParameters",
    "phase_boundary",
    "ScanSpec",
    "run_scan",
    "NonHermitianChain",
    "TwoLevelSystem",
]
