"""Phase-diagram driver: sweep (gamma, J, L, realization) cells and aggregate.

Every cell is an independent work unit.  Its disorder realization is
seeded from ``(base_seed, L, realization)`` only, so a realization keeps
the same fields and couplings along the gamma and J axes and extending a
grid never changes existing cells.  Output order is canonical
``(gamma, J, L, realization)`` regardless of how cells were scheduled.
"""

from __future__ import annotations

import logging
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ptsim import __version__
from ptsim._io import config_hash, write_csv, write_json
from ptsim._seeding import mix_seed
from ptsim.hamiltonians import ChainParameters, build_chain
from ptsim.spectral import (
    DecompositionError,
    classify_pt,
    decompose,
    effective_dimension,
    eigenvalues_only,
    fit_alpha,
    find_gamma_c,
    gap_threshold,
    purification_gap,
    r_statistics,
)
from ptsim.steady_state import diagonal_ensemble, purity_scaling_fit

log = logging.getLogger(__name__)

OBSERVABLES = ("gap", "purity_ss", "d_eff", "r_mean", "alpha", "entropy_profile", "histogram")
CSV_COLUMNS = ("gamma", "J", "L", "realization", "gap", "purity_ss", "d_eff", "r_mean", "condition", "status")
FLOP_BUDGET = 1e13


@dataclass(frozen=True)
class ScanSpec:
    gamma_grid: tuple
    J_grid: tuple
    L_list: tuple
    n_realizations: int = 1
    epsilon: float = 0.0
    coupling_disorder: float = 0.0
    h0: float = 1.25
    g: float = 1.0
    boundary: str = "open"
    base_seed: int = 0
    observables: tuple = ("gap", "purity_ss", "d_eff", "r_mean")

    def __post_init__(self):
        for name in ("gamma_grid", "J_grid", "L_list", "observables"):
            value = getattr(self, name)
            if isinstance(value, (str, bytes)) or not hasattr(value, "__iter__"):
                value = (value,)
            object.__setattr__(self, name, tuple(value))
        object.__setattr__(self, "gamma_grid", tuple(float(x) for x in self.gamma_grid))
        object.__setattr__(self, "J_grid", tuple(float(x) for x in self.J_grid))
        object.__setattr__(self, "L_list", tuple(int(x) for x in self.L_list))
        if not self.gamma_grid or not self.J_grid or not self.L_list:
            raise ValueError("gamma_grid, J_grid and L_list must be non-empty")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        unknown = set(self.observables) - set(OBSERVABLES)
        if unknown:
            raise ValueError(f"unknown observables {sorted(unknown)}; allowed: {OBSERVABLES}")

    def to_dict(self) -> dict:
        return {f.name: list(v) if isinstance(v := getattr(self, f.name), tuple) else v for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "ScanSpec":
        return cls(**d)

    def cells(self):
        for gamma in self.gamma_grid:
            for J in self.J_grid:
                for L in self.L_list:
                    for r in range(self.n_realizations):
                        yield gamma, J, L, r

    def n_cells(self) -> int:
        return len(self.gamma_grid) * len(self.J_grid) * len(self.L_list) * self.n_realizations

    def flop_estimate(self) -> float:
        per_L = sum((2.0 ** L) ** 3 for L in self.L_list)
        return 10 * per_L * len(self.gamma_grid) * len(self.J_grid) * self.n_realizations


@dataclass
class ScanRecord:
    gamma: float
    J: float
    L: int
    realization: int
    seed: int
    gap: Optional[float] = None
    purity_ss: Optional[float] = None
    d_eff: Optional[float] = None
    r_mean: Optional[float] = None
    condition: Optional[float] = None
    phase: Optional[str] = None
    status: str = "ok"
    wall_time: float = 0.0
    extras: dict = field(default_factory=dict, repr=False)

    @property
    def key(self):
        return (self.gamma, self.J, self.L, self.realization)

    def row(self):
        return [getattr(self, c) for c in CSV_COLUMNS]


def cell_seed(base_seed: int, L: int, realization: int) -> int:
    return mix_seed(base_seed, L, realization)


def cell_parameters(spec: ScanSpec, gamma: float, J: float, L: int, realization: int) -> ChainParameters:
    return ChainParameters(
        L=L,
        h0=spec.h0,
        epsilon=spec.epsilon,
        g=spec.g,
        gamma=gamma,
        J=J,
        coupling_disorder=spec.coupling_disorder,
        boundary=spec.boundary,
        seed=cell_seed(spec.base_seed, L, realization),
    )


def compute_cell(spec: ScanSpec, gamma: float, J: float, L: int, realization: int) -> ScanRecord:
    """Evaluate the requested observables for one cell; failures end up in ``status``."""
    p = cell_parameters(spec, gamma, J, L, realization)
    rec = ScanRecord(gamma=gamma, J=J, L=L, realization=realization, seed=p.seed)
    obs = set(spec.observables)
    t0 = time.perf_counter()
    try:
        H = build_chain(p)
        need_vectors = bool(obs & {"purity_ss", "d_eff", "alpha", "entropy_profile", "histogram"})
        if not need_vectors:
            w = eigenvalues_only(H)
            rec.gap = purification_gap(w)
            rec.phase = "pure" if rec.gap > gap_threshold(gamma) else "mixed"
            if "r_mean" in obs and rec.phase == "mixed":
                stats = r_statistics(w)
                rec.r_mean = stats.r_mean
                rec.extras["r_histogram"] = (stats.bin_edges, stats.histogram)
        else:
            s = decompose(H, context=f"gamma={gamma}, J={J}, L={L}, realization={realization}")
            rec.gap = purification_gap(s)
            rec.phase = "pure" if rec.gap > gap_threshold(gamma) else "mixed"
            if "r_mean" in obs and rec.phase == "mixed":
                stats = r_statistics(s)
                rec.r_mean = stats.r_mean
                rec.extras["r_histogram"] = (stats.bin_edges, stats.histogram)
            if obs & {"d_eff", "alpha"}:
                rec.d_eff = effective_dimension(s)
            if obs & {"purity_ss", "histogram"}:
                if rec.phase == "mixed" and classify_pt(s) == "mixed":
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore")
                        ss = diagonal_ensemble(s, histogram_bins=40 if "histogram" in obs else None)
                    rec.purity_ss = ss.purity
                    if ss.eigenvalue_histogram is not None:
                        rec.extras["histogram"] = ss.eigenvalue_histogram
                else:
                    rec.purity_ss = 1.0
            if "entropy_profile" in obs:
                from ptsim.spectral import eigenstate_entropy_profile

                rec.extras["entropy_profile"] = eigenstate_entropy_profile(s)
            rec.condition = s.condition
    except (DecompositionError, np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
        rec.status = f"error: {exc}".replace("\n", " ")
        log.warning("cell %s failed: %s", rec.key, exc)
    rec.wall_time = time.perf_counter() - t0
    return rec


def _compute_args(args):
    return compute_cell(*args)


def run_scan(spec: ScanSpec, workers: int = 1) -> list:
    """One :class:`ScanRecord` per cell, canonically sorted."""
    if spec.flop_estimate() > FLOP_BUDGET:
        warnings.warn(
            f"scan needs ~{spec.flop_estimate():.1e} flop-equivalents (budget {FLOP_BUDGET:.0e})",
            stacklevel=2,
        )
    jobs = [(spec, *cell) for cell in spec.cells()]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_compute_args, jobs))
    else:
        records = [_compute_args(job) for job in jobs]
    return sorted(records, key=lambda r: r.key)


@dataclass
class CellAverage:
    gamma: float
    J: float
    L: int
    mean: Optional[float]
    stderr: Optional[float]
    n: int


def disorder_average(records: Sequence[ScanRecord], observable: str) -> list:
    """Mean and standard error of ``observable`` per (gamma, J, L); null values are skipped."""
    groups: dict = {}
    for rec in records:
        groups.setdefault((rec.gamma, rec.J, rec.L), []).append(getattr(rec, observable))
    out = []
    for (gamma, J, L), values in sorted(groups.items()):
        vals = np.array([v for v in values if v is not None], dtype=float)
        if vals.size == 0:
            out.append(CellAverage(gamma, J, L, None, None, 0))
            continue
        stderr = float(np.std(vals, ddof=1) / np.sqrt(vals.size)) if vals.size >= 2 else None
        out.append(CellAverage(gamma, J, L, float(np.mean(vals)), stderr, int(vals.size)))
    return out


def _averaged(records, observable, gamma, J):
    rows = [a for a in disorder_average(records, observable) if a.gamma == gamma and a.J == J and a.mean is not None]
    return sorted((a.L, a.mean) for a in rows)


def fit_scan_alpha(records, gamma: float, J: float) -> float:
    """alpha from disorder-averaged D_eff across the scanned sizes."""
    return fit_alpha(_averaged(records, "d_eff", gamma, J))


def fit_scan_purity(records, gamma: float, J: float) -> float:
    """c from disorder-averaged Pi_ss across the scanned sizes."""
    return purity_scaling_fit(_averaged(records, "purity_ss", gamma, J))


def gamma_c_from_grid(records, J: float, L: int) -> Optional[float]:
    """Smallest gamma on the grid whose averaged gap exceeds the pure-phase threshold."""
    for a in disorder_average(records, "gap"):
        if a.J == J and a.L == L and a.mean is not None and a.mean > gap_threshold(a.gamma):
            return a.gamma
    return None


def refine_gamma_c(spec: ScanSpec, records, J: float, L: int, realization: int = 0, tol: float = 1e-3):
    """Bisect the first grid bracket in which one realization's gap opens."""
    grid = sorted(spec.gamma_grid)
    mixed = [r.gamma for r in records if r.J == J and r.L == L and r.realization == realization and r.phase == "mixed"]
    pure = [r.gamma for r in records if r.J == J and r.L == L and r.realization == realization and r.phase == "pure"]
    if not pure or not mixed:
        return None
    hi = min(pure)
    below = [g for g in grid if g < hi and g in mixed]
    if not below:
        return None
    lo = max(below)
    p = cell_parameters(spec, lo, J, L, realization)
    return find_gamma_c(p, lo, hi, tol=tol).gamma_c


@dataclass
class PurificationFit:
    rate: Optional[float]
    phase: str


def purification_time_fit(times, purity, tail_fraction: float = 0.5, min_decades: float = 2.0, floor: float = 1e-13):
    """Exponential rate of 1 - Pi(t) over the late-time tail.

    The series counts as purifying ('pure') only if 1 - Pi drops by at least
    ``min_decades`` e-folds... measured in natural-log units across the
    fitted window; otherwise the phase is 'mixed' and ``rate`` is None.
    For the two-level system the fitted rate is twice the spectral gap.
    """
    t = np.asarray(times, dtype=float)
    y = 1.0 - np.asarray(purity, dtype=float)
    ok = y > floor
    t, y = t[ok], y[ok]
    if t.size < 4:
        return PurificationFit(None, "mixed")
    start = int((1.0 - tail_fraction) * t.size)
    tt, ly = t[start:], np.log(y[start:])
    if tt.size < 3 or ly[0] - ly[-1] < min_decades:
        return PurificationFit(None, "mixed")
    slope = np.polyfit(tt, ly, 1)[0]
    if slope >= 0:
        return PurificationFit(None, "mixed")
    return PurificationFit(float(-slope), "pure")


def write_scan(records, spec: ScanSpec, out_dir, prefix: str = "scan") -> tuple:
    """Write ``<prefix>_<hash>.csv`` and its JSON sidecar; returns both paths.

    The hash is the SHA-256 of the canonical JSON of the spec and is
    embedded in both file names and in the sidecar.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = config_hash(spec.to_dict())
    stem = f"{prefix}_{digest[:12]}"
    csv_path = write_csv(out_dir / f"{stem}.csv", CSV_COLUMNS, (r.row() for r in records))
    sidecar = {
        "spec": spec.to_dict(),
        "config_hash": digest,
        "version": __version__,
        "n_records": len(records),
        "n_failed": sum(r.status != "ok" for r in records),
        "wall_time_total": float(sum(r.wall_time for r in records)),
    }
    json_path = write_json(out_dir / f"{stem}.json", sidecar)
    return csv_path, json_path
