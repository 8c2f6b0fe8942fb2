"""Command-line entry point: ``ptsim <subcommand> [--config FILE] [--set key=value ...]``.

Configs are flat JSON objects whose keys depend on the subcommand; unknown
keys, wrong types and missing required keys exit with status 2.  Values
given with ``--set`` are parsed as JSON when possible (``--set L=10``,
``--set gamma_grid=[0.1,0.2]``) and fall back to plain strings.

Documented defaults: the measurement term is ``+i gamma (1 + sigma^y)``,
boundaries are open, entropies use log base 2, time evolution of states
uses the ``T rho T^dagger`` ordering and the diagonal ensemble uses the
``T^dagger T`` contraction.

Exit codes: 0 success, 1 runtime or numerical failure, 2 config error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
import numpy as np

from ptsim import __version__, dynamics, meanfield, scan, spectral, steady_state
from ptsim._io import config_hash, write_csv, write_json
from ptsim.hamiltonians import ChainParameters, build_chain, build_tls, max_sites
from ptsim.states import random_product_state

log = logging.getLogger("ptsim")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2
LARGE_L = 12
TARGETS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "tls-table")


class ConfigError(ValueError):
    """Invalid configuration; maps to exit status 2."""


# Schemas: key -> (kind, default).  A default of REQUIRED marks a mandatory key.
REQUIRED = object()

_CHAIN = {
    "L": ("int", 8),
    "h0": ("float", 1.25),
    "epsilon": ("float", 0.0),
    "g": ("float", 1.0),
    "gamma": ("float", 0.0),
    "J": ("float", 0.95),
    "coupling_disorder": ("float", 0.0),
    "boundary": (("open", "periodic"), "open"),
    "seed": ("int", 0),
}

SCHEMAS = {
    "tls": {
        "b_values": ("float_list", [round(0.1 * k, 10) for k in range(1, 10)]),
        "theta": ("float", 0.0),
        "t_max": ("float", 0.0),
        "n_times": ("int", 2001),
    },
    "spectrum": {**_CHAIN, "entropy": ("bool", False), "cut": ("int", 0)},
    "dynamics": {
        **_CHAIN,
        "t_min": ("float", 0.01),
        "t_max": ("float", 100.0),
        "n_times": ("int", 60),
    },
    "steady-state": {
        **_CHAIN,
        "ordering": (dynamics.ORDERINGS, "TdagT"),
        "histogram_bins": ("int", 40),
        "write_rho": ("bool", True),
    },
    "meanfield": {
        "h": ("float", 1.25),
        "g": ("float", 1.0),
        "z": ("int", 2),
        "J": ("float", 0.95),
        "J_grid": ("float_list", [round(0.05 * k, 10) for k in range(41)]),
        "gamma_grid": ("float_list", [round(0.05 * k, 10) for k in range(61)]),
    },
    "scan": {
        "gamma_grid": ("float_list", REQUIRED),
        "J_grid": ("float_list", REQUIRED),
        "L_list": ("int_list", REQUIRED),
        "n_realizations": ("int", 1),
        "epsilon": ("float", 0.0),
        "coupling_disorder": ("float", 0.0),
        "h0": ("float", 1.25),
        "g": ("float", 1.0),
        "boundary": (("open", "periodic"), "open"),
        "base_seed": ("int", 0),
        "observables": ("str_list", ["gap", "purity_ss", "d_eff", "r_mean"]),
    },
    "reproduce": {
        "target": (TARGETS, REQUIRED),
        "allow_large": ("bool", False),
    },
}
COMMON = {"format": (("csv", "json"), "csv")}


def _coerce(key: str, kind, value):
    def bad(expected):
        return ConfigError(f"config key '{key}': expected {expected}, got {value!r}")

    if isinstance(kind, tuple):
        if value not in kind:
            raise ConfigError(f"config key '{key}': must be one of {list(kind)}, got {value!r}")
        return value
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise bad("an integer")
        return int(value)
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise bad("a number")
        return float(value)
    if kind == "bool":
        if not isinstance(value, bool):
            raise bad("true or false")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise bad("a string")
        return value
    if kind.endswith("_list"):
        if not isinstance(value, list):
            value = [value]
        return [_coerce(f"{key}[{i}]", kind[:-5], v) for i, v in enumerate(value)]
    raise AssertionError(kind)


@dataclass
class RunConfig:
    subcommand: str
    parameters: dict
    output_dir: str = "."
    format: str = "csv"

    def to_dict(self) -> dict:
        return {"subcommand": self.subcommand, "output_dir": self.output_dir, "format": self.format, **self.parameters}

    def hash(self) -> str:
        return config_hash({"subcommand": self.subcommand, "format": self.format, **self.parameters})

    def chain_parameters(self) -> ChainParameters:
        return ChainParameters(**{k: self.parameters[k] for k in _CHAIN})

    def scan_spec(self) -> scan.ScanSpec:
        return scan.ScanSpec(**{k: self.parameters[k] for k in SCHEMAS["scan"]})


def _parse_set(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            out[key.strip()] = json.loads(raw)
        except json.JSONDecodeError:
            out[key.strip()] = raw
    return out


def parse_config(subcommand: str, document: dict | None = None, overrides: dict | None = None,
                 output_dir: str = ".") -> RunConfig:
    """Validate a flat key-value document (plus overrides) into a :class:`RunConfig`."""
    if subcommand not in SCHEMAS:
        raise ConfigError(f"unknown subcommand {subcommand!r}; choose from {list(SCHEMAS)}")
    merged = dict(document or {})
    merged.update(overrides or {})
    doc_sub = merged.pop("subcommand", subcommand)
    if doc_sub != subcommand:
        raise ConfigError(f"config is for subcommand '{doc_sub}', not '{subcommand}'")
    output_dir = merged.pop("output_dir", output_dir)
    schema = {**SCHEMAS[subcommand], **COMMON}
    unknown = sorted(set(merged) - set(schema))
    if unknown:
        raise ConfigError(f"unknown config key '{unknown[0]}' for '{subcommand}'; allowed: {sorted(schema)}")
    params = {}
    for key, (kind, default) in schema.items():
        if key in merged:
            params[key] = _coerce(key, kind, merged[key])
        elif default is REQUIRED:
            raise ConfigError(f"missing required config key '{key}' for '{subcommand}'")
        else:
            params[key] = list(default) if isinstance(default, list) else default
    fmt = params.pop("format")
    cfg = RunConfig(subcommand, params, str(output_dir), fmt)
    _semantic_checks(cfg)
    return cfg


def _semantic_checks(cfg: RunConfig) -> None:
    p = cfg.parameters
    cap = max_sites()
    sizes = p.get("L_list", [p["L"]] if "L" in p else [])
    for L in sizes:
        if L < 1 or L > cap:
            raise ConfigError(f"L={L} outside [1, {cap}] (PTSIM_MAX_L caps the chain length)")
    try:
        if cfg.subcommand in ("spectrum", "dynamics", "steady-state"):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                cfg.chain_parameters()
        elif cfg.subcommand == "scan":
            cfg.scan_spec()
        elif cfg.subcommand == "meanfield":
            meanfield.MeanFieldParameters(h=p["h"], g=p["g"], J=p["J"], z=p["z"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.subcommand == "dynamics" and not 0 < p["t_min"] < p["t_max"]:
        raise ConfigError("dynamics needs 0 < t_min < t_max")
    if cfg.subcommand == "spectrum" and p["cut"] and not 1 <= p["cut"] < p["L"]:
        raise ConfigError(f"cut must satisfy 1 <= cut <= L-1 (0 means L//2), got {p['cut']}")


def serialize(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), sort_keys=True)


def load_config_file(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc.msg} (line {exc.lineno})") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return doc


# Output ----------------------------------------------------------------------

class _Writer:
    """Writes tables as CSV or JSON with the config hash in every file name."""

    def __init__(self, cfg: RunConfig, out_dir: Path):
        self.cfg = cfg
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.tag = cfg.hash()[:12]
        self.paths: list = []

    def table(self, name: str, header, rows) -> Path:
        rows = [list(r) for r in rows]
        if self.cfg.format == "csv":
            path = write_csv(self.dir / f"{name}_{self.tag}.csv", header, rows)
        else:
            data = [dict(zip(header, (_jsonable(v) for v in r))) for r in rows]
            path = write_json(self.dir / f"{name}_{self.tag}.json", {"config_hash": self.cfg.hash(), "rows": data})
        self.paths.append(path)
        return path

    def file(self, path: Path) -> Path:
        self.paths.append(path)
        return path

    def sidecar(self, extra: dict | None = None) -> Path:
        doc = {"config": self.cfg.to_dict(), "config_hash": self.cfg.hash(), "version": __version__,
               "outputs": [p.name for p in self.paths], **(extra or {})}
        path = write_json(self.dir / f"{self.cfg.subcommand}_{self.tag}.json", doc)
        return path


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


# Subcommands -------------------------------------------------------------------

def run_tls(cfg: RunConfig, w: _Writer) -> None:
    p = cfg.parameters
    rows = []
    for b in p["b_values"]:
        if abs(abs(b) - 1.0) < 1e-12:
            rows.append([b, 1.0, -abs(b), 0.0, "exceptional"])
            continue
        s = spectral.decompose(build_tls(b))
        ss = steady_state.steady_state(s)
        rows.append([b, ss.purity, ss.sigma_z_mean, spectral.purification_gap(s), ss.phase])
    w.table("tls_table", ["b", "purity_ss", "sigma_z", "gap", "phase"], rows)

    if p["t_max"] > 0:
        times = np.linspace(0.0, p["t_max"], p["n_times"])
        psi0 = np.array([np.cos(p["theta"]), np.sin(p["theta"])], dtype=complex)
        series = []
        for b in p["b_values"]:
            s = dynamics.tls_spectrum(b)
            pur, nl = dynamics.purity_series(s, times, method="expm")
            ret = dynamics.return_probability(psi0, s, times, method="expm")
            series.extend([b, t, a, r, n] for t, a, r, n in zip(times, pur, ret, nl))
        w.table("tls_series", ["b", "t", "purity", "return_probability", "norm_log"], series)


def run_spectrum(cfg: RunConfig, w: _Writer) -> None:
    p = cfg.parameters
    s = spectral.decompose(build_chain(cfg.chain_parameters()))
    cols = [np.arange(s.dim), s.eigenvalues.real, s.eigenvalues.imag]
    header = ["index", "re", "im"]
    if p["entropy"] and s.n_sites > 1:
        from ptsim.states import renyi2_columns

        cols.append(renyi2_columns(s.P, p["cut"] or s.n_sites // 2))
        header.append("S2")
    w.table("spectrum", header, zip(*cols))
    phase = spectral.classify_pt(s)
    r_mean = spectral.r_statistics(s).r_mean if phase == "mixed" and s.dim >= 3 else None
    w.table(
        "spectrum_summary",
        ["L", "gamma", "gap", "phase", "d_eff", "r_mean", "condition"],
        [[s.n_sites, p["gamma"], spectral.purification_gap(s), phase,
          spectral.effective_dimension(s), r_mean, s.condition]],
    )


def run_dynamics(cfg: RunConfig, w: _Writer) -> None:
    p = cfg.parameters
    s = spectral.decompose(build_chain(cfg.chain_parameters()))
    times = dynamics.log_time_grid(p["t_min"], p["t_max"], p["n_times"])
    pur, norm_log = dynamics.purity_series(s, times)
    s2 = None
    if s.n_sites > 1:
        psi0 = random_product_state(s.n_sites, np.random.default_rng([p["seed"], 7]))
        s2, _ = dynamics.entropy_series(psi0, s, times)
    rows = [[t, a, None if s2 is None else s2[k], n] for k, (t, a, n) in enumerate(zip(times, pur, norm_log))]
    w.table("timeseries", ["t", "purity", "S2", "norm_log"], rows)
    gap = spectral.purification_gap(s)
    fit = scan.purification_time_fit(times, pur)
    w.table("dynamics_summary", ["gap", "fitted_rate", "fit_phase"], [[gap, fit.rate, fit.phase]])


def run_steady_state(cfg: RunConfig, w: _Writer) -> None:
    p = cfg.parameters
    s = spectral.decompose(build_chain(cfg.chain_parameters()))
    res = steady_state.steady_state(s, p["ordering"], histogram_bins=p["histogram_bins"] or None)
    w.table(
        "steady_state",
        ["L", "gamma", "purity_ss", "sigma_z_mean", "phase", "merged_blocks", "condition"],
        [[s.n_sites, p["gamma"], res.purity, res.sigma_z_mean, res.phase, res.merged_blocks, s.condition]],
    )
    h = res.eigenvalue_histogram
    if h is not None:
        rows = [[lo, hi, c] for lo, hi, c in zip(h.edges[:-1], h.edges[1:], h.counts)]
        w.table("rho_spectrum_histogram", ["phi_low", "phi_high", "count"], rows)
    if p["write_rho"]:
        path = w.dir / f"rho_ss_{w.tag}.bin"
        steady_state.write_rho_binary(path, res.rho_ss)
        w.file(path)


def run_meanfield(cfg: RunConfig, w: _Writer) -> None:
    p = cfg.parameters
    base = meanfield.MeanFieldParameters(h=p["h"], g=p["g"], J=p["J"], z=p["z"])
    rows = []
    for J in p["J_grid"]:
        q = meanfield.MeanFieldParameters(h=p["h"], g=p["g"], J=J, z=p["z"])
        rows.append([J, meanfield.phase_boundary(q), meanfield.critical_gamma(q)])
    w.table("meanfield_boundary", ["J", "gamma_c", "gamma_c_solver"], rows)
    curve = meanfield.magnetization_curve(base, sorted(p["gamma_grid"]))
    w.table("meanfield_magnetization", ["gamma", "m"], curve.tolist())


def run_scan_cmd(cfg: RunConfig, w: _Writer, workers: int = 1) -> None:
    spec = cfg.scan_spec()
    records = scan.run_scan(spec, workers=workers)
    w.table("scan", list(scan.CSV_COLUMNS), (r.row() for r in records))
    rows = []
    for obs in ("gap", "purity_ss", "d_eff", "r_mean"):
        for a in scan.disorder_average(records, obs):
            rows.append([a.gamma, a.J, a.L, obs, a.mean, a.stderr, a.n])
    w.table("scan_average", ["gamma", "J", "L", "observable", "mean", "stderr", "n"], rows)
    extra_rows = []
    for r in records:
        prof = r.extras.get("entropy_profile")
        if prof is not None:
            extra_rows.extend([r.gamma, r.J, r.L, r.realization, e, s2] for e, s2 in prof)
    hist_rows = []
    for r in records:
        hist = r.extras.get("r_histogram")
        if hist is not None:
            edges, density = hist
            hist_rows.extend([r.gamma, r.J, r.L, r.realization, lo, hi, d] for lo, hi, d in zip(edges[:-1], edges[1:], density))
    if hist_rows:
        w.table("scan_r_histogram", ["gamma", "J", "L", "realization", "r_low", "r_high", "density"], hist_rows)
    if extra_rows:
        w.table("scan_entropy_profile", ["gamma", "J", "L", "realization", "re_lambda", "S2"], extra_rows)
    failed = [r for r in records if r.status != "ok"]
    if failed:
        log.warning("%d of %d cells failed", len(failed), len(records))


RUNNERS: dict = {
    "tls": run_tls,
    "spectrum": run_spectrum,
    "dynamics": run_dynamics,
    "steady-state": run_steady_state,
    "meanfield": run_meanfield,
}


# Reproduction recipes ---------------------------------------------------------

def load_recipe(target: str) -> dict:
    if target not in TARGETS:
        raise ConfigError(f"unknown reproduce target {target!r}; choose from {list(TARGETS)}")
    text = resources.files("ptsim.recipes").joinpath(f"{target}.json").read_text()
    return json.loads(text)


def expand_recipe(target: str, output_dir: str = ".") -> list:
    """The validated RunConfigs a target expands to, in execution order."""
    recipe = load_recipe(target)
    return [
        (run["name"], parse_config(run["subcommand"], run["parameters"], output_dir=output_dir))
        for run in recipe["runs"]
    ]


def _largest_L(cfg: RunConfig) -> int:
    p = cfg.parameters
    return max(p.get("L_list", [p.get("L", 1)]))


def run_reproduce(cfg: RunConfig, out_dir: Path, workers: int = 1) -> int:
    target = cfg.parameters["target"]
    runs = expand_recipe(target, str(out_dir))
    big = [name for name, c in runs if _largest_L(c) >= LARGE_L]
    if big and not cfg.parameters["allow_large"]:
        raise ConfigError(
            f"target {target} includes L >= {LARGE_L} runs ({', '.join(big)}); "
            "pass --allow-large (or --set allow_large=true) to acknowledge the compute cost"
        )
    manifest = {"target": target, "version": __version__, "config_hash": cfg.hash(), "runs": []}
    status = EXIT_OK
    for name, sub in runs:
        t0 = time.perf_counter()
        entry = {"name": name, "subcommand": sub.subcommand, "config": sub.to_dict(), "config_hash": sub.hash()}
        try:
            writer = _Writer(sub, out_dir / target / name)
            _dispatch(sub, writer, workers)
            writer.sidecar()
            entry.update(status="ok", outputs=[str(p.relative_to(out_dir)) for p in writer.paths])
        except Exception as exc:  # per-run failures are reported, other runs continue
            log.error("run %s failed: %s", name, exc)
            entry.update(status=f"error: {exc}")
            status = EXIT_RUNTIME
        entry["wall_time"] = time.perf_counter() - t0
        manifest["runs"].append(entry)
    (out_dir / target).mkdir(parents=True, exist_ok=True)
    write_json(out_dir / target / "manifest.json", manifest)
    return status


def _dispatch(cfg: RunConfig, writer: _Writer, workers: int) -> None:
    if cfg.subcommand == "scan":
        run_scan_cmd(cfg, writer, workers)
    else:
        RUNNERS[cfg.subcommand](cfg, writer)


# Entry point ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptsim", description="Non-Hermitian Ising purification-transition simulator.")
    parser.add_argument("--version", action="version", version=f"ptsim {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)
    for name in SCHEMAS:
        sp = subs.add_parser(name, help=f"run the {name} pipeline")
        sp.add_argument("target", nargs="?", help="reproduce target" if name == "reproduce" else argparse.SUPPRESS)
        sp.add_argument("--config", help="JSON file with a flat key-value object")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one key (JSON value)")
        sp.add_argument("--out", default=".", help="output directory (default: current directory)")
        sp.add_argument("--seed", type=int, help="override seed / base_seed")
        sp.add_argument("--threads", type=int, default=1, help="worker processes for scans (default 1)")
        sp.add_argument("--verbose", "-v", action="store_true")
        if name == "reproduce":
            sp.add_argument("--allow-large", action="store_true", help=f"acknowledge L >= {LARGE_L} compute cost")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    try:
        doc = load_config_file(args.config) if args.config else {}
        overrides = _parse_set(args.set)
        if args.subcommand == "reproduce":
            if args.target:
                overrides["target"] = args.target
            if args.allow_large:
                overrides["allow_large"] = True
        elif args.target:
            raise ConfigError(f"unexpected positional argument {args.target!r}")
        if args.seed is not None:
            key = "base_seed" if args.subcommand == "scan" else "seed"
            if key in SCHEMAS[args.subcommand]:
                overrides[key] = args.seed
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = parse_config(args.subcommand, doc, overrides, output_dir=args.out)
        out_dir = Path(cfg.output_dir)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"output directory {out_dir} is not writable: {exc.strerror}") from None
        if not os.access(out_dir, os.W_OK):
            raise ConfigError(f"output directory {out_dir} is not writable")
    except ConfigError as exc:
        print(f"ptsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if cfg.subcommand == "reproduce":
            return run_reproduce(cfg, out_dir, args.threads)
        writer = _Writer(cfg, out_dir)
        _dispatch(cfg, writer, args.threads)
        sidecar = writer.sidecar()
        for path in writer.paths + [sidecar]:
            print(path)
        return EXIT_OK
    except ConfigError as exc:
        print(f"ptsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"ptsim: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
