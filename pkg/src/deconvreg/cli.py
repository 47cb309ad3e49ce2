"""Command-line front end: estimate from data, run simulations, compare selectors.

Exit codes: 0 success, 2 input validation, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import math
import os
import secrets
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bootstrap import BootstrapConfig, SelectionGrid, select_g_opt
from .ecdf import ErrorModel, residual_ecdf
from .errors import InputValidationError, NumericalError
from .estimator import estimate_theta, pilot_h, residuals
from .kernel import SmoothingKernelSpec
from .riskhull import RiskHullConfig
from .sim import METHODS, ExperimentConfig, ResultTable, SignalSpec, run_experiment
from .spectral import DesignGrid, DistortionSpec, Sample

log = logging.getLogger("deconvreg")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
ESTIMATE_GRID_POINTS = 512


def fmt(v) -> str:
    """Round-trip decimal text: 17 significant digits."""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v):.17g}"


def write_csv(path: Path, header: list[str], rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


# -- config --------------------------------------------------------------------------------

_SECTION_KEYS = {
    "error_model": {"kind", "sd", "df"},
    "distortion": {"kind", "scale"},
    "kernel": {"kind", "flat_radius", "decay_exponent"},
    "bootstrap": {"replications_B", "scaling_c_n", "rng_seed"},
    "risk_hull": {"alpha", "penalty_mode", "draws", "scale", "max_cutoff", "penalty_seed", "unbiased_risk"},
}
_TOP_KEYS = {
    "signal", "half_sizes", "pilot_constant", "grid_count", "replications",
    "selection_methods", "master_seed", "t_points", "aimse_range", "k_truth_factor",
    "max_failure_rate", *_SECTION_KEYS,
}


def _check_keys(d: dict, allowed: set, where: str) -> None:
    if not isinstance(d, dict):
        raise InputValidationError(f"{where} must be a JSON object")
    unknown = sorted(set(d) - allowed)
    if unknown:
        raise InputValidationError(f"unknown config key(s) in {where}: {', '.join(unknown)}")


def _distortion(d: dict) -> DistortionSpec:
    kind = d.get("kind", "laplace_truncated")
    if kind == "laplace":
        kind = "laplace_truncated"
    return DistortionSpec(kind, float(d.get("scale", 0.1)))


def _kernel(d: dict) -> SmoothingKernelSpec:
    kind = d.get("kind", "paper_sim")
    if kind == "paper_sim":
        return SmoothingKernelSpec.paper_sim(float(d.get("flat_radius", 7.0)), float(d.get("decay_exponent", 6.0)))
    if kind == "spectral_cutoff":
        return SmoothingKernelSpec.spectral_cutoff(float(d.get("flat_radius", 1.0)))
    raise InputValidationError(f"kernel kind {kind!r} is not available from a config file")


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from parsed JSON; unknown keys are errors."""
    _check_keys(raw, _TOP_KEYS, "config")
    sections = {}
    for name, keys in _SECTION_KEYS.items():
        sec = raw.get(name, {})
        _check_keys(sec, keys, name)
        sections[name] = sec
    kw = {}
    if "signal" in raw:
        kw["signal"] = SignalSpec(raw["signal"])
    if raw.get("error_model"):
        kw["error_model"] = ErrorModel(**sections["error_model"])
    if raw.get("distortion"):
        kw["distortion"] = _distortion(sections["distortion"])
    if raw.get("kernel"):
        kw["kernel"] = _kernel(sections["kernel"])
    if raw.get("bootstrap"):
        kw["bootstrap"] = BootstrapConfig(**sections["bootstrap"])
    if raw.get("risk_hull"):
        kw["risk_hull"] = RiskHullConfig(**sections["risk_hull"])
    for key in ("half_sizes", "selection_methods", "t_points", "aimse_range"):
        if key in raw:
            kw[key] = tuple(raw[key])
    for key in ("pilot_constant", "max_failure_rate"):
        if key in raw:
            kw[key] = float(raw[key])
    for key in ("grid_count", "replications", "k_truth_factor", "master_seed"):
        if key in raw and raw[key] is not None:
            kw[key] = int(raw[key])
    if "aimse_range" in kw:
        lo, hi, cnt = kw["aimse_range"]
        kw["aimse_range"] = (float(lo), float(hi), int(cnt))
    try:
        return ExperimentConfig(**kw)
    except TypeError as exc:
        raise InputValidationError(str(exc)) from exc


def load_config(path: str | None) -> tuple[ExperimentConfig, dict]:
    if path is None:
        return ExperimentConfig(), {}
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputValidationError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(raw), raw


def _config_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def _resolve_seed(seed: int | None) -> int:
    return secrets.randbits(64) if seed is None else int(seed)


def write_manifest(out: Path, command: str, inputs: dict, seed: int, started: float, files: list[Path]):
    manifest = {
        "command": command,
        "version": __version__,
        "master_seed": seed,
        "config_hash": _config_hash({"command": command, "inputs": inputs, "seed": seed, "version": __version__}),
        "inputs": inputs,
        "wall_time_s": time.perf_counter() - started,
        "outputs": [p.name for p in files],
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return path


# -- estimate ------------------------------------------------------------------------------


def read_data(path: str) -> Sample:
    """CSV with header ``x,y`` and an odd number of rows."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputValidationError(f"cannot read data {path}: {exc}") from exc
    if not rows or [c.strip() for c in rows[0]] != ["x", "y"]:
        raise InputValidationError("data file must start with the header 'x,y'")
    try:
        data = np.array([[float(a), float(b)] for a, b in rows[1:]], dtype=float)
    except ValueError as exc:
        raise InputValidationError(f"malformed data row: {exc}") from exc
    if data.shape[0] % 2 == 0:
        raise InputValidationError(f"data must have an odd number of rows (2n+1), got {data.shape[0]}")
    grid = DesignGrid.from_points(data[:, 0])
    return Sample(grid, data[:, 1])


def cmd_estimate(args) -> int:
    started = time.perf_counter()
    sample = read_data(args.data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dist = DistortionSpec(args.distortion, args.distortion_scale)
    kernel = _kernel({"kind": args.kernel, **({"flat_radius": args.flat_radius} if args.flat_radius else {})})
    seed = _resolve_seed(args.seed)
    files = []
    if args.h is not None:
        h = args.h
    else:
        pilot = estimate_theta(sample, dist, kernel, pilot_h(sample.n, args.pilot_constant))
        cfg = BootstrapConfig(replications_B=args.bootstrap_reps)
        grid = SelectionGrid.default(sample.n, args.grid_count)
        sel = select_g_opt(sample, pilot, grid, kernel, dist, cfg, np.random.default_rng(seed))
        h = sel.g_opt
        files.append(write_csv(
            out / "objective_curve.csv", ["g", "imse_star", "std_error"],
            zip(sel.candidates, sel.objective_curve, sel.std_errors),
        ))
    est = estimate_theta(sample, dist, kernel, h)
    xs = -0.5 + np.arange(ESTIMATE_GRID_POINTS) / ESTIMATE_GRID_POINTS
    files.append(write_csv(out / "estimate.csv", ["x", "theta_hat"], zip(xs, est(xs))))
    res = residuals(sample, est)
    files.append(write_csv(out / "residuals.csv", ["x", "residual"], zip(sample.grid.points, res.values)))
    ecdf = residual_ecdf(res)
    files.append(write_csv(out / "ecdf.csv", ["t", "F_hat"], zip(ecdf.sorted_values, ecdf(ecdf.sorted_values))))
    inputs = {
        "data_sha256": hashlib.sha256(Path(args.data).read_bytes()).hexdigest(),
        "distortion": args.distortion, "distortion_scale": args.distortion_scale,
        "kernel": args.kernel, "flat_radius": args.flat_radius, "h": h,
        "selected": args.h is None, "bootstrap_reps": args.bootstrap_reps,
        "grid_count": args.grid_count, "pilot_constant": args.pilot_constant,
    }
    write_manifest(out, "estimate", inputs, seed, started, files)
    print(f"h = {h:.6g}; wrote {len(files) + 1} files to {out}")
    return EXIT_OK


# -- simulate / compare --------------------------------------------------------------------


def _experiment_inputs(config: ExperimentConfig, raw: dict, seed: int) -> tuple[ExperimentConfig, dict]:
    config = dataclasses.replace(config, master_seed=seed)
    inputs = {"config": raw, "resolved": repr(config)}
    return config, inputs


def write_tables(table: ResultTable, out: Path) -> list[Path]:
    """One CSV per facet; rows are sample sizes, columns the evaluation points."""
    files = []
    t_cols = [f"t={fmt(t)}" for t in table.t_points]
    for facet in ("bias", "variance", "amse"):
        rows = []
        for m, st in table.methods.items():
            for i, N in enumerate(table.sample_sizes()):
                rows.append([m, N, *getattr(st, facet)[i]])
        files.append(write_csv(out / f"{facet}.csv", ["method", "N", *t_cols], rows))
    rows = []
    for m, st in table.methods.items():
        for i, N in enumerate(table.sample_sizes()):
            rows.append([m, N, st.aimse[i], st.imse[i], st.imse_se[i], float(np.median(st.selected_h[i]))])
    files.append(write_csv(out / "summary.csv", ["method", "N", "aimse", "imse", "imse_se", "median_h"], rows))
    for name, ratios in (("log_ratios.csv", table.log_ratios), ("riskhull_log_ratios.csv", table.riskhull_log_ratios)):
        if ratios:
            rows = [[2 * n + 1, r, v] for n, vals in ratios.items() for r, v in enumerate(vals)]
            files.append(write_csv(out / name, ["N", "replication", "log_ratio"], rows))
    files.append(write_csv(
        out / "failures.csv", ["N", "failures"], [[2 * n + 1, f] for n, f in table.failures.items()]
    ))
    return files


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    config, raw = load_config(args.config)
    seed = _resolve_seed(args.seed if args.seed is not None else config.master_seed)
    config, inputs = _experiment_inputs(config, raw, seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table = run_experiment(config, threads=args.threads)
    files = write_tables(table, out)
    write_manifest(out, "simulate", inputs, seed, started, files)
    print(f"seed {seed}; wrote {len(files) + 1} files to {out}")
    return EXIT_OK


def cmd_compare_riskhull(args) -> int:
    started = time.perf_counter()
    config, raw = load_config(args.config)
    methods = set(config.selection_methods)
    if "risk_hull" not in methods or not methods & {"bootstrap", "bootstrap_cutoff"}:
        raise InputValidationError(
            "comparison needs risk_hull and a bootstrap method in selection_methods"
        )
    seed = _resolve_seed(args.seed if args.seed is not None else config.master_seed)
    config, inputs = _experiment_inputs(config, raw, seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    table = run_experiment(config, threads=args.threads)
    names = [m for m in config.selection_methods if m in ("bootstrap", "bootstrap_cutoff", "risk_hull")]
    rows = [[N, *(table.methods[m].imse[i] for m in names)] for i, N in enumerate(table.sample_sizes())]
    files = [write_csv(out / "imse_comparison.csv", ["N", *(f"imse_{m}" for m in names)], rows)]
    files += write_tables(table, out)
    write_manifest(out, "compare-riskhull", inputs, seed, started, files)
    print(f"seed {seed}; wrote {len(files) + 1} files to {out}")
    return EXIT_OK


# -- selftest ------------------------------------------------------------------------------


def cmd_selftest(args) -> int:
    """Quick analytic checks that need no simulation."""
    from .ecdf import asymptotic_aimse, asymptotic_covariance

    checks = [
        ("normal Sigma(0,0)", asymptotic_covariance(ErrorModel.normal(), 0.0, 0.0), 0.25 - 1 / (2 * math.pi), 1e-10),
        ("normal AIMSE", asymptotic_aimse(ErrorModel.normal()), (2 / 3) / (2 * math.sqrt(math.pi)), 1e-8),
        ("t4 Sigma(0,0)", asymptotic_covariance(ErrorModel.student_t(), 0.0, 0.0), 0.15625, 1e-10),
    ]
    ok = True
    for name, got, want, tol in checks:
        good = abs(got - want) <= tol
        ok &= good
        print(f"{'PASS' if good else 'FAIL'} {name}: {got:.10g} (expected {want:.10g})")
    return EXIT_OK if ok else EXIT_NUMERICAL


# -- entry point ---------------------------------------------------------------------------


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="deconvreg", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=None)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out", default="out")
    common.add_argument("--config", default=None, help="JSON experiment config")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("estimate", parents=[common], help="fit one data set")
    e.add_argument("data", help="CSV with header x,y and an odd number of rows")
    e.add_argument("--distortion", default="laplace_truncated", choices=["laplace_truncated", "uniform"])
    e.add_argument("--distortion-scale", type=float, default=0.1)
    e.add_argument("--kernel", default="paper_sim", choices=["paper_sim", "spectral_cutoff"])
    e.add_argument("--flat-radius", type=float, default=None)
    g = e.add_mutually_exclusive_group(required=True)
    g.add_argument("--h", type=float, help="fixed regularization parameter")
    g.add_argument("--select-bootstrap", action="store_true", help="choose h by bootstrap IMSE")
    e.add_argument("--pilot-constant", type=float, default=5.0)
    e.add_argument("--bootstrap-reps", type=int, default=200)
    e.add_argument("--grid-count", type=int, default=100)
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("simulate", parents=[common], help="run the Monte-Carlo experiment")
    s.set_defaults(func=cmd_simulate)
    c = sub.add_parser("compare-riskhull", parents=[common], help="bootstrap vs risk hull cutoffs")
    c.set_defaults(func=cmd_compare_riskhull)
    t = sub.add_parser("selftest", parents=[common], help="analytic sanity checks")
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("DECONV_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except (InputValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
