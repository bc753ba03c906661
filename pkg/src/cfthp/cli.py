"""Command-line front end: run, sweep presets, and config validation."""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import time

from . import io
from .montecarlo import ExperimentConfig, run_experiment

THREADS_ENV = "CFTHP_THREADS"

# Preset grids reproducing the three experiment sweeps.
_SWEEPS = {
    "fig1": dict(
        snr_db_grid=(0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0),
        sigma_e2_grid=(0.15,),
        schemes=("linearZF", "RS-linearZF", "RS-cTHP", "RS-dTHP"),
        branch_counts=(1,),
    ),
    "fig2": dict(
        snr_db_grid=(20.0,),
        sigma_e2_grid=(0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30),
        schemes=("linearZF", "RS-linearZF", "RS-cTHP", "RS-dTHP"),
        branch_counts=(1,),
    ),
    "fig3": dict(
        snr_db_grid=(20.0,),
        sigma_e2_grid=(0.15,),
        schemes=("MB-RS-cTHP", "MB-RS-dTHP"),
        branch_counts=(1, 2, 3, 4),
    ),
}


def sweep_config(preset: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Experiment config for a named sweep preset, on top of ``base`` (defaults
    when omitted)."""
    if preset not in _SWEEPS:
        raise ValueError(f"unknown sweep preset {preset!r}")
    base = base if base is not None else ExperimentConfig()
    return dataclasses.replace(base, **_SWEEPS[preset])


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="output directory for the run")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default: ${THREADS_ENV} or 1)")
    p.add_argument("--seed", type=int, default=None, help="override the master seed")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfthp",
        description="Monte Carlo simulator for rate-splitting cell-free MIMO "
                    "downlinks with Tomlinson-Harashima precoding.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the experiment described by a config file")
    p_run.add_argument("--config", required=True, help="path to the config file")
    _add_common(p_run)

    p_sweep = sub.add_parser("sweep", help="run one of the preset sweeps")
    p_sweep.add_argument("preset", choices=sorted(_SWEEPS))
    p_sweep.add_argument("--config", default=None,
                         help="optional base config the preset is applied on")
    p_sweep.add_argument("--estimates", type=int, default=None,
                         help="override the number of channel estimates")
    p_sweep.add_argument("--errors", type=int, default=None,
                         help="override the number of error samples per estimate")
    _add_common(p_sweep)

    p_val = sub.add_parser("validate", help="parse and validate a config file")
    p_val.add_argument("--config", required=True)
    return parser


def _execute(cfg: ExperimentConfig, out_dir: str, threads: int) -> int:
    t0 = time.perf_counter()
    stats: dict = {}
    rows = run_experiment(cfg, threads=threads, stats_out=stats)
    manifest = io.build_manifest(cfg, stats, time.perf_counter() - t0)
    run_dir = io.write_results(rows, manifest, out_dir)
    print(f"wrote {len(rows)} rows to {run_dir / 'results.csv'}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "validate":
            io.parse_config(args.config)
            print("config OK")
            return 0

        if args.command == "run":
            cfg = io.parse_config(args.config)
        else:
            base = io.parse_config(args.config) if args.config else ExperimentConfig()
            cfg = sweep_config(args.preset, base)
            overrides = {}
            if args.estimates is not None:
                overrides["n_estimates"] = args.estimates
            if args.errors is not None:
                overrides["n_error_samples"] = args.errors
            if overrides:
                cfg = dataclasses.replace(cfg, **overrides)

        if args.seed is not None:
            cfg = dataclasses.replace(cfg, master_seed=args.seed)
        threads = args.threads if args.threads is not None else _default_threads()
        return _execute(cfg, args.out, threads)
    except (io.ParseError, io.ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive surface
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
