"""Configuration files, result tables, and the run manifest.

Config files are INI-style key/value sections ([scenario] and [experiment]);
every key is optional and absent keys take the default network setup
(12 APs, 3 users, 400 m square, 6-AP clusters, 100 x 100 realizations).
Results are written as a comma-separated table with a stable column set and
row order, next to a JSON manifest that echoes the normalized config.
"""

from __future__ import annotations

import configparser
import datetime as _dt
import json
import time
from pathlib import Path

from . import __version__
from .montecarlo import AlphaPolicy, ConfigInvalid, ExperimentConfig, ResultRow, validate_config
from .scenario import ScenarioConfig

RESULT_COLUMNS = ("scheme", "snr_db", "sigma_e2", "L", "alpha_c", "esr", "std_err")


class ParseError(ValueError):
    """Config file is syntactically or structurally wrong."""


class ValidationError(ValueError):
    """Config parsed but violates an invariant."""


_SCENARIO_FIELDS = {
    "num_aps": int, "num_users": int, "side_m": float, "freq_mhz": float,
    "ap_height_m": float, "user_height_m": float, "d0_m": float, "d1_m": float,
    "shadow_sigma_db": float, "bandwidth_hz": float, "noise_figure_db": float,
    "noise_temp_k": float,
}

_EXPERIMENT_SCALARS = {
    "cluster_size": int, "n_estimates": int, "n_error_samples": int,
    "master_seed": int, "modulo_lambda": float, "cthp_power_norm": str,
    "freeze_geometry": bool, "alpha_search_estimates": int, "alpha_search_errors": int,
}
_EXPERIMENT_LISTS = {"sigma_e2": float, "snr_db": float, "branch_counts": int,
                     "schemes": str}


def _parse_list(raw: str, conv, key: str):
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if not items:
        raise ValidationError(f"{key}: empty list")
    try:
        return tuple(conv(s) for s in items)
    except ValueError as exc:
        raise ParseError(f"{key}: {exc}") from exc


def _parse_alpha(raw: str) -> AlphaPolicy:
    raw = raw.strip()
    if ":" not in raw:
        raise ParseError("alpha_c must be 'fixed:<value>' or 'grid:<v1,v2,...>'")
    mode, _, rest = raw.partition(":")
    mode = mode.strip()
    values = _parse_list(rest, float, "alpha_c")
    if mode == "fixed":
        if len(values) != 1:
            raise ParseError("alpha_c fixed policy takes exactly one value")
        return AlphaPolicy.fixed(values[0])
    if mode == "grid":
        return AlphaPolicy.grid(values)
    raise ParseError(f"alpha_c: unknown mode {mode!r}")


def parse_config(path) -> ExperimentConfig:
    """Read a config file, apply defaults, validate, and return the config.

    Raises ParseError on malformed files or unknown fields and
    ValidationError when a value violates an invariant.
    """
    path = Path(path)
    if not path.exists():
        raise ParseError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read_string(path.read_text())
    except configparser.Error as exc:
        raise ParseError(str(exc)) from exc

    known_sections = {"scenario", "experiment"}
    for section in parser.sections():
        if section not in known_sections:
            raise ParseError(f"unknown section [{section}]")

    scenario_kwargs = {}
    if parser.has_section("scenario"):
        for key, raw in parser.items("scenario"):
            if key not in _SCENARIO_FIELDS:
                raise ParseError(f"unknown field 'scenario.{key}'")
            try:
                scenario_kwargs[key] = _SCENARIO_FIELDS[key](raw)
            except ValueError as exc:
                raise ParseError(f"scenario.{key}: {exc}") from exc

    exp_kwargs = {}
    if parser.has_section("experiment"):
        for key, raw in parser.items("experiment"):
            if key in _EXPERIMENT_SCALARS:
                conv = _EXPERIMENT_SCALARS[key]
                try:
                    if conv is bool:
                        exp_kwargs[key] = raw.strip().lower() in ("1", "true", "yes", "on")
                    else:
                        exp_kwargs[key] = conv(raw)
                except ValueError as exc:
                    raise ParseError(f"experiment.{key}: {exc}") from exc
            elif key in _EXPERIMENT_LISTS:
                name = {"sigma_e2": "sigma_e2_grid", "snr_db": "snr_db_grid"}.get(key, key)
                exp_kwargs[name] = _parse_list(raw, _EXPERIMENT_LISTS[key], key)
            elif key == "alpha_c":
                exp_kwargs["alpha_c"] = _parse_alpha(raw)
            else:
                raise ParseError(f"unknown field 'experiment.{key}'")

    try:
        cfg = ExperimentConfig(scenario=ScenarioConfig(**scenario_kwargs), **exp_kwargs)
        validate_config(cfg)
    except (ValueError, ConfigInvalid) as exc:
        raise ValidationError(str(exc)) from exc
    return cfg


def serialize_config(cfg: ExperimentConfig) -> str:
    """Normalized text form of a config; parse(serialize(cfg)) round-trips."""
    lines = ["[scenario]"]
    for key in _SCENARIO_FIELDS:
        lines.append(f"{key} = {getattr(cfg.scenario, key)!r}")
    lines.append("")
    lines.append("[experiment]")
    for key in _EXPERIMENT_SCALARS:
        lines.append(f"{key} = {getattr(cfg, key)}")
    lines.append(f"sigma_e2 = {', '.join(repr(v) for v in cfg.sigma_e2_grid)}")
    lines.append(f"snr_db = {', '.join(repr(v) for v in cfg.snr_db_grid)}")
    lines.append(f"branch_counts = {', '.join(str(v) for v in cfg.branch_counts)}")
    lines.append(f"schemes = {', '.join(cfg.schemes)}")
    lines.append(f"alpha_c = {cfg.alpha_c.mode}:{','.join(repr(v) for v in cfg.alpha_c.values)}")
    lines.append("")
    return "\n".join(lines)


def format_rows(rows) -> str:
    """Render result rows as the canonical comma-separated table."""
    out = [",".join(RESULT_COLUMNS)]
    for row in rows:
        out.append(",".join([
            row.scheme,
            repr(float(row.snr_db)),
            repr(float(row.sigma_e2)),
            str(int(row.num_branches)),
            repr(float(row.alpha_c)),
            repr(float(row.esr)),
            repr(float(row.std_err)),
        ]))
    return "\n".join(out) + "\n"


def parse_rows(text: str) -> list[ResultRow]:
    """Read back a results table written by :func:`format_rows`."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != ",".join(RESULT_COLUMNS):
        raise ParseError("results table header mismatch")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(RESULT_COLUMNS):
            raise ParseError(f"bad results row: {ln!r}")
        rows.append(ResultRow(parts[0], float(parts[1]), float(parts[2]),
                              int(parts[3]), float(parts[4]), float(parts[5]),
                              float(parts[6]), 0.0))
    return rows


def build_manifest(cfg: ExperimentConfig, stats: dict, wall_time_s: float) -> dict:
    return {
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "master_seed": cfg.master_seed,
        "config": serialize_config(cfg),
        "estimate_retries": stats.get("estimate_retries", []),
        "rate_evaluations": stats.get("rate_evaluations", {}),
        "total_wall_time_s": wall_time_s,
    }


def write_results(rows, manifest: dict, out_dir) -> Path:
    """Write results.csv and manifest.json into a fresh timestamped directory
    below ``out_dir``; never clobbers an existing run."""
    base = Path(out_dir)
    base.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y%m%d-%H%M%S")
    run_dir = base / f"run-{stamp}"
    suffix = 0
    while run_dir.exists():
        suffix += 1
        run_dir = base / f"run-{stamp}-{suffix}"
    run_dir.mkdir()
    (run_dir / "results.csv").write_text(format_rows(rows))
    (run_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return run_dir
