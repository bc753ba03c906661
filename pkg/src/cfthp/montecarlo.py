"""Experiment orchestration: seeded draws, scheme evaluation, aggregation.

The sampling protocol per estimate index is one network snapshot (geometry
plus shadowing), one small-scale truth, one CSIT error draw forming the
estimate, and a batch of conditional error realizations used both for
branch selection and for rate averaging. All raw draws depend only on the
estimate index and the master seed, never on the grid point, so every
scheme and every grid value consumes identical randomness (common random
numbers) and comparisons across the result table are paired.

Substreams come from a counter-based generator keyed by a hierarchical
path, making the run reproducible and independent of worker count.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import channel, metrics, scenario
from .linalg import RankDeficient, lq_decompose
from .multibranch import make_patterns, select_branch
from .precoding import (CENTRALIZED, DECENTRALIZED, DEFAULT_LAMBDA, LINEAR,
                        make_rs_precoder)

MAX_RETRIES = 10

# Stream namespaces (first path element) and purposes (third).
_MAIN, _ALPHA_SEARCH = 0, 1
_GEOMETRY, _SMALL_SCALE, _CSIT_NOISE, _ERROR_DRAWS = 0, 1, 2, 3


class ConfigInvalid(ValueError):
    """The experiment configuration violates an invariant."""


class TrialFailure(RuntimeError):
    """An estimate draw stayed degenerate after the retry cap."""


@dataclass(frozen=True)
class SchemeTraits:
    structure: str
    rate_splitting: bool
    multibranch: bool


SCHEMES = {
    "linearZF": SchemeTraits(LINEAR, False, False),
    "RS-linearZF": SchemeTraits(LINEAR, True, False),
    "RS-cTHP": SchemeTraits(CENTRALIZED, True, False),
    "RS-dTHP": SchemeTraits(DECENTRALIZED, True, False),
    "MB-RS-cTHP": SchemeTraits(CENTRALIZED, True, True),
    "MB-RS-dTHP": SchemeTraits(DECENTRALIZED, True, True),
}


@dataclass(frozen=True)
class AlphaPolicy:
    """Common-stream power split policy: a fixed fraction or a searched grid."""

    mode: str                      # "fixed" | "grid"
    values: tuple[float, ...]

    @staticmethod
    def fixed(value: float) -> "AlphaPolicy":
        return AlphaPolicy("fixed", (float(value),))

    @staticmethod
    def grid(values) -> "AlphaPolicy":
        return AlphaPolicy("grid", tuple(float(v) for v in values))


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: scenario.ScenarioConfig = field(default_factory=scenario.ScenarioConfig)
    cluster_size: int = 6
    sigma_e2_grid: tuple[float, ...] = (0.15,)
    snr_db_grid: tuple[float, ...] = (20.0,)
    branch_counts: tuple[int, ...] = (1,)
    schemes: tuple[str, ...] = ("linearZF", "RS-cTHP", "RS-dTHP")
    alpha_c: AlphaPolicy = field(default_factory=lambda: AlphaPolicy.fixed(0.2))
    n_estimates: int = 100
    n_error_samples: int = 100
    master_seed: int = 12345
    modulo_lambda: float = DEFAULT_LAMBDA
    cthp_power_norm: str = "trace"
    freeze_geometry: bool = False
    alpha_search_estimates: int = 10
    alpha_search_errors: int = 25


@dataclass(frozen=True)
class ResultRow:
    scheme: str
    snr_db: float
    sigma_e2: float
    num_branches: int
    alpha_c: float
    esr: float
    std_err: float
    wall_time_s: float


def validate_config(cfg: ExperimentConfig) -> None:
    if not cfg.schemes:
        raise ConfigInvalid("schemes list is empty")
    for name in cfg.schemes:
        if name not in SCHEMES:
            raise ConfigInvalid(f"unknown scheme {name!r}")
    if not cfg.sigma_e2_grid or not cfg.snr_db_grid or not cfg.branch_counts:
        raise ConfigInvalid("grids must be nonempty")
    for s in cfg.sigma_e2_grid:
        if not 0.0 <= s < 1.0:
            raise ConfigInvalid(f"sigma_e2 {s} outside [0, 1)")
    k = cfg.scenario.num_users
    for count in cfg.branch_counts:
        if not 1 <= count <= k + 1:
            raise ConfigInvalid(f"branch count {count} outside [1, {k + 1}]")
    if not 1 <= cfg.cluster_size <= cfg.scenario.num_aps:
        raise ConfigInvalid(f"cluster_size {cfg.cluster_size} outside [1, {cfg.scenario.num_aps}]")
    if cfg.n_estimates < 1 or cfg.n_error_samples < 1:
        raise ConfigInvalid("need n_estimates >= 1 and n_error_samples >= 1")
    if cfg.alpha_c.mode not in ("fixed", "grid") or not cfg.alpha_c.values:
        raise ConfigInvalid("alpha_c policy must be fixed(value) or grid(values)")
    for a in cfg.alpha_c.values:
        if not 0.0 <= a < 1.0:
            raise ConfigInvalid(f"alpha_c {a} outside [0, 1)")
    if cfg.cthp_power_norm not in ("trace", "diag"):
        raise ConfigInvalid("cthp_power_norm must be 'trace' or 'diag'")
    if cfg.modulo_lambda <= 0:
        raise ConfigInvalid("modulo_lambda must be positive")


def seed_stream(master_seed: int, path) -> np.random.Generator:
    """Deterministic substream for a hierarchical index path."""
    seq = np.random.SeedSequence(master_seed, spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(seq))


@dataclass
class _Bundle:
    """Raw draws for one estimate index, shared across the whole grid."""

    zeta: np.ndarray
    g_true: np.ndarray
    h: np.ndarray
    h_err_samples: np.ndarray   # (S, M, K)
    clusters: np.ndarray
    g_hat: dict                 # sigma_e2 -> M x K estimate
    g_bar: dict                 # sigma_e2 -> M x K sparse estimate
    g_samples: dict             # sigma_e2 -> (S, M, K) conditional truths
    retries: int


def _draw_bundle(cfg: ExperimentConfig, est: int, namespace: int,
                 n_err: int, sigma_grid) -> _Bundle:
    sc = cfg.scenario
    shape = (sc.num_aps, sc.num_users)
    for attempt in range(MAX_RETRIES + 1):
        geo_est = 0 if cfg.freeze_geometry else est
        geo_attempt = 0 if cfg.freeze_geometry else attempt
        _, zeta = scenario.sample_scenario(
            sc, seed_stream(cfg.master_seed, (namespace, geo_est, _GEOMETRY, geo_attempt)))
        h = channel.complex_normal(
            seed_stream(cfg.master_seed, (namespace, est, _SMALL_SCALE, attempt)), shape)
        g_true = np.sqrt(zeta) * h
        h_err_csit = channel.complex_normal(
            seed_stream(cfg.master_seed, (namespace, est, _CSIT_NOISE, attempt)), shape)
        h_err_samples = channel.complex_normal(
            seed_stream(cfg.master_seed, (namespace, est, _ERROR_DRAWS, attempt)),
            (n_err,) + shape)

        try:
            if float(np.sum(np.abs(g_true) ** 2)) < 1e-30:
                raise RankDeficient("zero-energy channel draw")
            g_hat, g_bar, g_samples = {}, {}, {}
            clusters = None
            for sig in sigma_grid:
                est_mat = channel.estimate_from_error(h, zeta, sig, h_err_csit)
                clusters, bar = channel.select_aps(est_mat, zeta, cfg.cluster_size)
                lq_decompose(bar.conj().T)  # rank check; raises RankDeficient
                g_hat[sig] = est_mat
                g_bar[sig] = bar
                g_samples[sig] = channel.conditional_from_errors(est_mat, zeta, sig,
                                                                 h_err_samples)
            return _Bundle(zeta, g_true, h, h_err_samples, clusters,
                           g_hat, g_bar, g_samples, attempt)
        except RankDeficient:
            continue
    raise TrialFailure(f"estimate {est} stayed rank deficient after {MAX_RETRIES} retries")


def _evaluate_point(cfg: ExperimentConfig, bundle: _Bundle, scheme: str,
                    snr_db: float, sigma_e2: float, num_branches: int,
                    alpha_c: float, noise_std: float) -> tuple[np.ndarray, float, int]:
    """One scheme at one grid point on one estimate bundle.

    Returns (per-user average common rates, average sum-private rate,
    number of branch evaluations)."""
    traits = SCHEMES[scheme]
    g_bar = bundle.g_bar[sigma_e2]
    g_samples = bundle.g_samples[sigma_e2]
    p_t = scenario.transmit_power_for_snr(snr_db, bundle.g_true, cfg.scenario)
    alpha = alpha_c if traits.rate_splitting else 0.0

    if not traits.multibranch:
        precoder = make_rs_precoder(g_bar, traits.structure, alpha, p_t,
                                    cthp_power_norm=cfg.cthp_power_norm)
        report = metrics.average_rates(precoder, g_samples, noise_std)
        return report.r_common, report.sum_private, 1

    patterns = make_patterns(cfg.scenario.num_users, num_branches)

    def evaluator(g_ordered_herm, pattern):
        precoder = make_rs_precoder(g_bar, traits.structure, alpha, p_t,
                                    perm=pattern.perm,
                                    cthp_power_norm=cfg.cthp_power_norm)
        rep = metrics.average_rates(precoder, g_samples, noise_std)
        return rep.sum_private, rep

    choice = select_branch(g_bar.conj().T, patterns, evaluator)
    report = choice.payloads[int(np.argmax(choice.scores))]
    return report.r_common, report.sum_private, len(patterns)


def _grid_points(cfg: ExperimentConfig):
    """Deterministic grid enumeration: scheme, then snr, sigma_e2, branches."""
    for scheme in cfg.schemes:
        traits = SCHEMES[scheme]
        counts = cfg.branch_counts if traits.multibranch else (1,)
        for snr_db in cfg.snr_db_grid:
            for sigma_e2 in cfg.sigma_e2_grid:
                for num_branches in counts:
                    yield scheme, float(snr_db), float(sigma_e2), int(num_branches)


def choose_alpha_c(policy: AlphaPolicy, evaluate) -> float:
    """Resolve the power split: fixed value, or argmax of ``evaluate`` over the
    grid (ties toward the smaller candidate)."""
    if policy.mode == "fixed":
        return policy.values[0]
    best_alpha, best_score = None, -np.inf
    for alpha in sorted(policy.values):
        score = evaluate(alpha)
        if score > best_score:
            best_alpha, best_score = alpha, score
    return float(best_alpha)


def _resolve_alphas(cfg: ExperimentConfig, noise_std: float) -> dict:
    """Per grid point, pick alpha_c (grid policy runs a reduced-budget search
    on a dedicated stream namespace so the main draws stay untouched)."""
    resolved = {}
    search_bundles = None
    for point in _grid_points(cfg):
        scheme = point[0]
        if not SCHEMES[scheme].rate_splitting:
            resolved[point] = 0.0
            continue
        if cfg.alpha_c.mode == "fixed":
            resolved[point] = cfg.alpha_c.values[0]
            continue
        if search_bundles is None:
            search_bundles = [
                _draw_bundle(cfg, e, _ALPHA_SEARCH, cfg.alpha_search_errors,
                             cfg.sigma_e2_grid)
                for e in range(cfg.alpha_search_estimates)
            ]

        def evaluate(alpha, point=point):
            scheme, snr_db, sigma_e2, num_branches = point
            reports = []
            for bundle in search_bundles:
                r_common, sum_private, _ = _evaluate_point(
                    cfg, bundle, scheme, snr_db, sigma_e2, num_branches,
                    alpha, noise_std)
                reports.append((r_common, sum_private))
            stacked = np.stack([r for r, _ in reports])
            return float(stacked.mean(axis=0).min()
                         + np.mean([s for _, s in reports]))

        resolved[point] = choose_alpha_c(cfg.alpha_c, evaluate)
    return resolved


def run_experiment(cfg: ExperimentConfig, threads: int = 1,
                   stats_out: dict | None = None) -> list[ResultRow]:
    """Run the full grid and return one result row per (scheme, grid point).

    ``threads`` parallelizes across estimate indices and never changes the
    numbers: partial results are stored by estimate index and reduced in a
    fixed order.
    """
    validate_config(cfg)
    noise_std = float(np.sqrt(scenario.noise_variance_w(cfg.scenario)))
    points = list(_grid_points(cfg))
    alphas = _resolve_alphas(cfg, noise_std)

    n_est = cfg.n_estimates
    r_common_acc = {p: [None] * n_est for p in points}
    sum_private_acc = {p: np.zeros(n_est) for p in points}
    eval_time = {p: 0.0 for p in points}
    branch_evals = {p: 0 for p in points}
    retries = [0] * n_est

    def process_estimate(est: int):
        bundle = _draw_bundle(cfg, est, _MAIN, cfg.n_error_samples, cfg.sigma_e2_grid)
        out = {}
        for point in points:
            scheme, snr_db, sigma_e2, num_branches = point
            t0 = time.perf_counter()
            r_common, sum_private, n_branches = _evaluate_point(
                cfg, bundle, scheme, snr_db, sigma_e2, num_branches,
                alphas[point], noise_std)
            out[point] = (r_common, sum_private, n_branches,
                          time.perf_counter() - t0)
        return est, bundle.retries, out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(process_estimate, range(n_est)))
    else:
        outcomes = [process_estimate(e) for e in range(n_est)]

    for est, n_retries, out in outcomes:
        retries[est] = n_retries
        for point, (r_common, sum_private, n_branches, dt) in out.items():
            r_common_acc[point][est] = r_common
            sum_private_acc[point][est] = sum_private
            branch_evals[point] += n_branches
            eval_time[point] += dt

    rows = []
    for point in points:
        scheme, snr_db, sigma_e2, num_branches = point
        r_common = np.stack(r_common_acc[point])       # (n_est, K)
        sum_private = sum_private_acc[point]
        k_star = int(np.argmin(r_common.mean(axis=0)))
        totals = r_common[:, k_star] + sum_private
        esr = float(totals.mean())
        std_err = float(totals.std(ddof=1) / np.sqrt(n_est)) if n_est > 1 else 0.0
        rows.append(ResultRow(scheme, snr_db, sigma_e2, num_branches,
                              alphas[point], esr, std_err, eval_time[point]))

    rows.sort(key=lambda r: (r.scheme, r.snr_db, r.sigma_e2, r.num_branches, r.alpha_c))
    if stats_out is not None:
        stats_out["estimate_retries"] = retries
        stats_out["rate_evaluations"] = {
            _point_label(p): branch_evals[p] * cfg.n_error_samples for p in points
        }
        stats_out["per_estimate_totals"] = {}
        stats_out["per_estimate_sum_private"] = {}
        for point in points:
            r_common = np.stack(r_common_acc[point])
            k_star = int(np.argmin(r_common.mean(axis=0)))
            stats_out["per_estimate_totals"][_point_label(point)] = (
                r_common[:, k_star] + sum_private_acc[point])
            stats_out["per_estimate_sum_private"][_point_label(point)] = (
                sum_private_acc[point].copy())
    return rows


def _point_label(point) -> str:
    scheme, snr_db, sigma_e2, num_branches = point
    return f"{scheme}/snr={snr_db:g}/sigma_e2={sigma_e2:g}/L={num_branches}"
