"""Monte-Carlo benchmark driver: NMSE sweeps, runtime sweeps, CSV reports.

Trials are paired: within one trial every method consumes the identical
channel and noise realization, generated from a per-trial stream seeded
with ``config.seed XOR trial_index``.  Results are therefore
bit-reproducible for a fixed master seed regardless of how trials are
scheduled.  Wall-clock timing wraps the estimator call only; data
generation, channel reconstruction, and NMSE evaluation are excluded.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .channel import (
    ConfigError,
    DictionaryPair,
    ResourceLimitError,
    SystemConfig,
    build_1d_sensing_matrix,
    build_channel,
    build_dictionaries,
    build_pilots,
    build_selection_precoders,
    cancel_pilots,
    generate_paths,
    synthesize_measurements,
)
from .estimators import (
    StoppingRule,
    ls_1d_direct,
    omp_1d,
    omp_2d,
    reconstruct_channel,
    reconstruct_from_grid,
    simplified_ls_2d,
    two_stage,
)
from .linalg import DimensionMismatch, devec, vec

logger = logging.getLogger(__name__)

METHODS = ("omp1d", "somp2stage", "omp2d", "ls1d", "ls2d_simple")
_SENSING_METHODS = frozenset({"omp1d", "ls1d"})

CSV_HEADER = ("method", "snr_db", "grid_n", "trial", "nmse_db", "wall_time_s", "iterations", "seed")


@dataclass
class TrialRecord:
    """One (method, trial) outcome.

    ``build_time_s`` holds the separately-timed 1-D sensing-matrix
    construction cost where applicable; it lives only in memory and is not
    part of the CSV schema.
    """

    method: str
    snr_db: float
    grid_n: int
    trial_index: int
    nmse_db: float
    wall_time_s: float
    iterations: int
    seed_used: int
    build_time_s: float = 0.0


@dataclass
class SweepSpec:
    """What to run: scenario, operating points, trial count, and methods."""

    base_config: SystemConfig
    snr_points_db: tuple = ()
    grid_sizes: tuple = ()
    trials: int = 1
    methods: tuple = ("omp1d", "somp2stage", "omp2d")
    output_path: str | None = None
    include_noiseless: bool = False

    def __post_init__(self) -> None:
        self.snr_points_db = tuple(float(s) for s in self.snr_points_db)
        self.grid_sizes = tuple(int(g) for g in self.grid_sizes)
        self.methods = tuple(self.methods)
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not self.methods:
            raise ConfigError("at least one method is required")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}; choose from {list(METHODS)}")


@dataclass
class SummaryRow:
    """Aggregate statistics for one (method, snr, grid size) cell."""

    method: str
    snr_db: float
    grid_n: int
    n_records: int
    exact_count: int
    mean_nmse_db: float
    median_nmse_db: float
    mean_time_s: float
    median_time_s: float


@dataclass
class TrialInstance:
    """One generated trial: channel truth plus the pilot-cancelled observation."""

    cfg: SystemConfig
    paths: object
    h_true: np.ndarray
    y_meas: np.ndarray
    seed_used: int


def nmse(h_true: np.ndarray, h_est: np.ndarray) -> float:
    """Normalized mean squared error in dB; ``-inf`` flags an exact match."""
    h_true = np.asarray(h_true)
    h_est = np.asarray(h_est)
    if h_true.shape != h_est.shape:
        raise DimensionMismatch(f"shape mismatch {h_true.shape} vs {h_est.shape}")
    ref = float(np.linalg.norm(h_true) ** 2)
    if ref == 0.0:
        raise ValueError("true channel has zero norm; NMSE is undefined")
    err = float(np.linalg.norm(h_est - h_true) ** 2)
    if err == 0.0:
        return float("-inf")
    return 10.0 * math.log10(err / ref)


def snr_to_noise_var(snr_db: float, sigma_p2: float) -> float:
    """Noise variance realizing a pilot-power SNR of ``snr_db`` dB."""
    return sigma_p2 / (10.0 ** (snr_db / 10.0))


def derive_trial_seed(master_seed: int, trial_index: int) -> int:
    """Per-trial stream seed; XOR keeps trials independent of scheduling order."""
    return int(master_seed) ^ int(trial_index)


def make_trial_instance(cfg: SystemConfig, trial_index: int) -> TrialInstance:
    """Generate one trial's channel, observation, and pilot-cancelled data."""
    seed = derive_trial_seed(cfg.seed, trial_index)
    rng = np.random.default_rng(seed)
    paths = generate_paths(cfg, rng)
    h = build_channel(paths, cfg)
    f, w = build_selection_precoders(cfg)
    x = build_pilots(cfg)
    y = synthesize_measurements(h, f, w, x, cfg, rng)
    y_tilde = cancel_pilots(y, x, cfg)
    return TrialInstance(cfg=cfg, paths=paths, h_true=h, y_meas=y_tilde, seed_used=seed)


def run_estimator(
    method: str,
    inst: TrialInstance,
    dic: DictionaryPair,
    sensing: np.ndarray | None,
    stop: StoppingRule,
) -> tuple[np.ndarray, int, float]:
    """Run one method on one trial; returns (channel estimate, iterations, seconds)."""
    y = inst.y_meas
    if method in _SENSING_METHODS and sensing is None:
        raise ResourceLimitError(f"method {method!r} needs the 1-D sensing matrix")
    if method == "omp1d":
        y_vec = vec(y)
        t0 = time.perf_counter()
        est = omp_1d(y_vec, sensing, stop)
        dt = time.perf_counter() - t0
        return reconstruct_channel(est, dic), est.iterations, dt
    if method == "omp2d":
        t0 = time.perf_counter()
        est = omp_2d(y, dic, stop)
        dt = time.perf_counter() - t0
        return reconstruct_channel(est, dic), est.iterations, dt
    if method == "somp2stage":
        t0 = time.perf_counter()
        result = two_stage(y, dic, stop)
        dt = time.perf_counter() - t0
        iterations = len(result.aoa_rows) + len(result.pairs)
        return reconstruct_channel(result, dic), iterations, dt
    if method == "ls1d":
        y_vec = vec(y)
        t0 = time.perf_counter()
        z = ls_1d_direct(y_vec, sensing)
        dt = time.perf_counter() - t0
        z_grid = devec(z, dic.grid_n, dic.grid_n)
        return reconstruct_from_grid(z_grid, dic), 0, dt
    if method == "ls2d_simple":
        t0 = time.perf_counter()
        z_grid = simplified_ls_2d(y, dic)
        dt = time.perf_counter() - t0
        return reconstruct_from_grid(z_grid, dic), 0, dt
    raise ConfigError(f"unknown method {method!r}")


def run_nmse_sweep(spec: SweepSpec) -> list[TrialRecord]:
    """Paired NMSE sweep over SNR points (plus an optional noiseless point).

    Estimator failures are caught per (method, trial) and recorded as rows
    with ``nmse_db = nan`` so one bad cell cannot abort the sweep.
    """
    if not spec.snr_points_db and not spec.include_noiseless:
        raise ConfigError("NMSE sweep needs at least one SNR point or the noiseless flag")
    cfg0 = spec.base_config
    f, w = build_selection_precoders(cfg0)
    dic = build_dictionaries(cfg0, f, w)
    sensing = None
    if _SENSING_METHODS & set(spec.methods):
        sensing = build_1d_sensing_matrix(dic)
    points = [(s, snr_to_noise_var(s, cfg0.sigma_p2)) for s in spec.snr_points_db]
    if spec.include_noiseless:
        points.append((float("inf"), 0.0))
    records: list[TrialRecord] = []
    stop = StoppingRule.fixed(cfg0.n_paths)
    for snr_db, noise_var in points:
        cfg = replace(cfg0, sigma_n2=noise_var)
        for trial in range(spec.trials):
            inst = make_trial_instance(cfg, trial)
            for method in spec.methods:
                records.append(
                    _record_trial(method, inst, dic, sensing, stop, snr_db, cfg.grid_n, trial)
                )
    if spec.output_path is not None:
        emit_csv(records, spec.output_path)
    return records


def run_runtime_sweep(spec: SweepSpec) -> list[TrialRecord]:
    """Timing sweep over square problem sizes (``n_x = n_y = grid_n``).

    The 1-D sensing matrix is rebuilt once per size with its construction
    time recorded separately on the ``omp1d`` rows; a size that exceeds
    the element cap skips the methods that need the materialized operator.
    One untimed warmup trial per size keeps first-call overhead out of the
    medians.
    """
    if not spec.grid_sizes:
        raise ConfigError("runtime sweep needs at least one grid size")
    if list(spec.grid_sizes) != sorted(spec.grid_sizes):
        raise ConfigError("grid sizes must be sorted ascending")
    snr_db = spec.snr_points_db[0] if spec.snr_points_db else 10.0
    records: list[TrialRecord] = []
    for grid_n in spec.grid_sizes:
        cfg = _square_config(spec.base_config, grid_n, snr_db)
        f, w = build_selection_precoders(cfg)
        dic = build_dictionaries(cfg, f, w)
        sensing = None
        build_time = 0.0
        if _SENSING_METHODS & set(spec.methods):
            try:
                t0 = time.perf_counter()
                sensing = build_1d_sensing_matrix(dic)
                build_time = time.perf_counter() - t0
            except ResourceLimitError as exc:
                logger.warning("grid_n=%d: %s; skipping %s", grid_n, exc, sorted(_SENSING_METHODS))
        stop = StoppingRule.fixed(cfg.n_paths)
        warmup = make_trial_instance(cfg, 0)
        for method in spec.methods:
            if method in _SENSING_METHODS and sensing is None:
                continue
            try:
                run_estimator(method, warmup, dic, sensing, stop)
            except (ValueError, RuntimeError, np.linalg.LinAlgError):
                pass
        for trial in range(spec.trials):
            inst = make_trial_instance(cfg, trial)
            for method in spec.methods:
                if method in _SENSING_METHODS and sensing is None:
                    continue
                record = _record_trial(method, inst, dic, sensing, stop, snr_db, grid_n, trial)
                if method == "omp1d":
                    record.build_time_s = build_time
                records.append(record)
    if spec.output_path is not None:
        emit_csv(records, spec.output_path)
    return records


def _record_trial(method, inst, dic, sensing, stop, snr_db, grid_n, trial) -> TrialRecord:
    try:
        h_hat, iterations, dt = run_estimator(method, inst, dic, sensing, stop)
        value = nmse(inst.h_true, h_hat)
    except (ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        logger.warning("trial %d method %s failed: %s", trial, method, exc)
        return TrialRecord(method, snr_db, grid_n, trial, float("nan"), 0.0, 0, inst.seed_used)
    return TrialRecord(method, snr_db, grid_n, trial, value, dt, iterations, inst.seed_used)


def _square_config(cfg: SystemConfig, grid_n: int, snr_db: float) -> SystemConfig:
    """Variant of ``cfg`` with ``n_x = n_y = grid_n`` for the timing sweep."""
    if grid_n % cfg.n_rf == 0:
        n_rf, q_slots = cfg.n_rf, grid_n // cfg.n_rf
    else:
        n_rf, q_slots = 1, grid_n
    return replace(
        cfg,
        grid_n=grid_n,
        n_x=grid_n,
        n_rf=n_rf,
        q_slots=q_slots,
        sigma_n2=snr_to_noise_var(snr_db, cfg.sigma_p2),
    )


def memory_footprint(cfg: SystemConfig) -> tuple[int, int]:
    """Element counts held by the flattened operator vs. the two factors."""
    flat = cfg.grid_n**2 * cfg.n_x * cfg.n_y
    factored = cfg.grid_n * (cfg.n_x + cfg.n_y)
    return flat, factored


def emit_csv(records: list[TrialRecord], path: str | Path) -> None:
    """Write records with a fixed header and deterministic row order.

    Floats carry 9 significant digits; infinities appear as ``inf`` /
    ``-inf``.  Rows sort by method, then SNR, then grid size, then trial.
    """
    rows = sorted(records, key=lambda r: (r.method, r.snr_db, r.grid_n, r.trial_index))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.method,
                    _fmt(r.snr_db),
                    r.grid_n,
                    r.trial_index,
                    _fmt(r.nmse_db),
                    _fmt(r.wall_time_s),
                    r.iterations,
                    r.seed_used,
                ]
            )


def read_csv(path: str | Path) -> list[TrialRecord]:
    """Parse a file written by :func:`emit_csv` back into records."""
    records = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        for row in reader:
            records.append(
                TrialRecord(
                    method=row[0],
                    snr_db=float(row[1]),
                    grid_n=int(row[2]),
                    trial_index=int(row[3]),
                    nmse_db=float(row[4]),
                    wall_time_s=float(row[5]),
                    iterations=int(row[6]),
                    seed_used=int(row[7]),
                )
            )
    return records


def _fmt(x: float) -> str:
    return format(x, ".9g")


def summarize(records: list[TrialRecord]) -> list[SummaryRow]:
    """Aggregate per (method, snr, grid size).

    Exact recoveries (``-inf`` NMSE) are excluded from the dB mean and
    reported via ``exact_count``; medians run on the raw values.  Failed
    rows (``nan``) are dropped from the NMSE statistics.
    """
    groups: dict[tuple, list[TrialRecord]] = {}
    for r in records:
        groups.setdefault((r.method, r.snr_db, r.grid_n), []).append(r)
    out = []
    for (method, snr_db, grid_n), rows in sorted(groups.items()):
        values = np.array([r.nmse_db for r in rows], dtype=float)
        valid = values[~np.isnan(values)]
        finite = valid[np.isfinite(valid)]
        times = np.array([r.wall_time_s for r in rows], dtype=float)
        out.append(
            SummaryRow(
                method=method,
                snr_db=snr_db,
                grid_n=grid_n,
                n_records=len(rows),
                exact_count=int(np.sum(np.isneginf(valid))),
                mean_nmse_db=float(np.mean(finite)) if finite.size else float("nan"),
                median_nmse_db=float(np.median(valid)) if valid.size else float("nan"),
                mean_time_s=float(np.mean(times)),
                median_time_s=float(np.median(times)),
            )
        )
    return out
