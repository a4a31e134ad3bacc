"""Command-line benchmark driver.

Subcommands: ``sweep-nmse``, ``sweep-runtime``, ``single``, ``footprint``.
Scenario parameters come from a flat ``key = value`` config file (``#``
comments allowed); every key is mirrored by a CLI flag of the same name,
and flags override the file.  Sweep commands write a CSV report and, by
default, a companion PNG figure next to it (``--no-figure`` disables,
``--figure PATH`` redirects).

Exit codes: 0 on success, 1 for configuration errors, 2 for runtime or
resource errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .channel import ConfigError, PilotError, ResourceLimitError, SystemConfig
from .estimators import StoppingRule, flat_to_pair
from .harness import (
    METHODS,
    SweepSpec,
    make_trial_instance,
    memory_footprint,
    nmse,
    run_estimator,
    run_nmse_sweep,
    run_runtime_sweep,
    summarize,
)

_SYSTEM_KEYS = {
    "n_t": int,
    "n_r": int,
    "n_rf": int,
    "q_slots": int,
    "n_x": int,
    "grid_n": int,
    "n_paths": int,
    "spacing_ratio": float,
    "sigma_p2": float,
    "sigma_n2": float,
    "angle_mode": str,
    "seed": int,
}

_DEFAULT_SNR = (-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0)
_DEFAULT_GRID_SIZES = (16, 32, 64)
_DEFAULT_NMSE_METHODS = ("omp1d", "somp2stage", "omp2d")
_DEFAULT_RUNTIME_METHODS = ("omp1d", "somp2stage", "omp2d", "ls2d_simple")


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems as configuration errors."""

    def error(self, message):
        raise ConfigError(message)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except (ConfigError, PilotError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ResourceLimitError, OSError, np.linalg.LinAlgError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> _Parser:
    parser = _Parser(prog="mmwcs", description="Compressive channel-estimation benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    nmse_p = sub.add_parser("sweep-nmse", help="estimation accuracy versus SNR")
    _add_common(nmse_p)
    nmse_p.add_argument("--snr", type=_float_list, default=None, help="comma-separated SNR points in dB")
    nmse_p.add_argument("--trials", type=int, default=None, help="Monte-Carlo trials per point")
    nmse_p.add_argument("--methods", type=_method_list, default=None, help="comma-separated method names")
    nmse_p.add_argument("--out", type=str, default=None, help="output CSV path (default results.csv)")
    nmse_p.add_argument("--noiseless", action="store_true", default=None, help="add a noiseless point")
    nmse_p.set_defaults(handler=_cmd_sweep_nmse)

    rt_p = sub.add_parser("sweep-runtime", help="estimator wall time versus grid size")
    _add_common(rt_p)
    rt_p.add_argument("--grid-sizes", type=_int_list, default=None, help="comma-separated grid sizes, ascending")
    rt_p.add_argument("--snr", type=_float_list, default=None, help="operating SNR in dB (first value used)")
    rt_p.add_argument("--trials", type=int, default=None, help="timed trials per size")
    rt_p.add_argument("--methods", type=_method_list, default=None, help="comma-separated method names")
    rt_p.add_argument("--out", type=str, default=None, help="output CSV path (default timing.csv)")
    rt_p.set_defaults(handler=_cmd_sweep_runtime)

    single_p = sub.add_parser("single", help="run one method on one trial and print the estimate")
    _add_common(single_p, figures=False)
    single_p.add_argument("--method", required=True, choices=METHODS)
    single_p.add_argument("--noiseless", action="store_true", default=None, help="disable noise")
    single_p.set_defaults(handler=_cmd_single)

    fp_p = sub.add_parser("footprint", help="dictionary memory element counts")
    _add_common(fp_p, figures=False)
    fp_p.set_defaults(handler=_cmd_footprint)
    return parser


def _add_common(p: argparse.ArgumentParser, figures: bool = True) -> None:
    p.add_argument("--config", type=str, default=None, help="flat key=value config file")
    group = p.add_argument_group("scenario overrides")
    for key, cast in _SYSTEM_KEYS.items():
        group.add_argument(f"--{key}", type=cast, default=None)
    if figures:
        p.add_argument("--figure", type=str, default=None, help="figure output path (default: CSV path with .png)")
        p.add_argument("--no-figure", action="store_true", help="skip figure rendering")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip() != "")
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from exc


def _method_list(text: str) -> tuple[str, ...]:
    methods = tuple(part.strip() for part in text.split(",") if part.strip())
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ConfigError(f"unknown methods {unknown}; choose from {list(METHODS)}")
    return methods


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


_SWEEP_KEYS = {
    "snr": _float_list,
    "grid_sizes": _int_list,
    "trials": int,
    "methods": _method_list,
    "out": str,
    "noiseless": _parse_bool,
}


def load_config_file(path: str | Path) -> dict:
    """Parse a flat ``key = value`` file with ``#`` comments into typed values."""
    values: dict = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        caster = _SYSTEM_KEYS.get(key) or _SWEEP_KEYS.get(key)
        if caster is None:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = caster(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {value!r}") from exc
    return values


def _load_file_values(args) -> dict:
    if getattr(args, "config", None) is None:
        return {}
    config_path = Path(args.config)
    if not config_path.exists():
        raise ConfigError(f"config file not found: {config_path}")
    return load_config_file(config_path)


def _make_config(args, file_values: dict) -> SystemConfig:
    merged = {}
    for key in _SYSTEM_KEYS:
        if key in file_values:
            merged[key] = file_values[key]
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            merged[key] = cli_value
    return SystemConfig(**merged)


def _setting(args, file_values: dict, key: str, default):
    cli_value = getattr(args, key.replace("-", "_"), None)
    if cli_value is not None:
        return cli_value
    if key in file_values:
        return file_values[key]
    return default


def _figure_path(args, out_path: str) -> Path | None:
    if getattr(args, "no_figure", False):
        return None
    if getattr(args, "figure", None) is not None:
        return Path(args.figure)
    return Path(out_path).with_suffix(".png")


def _cmd_sweep_nmse(args) -> int:
    file_values = _load_file_values(args)
    cfg = _make_config(args, file_values)
    spec = SweepSpec(
        base_config=cfg,
        snr_points_db=_setting(args, file_values, "snr", _DEFAULT_SNR),
        trials=int(_setting(args, file_values, "trials", 50)),
        methods=_setting(args, file_values, "methods", _DEFAULT_NMSE_METHODS),
        output_path=str(_setting(args, file_values, "out", "results.csv")),
        include_noiseless=bool(_setting(args, file_values, "noiseless", False)),
    )
    records = run_nmse_sweep(spec)
    print(f"wrote {spec.output_path} ({len(records)} records)")
    for row in summarize(records):
        label = "noiseless" if row.snr_db == float("inf") else f"{row.snr_db:g} dB"
        print(
            f"  {row.method:12s} {label:>10s}  mean NMSE {row.mean_nmse_db:8.2f} dB"
            f"  exact {row.exact_count}/{row.n_records}"
        )
    figure = _figure_path(args, spec.output_path)
    if figure is not None:
        from .figures import render_nmse_figure

        render_nmse_figure(records, figure)
        print(f"wrote {figure}")
    return 0


def _cmd_sweep_runtime(args) -> int:
    file_values = _load_file_values(args)
    cfg = _make_config(args, file_values)
    spec = SweepSpec(
        base_config=cfg,
        snr_points_db=_setting(args, file_values, "snr", (10.0,)),
        grid_sizes=_setting(args, file_values, "grid_sizes", _DEFAULT_GRID_SIZES),
        trials=int(_setting(args, file_values, "trials", 10)),
        methods=_setting(args, file_values, "methods", _DEFAULT_RUNTIME_METHODS),
        output_path=str(_setting(args, file_values, "out", "timing.csv")),
    )
    records = run_runtime_sweep(spec)
    print(f"wrote {spec.output_path} ({len(records)} records)")
    for row in summarize(records):
        print(f"  {row.method:12s} grid {row.grid_n:3d}  median {row.median_time_s * 1e3:9.3f} ms")
    builds = {
        r.grid_n: r.build_time_s for r in records if r.method == "omp1d" and r.build_time_s > 0
    }
    for grid_n, build_time in sorted(builds.items()):
        print(f"  omp1d sensing build at grid {grid_n:3d}: {build_time * 1e3:9.3f} ms")
    figure = _figure_path(args, spec.output_path)
    if figure is not None:
        from .figures import render_runtime_figure

        render_runtime_figure(records, figure)
        print(f"wrote {figure}")
    return 0


def _cmd_single(args) -> int:
    file_values = _load_file_values(args)
    cfg = _make_config(args, file_values)
    if args.noiseless:
        cfg = replace(cfg, sigma_n2=0.0)
    from .channel import build_1d_sensing_matrix, build_dictionaries, build_selection_precoders

    f, w = build_selection_precoders(cfg)
    dic = build_dictionaries(cfg, f, w)
    sensing = build_1d_sensing_matrix(dic) if args.method in ("omp1d", "ls1d") else None
    inst = make_trial_instance(cfg, 0)
    stop = StoppingRule.fixed(cfg.n_paths)
    h_hat, iterations, dt = run_estimator(args.method, inst, dic, sensing, stop)
    if cfg.sigma_n2 == 0.0:
        snr_label = "inf"
    else:
        snr_label = format(10.0 * np.log10(cfg.sigma_p2 / cfg.sigma_n2), ".6g")
    print(f"method: {args.method}")
    print(f"seed: {inst.seed_used}")
    print(f"snr_db: {snr_label}")
    support, gains = _support_and_gains(args.method, inst, dic, sensing, stop)
    print(f"support: {', '.join(f'({i}, {j})' for i, j in support) if support else '(dense)'}")
    if gains is not None:
        print(f"gains: {', '.join(format(g, '.6g') for g in gains)}")
    print(f"nmse_db: {nmse(inst.h_true, h_hat):.6g}")
    print(f"wall_time_s: {dt:.6g}")
    print(f"iterations: {iterations}")
    return 0


def _support_and_gains(method, inst, dic, sensing, stop):
    """Re-run the estimator to pull the support out (timing already reported)."""
    from .estimators import omp_1d, omp_2d, two_stage
    from .linalg import vec

    if method == "omp1d":
        est = omp_1d(vec(inst.y_meas), sensing, stop)
        pairs = [flat_to_pair(k, dic.grid_n) for k in est.support]
        return pairs, list(est.weights)
    if method == "omp2d":
        est = omp_2d(inst.y_meas, dic, stop)
        return [tuple(map(int, p)) for p in est.support], list(est.weights)
    if method == "somp2stage":
        result = two_stage(inst.y_meas, dic, stop)
        return [(i, j) for i, j, _ in result.pairs], [w for _, _, w in result.pairs]
    return [], None


def _cmd_footprint(args) -> int:
    file_values = _load_file_values(args)
    cfg = _make_config(args, file_values)
    flat, factored = memory_footprint(cfg)
    print(f"flat_1d_elements: {flat}")
    print(f"factored_elements: {factored}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
