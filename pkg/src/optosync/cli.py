"""Command-line entry point.

Subcommands: run, sweep, presets, oracle. Exit codes: 0 on success, 1
on validation or configuration errors, 2 on numerical failure (and on
an oracle disagreement beyond 4 standard errors).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import RunConfig, parse_config
from .errors import ConfigError, NumericalError, OptosyncError
from .experiments import (
    PRESETS,
    SWEEP_AXES,
    Preset,
    get_preset,
    loss_threshold,
    run_preset,
    stochastic_oracle,
    sweep_axis,
    sweep_thermal,
)
from .output import emit_summary, emit_sweep, emit_timeseries


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which would collide with
    # the numerical-failure code; route usage problems to 1 instead
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path!r}: {exc}") from exc
    return parse_config(text)


def _resolve_preset(cfg: RunConfig) -> Preset:
    """Preset to execute: catalog entry with integrator overrides, or
    an ad-hoc preset wrapping inline parameters."""
    if cfg.preset is not None:
        base = get_preset(cfg.preset)
        return Preset(
            name=base.name,
            params=base.params,
            integrator=cfg.integrator,
            expected=base.expected,
        )
    assert cfg.params is not None
    return Preset(name="custom", params=cfg.params, integrator=cfg.integrator)


def _out_dir(cfg: RunConfig, args) -> Path:
    out = Path(args.out) if args.out else Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_run(args) -> int:
    cfg = _load_config(args.config)
    preset = _resolve_preset(cfg)
    result = run_preset(preset)
    print(
        f"{result.name}: Sq_bar={result.sq_bar:.6g} Ed_bar={result.ed_bar:.6g} "
        f"entangled={'true' if result.entangled else 'false'} "
        f"window=[{result.window[0]:.6g}, {result.window[1]:.6g}] "
        f"wall={result.wall_seconds:.1f}s"
    )
    for miss in result.expected_misses:
        print(f"target miss: {miss}", file=sys.stderr)

    out = _out_dir(cfg, args)
    if cfg.emit_trajectory:
        path = out / f"{result.name}_timeseries.csv"
        rows = emit_timeseries(result.trajectory, result.series, path)
        print(f"wrote {path} ({rows} rows)")
    if cfg.emit_metrics:
        path = out / f"{result.name}_summary.csv"
        emit_summary(result, path)
        print(f"wrote {path}")
    if cfg.emit_figures:
        from .plots import render_timeseries

        path = render_timeseries(
            result.trajectory, result.series, out / f"{result.name}_timeseries.png"
        )
        print(f"wrote {path}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    preset = _resolve_preset(cfg)

    default = SWEEP_AXES.get(preset.name)
    axis = cfg.sweep_axis or (default[0] if default else None)
    if axis is None:
        raise ConfigError("sweep needs sweep.axis (no default for this preset)")
    values = cfg.sweep_values
    if values is None:
        if default and default[0] == axis:
            values = tuple(default[1])
        else:
            raise ConfigError(
                f"sweep over {axis!r} needs sweep.values or sweep.start/stop/count"
            )

    if axis == "n_bar":
        sr = sweep_thermal(preset, values)
    else:
        sr = sweep_axis(preset, axis, values, cfg.co_move_delta_c)

    for value, row in zip(sr.axis_values, sr.rows):
        print(
            f"{sr.axis_name}={value:.6g}: Sq_bar={row.sq_bar:.6g} "
            f"Ed_bar={row.ed_bar:.6g} "
            f"entangled={'true' if row.entangled else 'false'}"
        )
    threshold = loss_threshold(sr)
    if threshold is not None:
        print(f"entanglement lost from {sr.axis_name}={threshold:.6g}")

    out = _out_dir(cfg, args)
    if cfg.emit_sweep:
        path = out / f"{preset.name}_{axis}_sweep.csv"
        rows = emit_sweep(sr, path)
        print(f"wrote {path} ({rows} rows)")
    if cfg.emit_figures:
        from .plots import render_sweep

        path = render_sweep(sr, out / f"{preset.name}_{axis}_sweep.png")
        print(f"wrote {path}")
    return 0


def _cmd_presets(args) -> int:
    for name, preset in PRESETS.items():
        bits = [
            f"g2={preset.params.g2[0]:g}",
            f"t_end={preset.integrator.t_end:g}",
        ]
        default = SWEEP_AXES.get(name)
        if default:
            axis, values = default
            bits.append(
                f"sweep {axis} in [{values[0]:g}, {values[-1]:g}] "
                f"({len(values)} points)"
            )
        print(f"{name:16s} {'  '.join(bits)}")
    return 0


def _cmd_oracle(args) -> int:
    cfg = _load_config(args.config)
    preset = _resolve_preset(cfg)
    report = stochastic_oracle(
        preset.params,
        horizon=cfg.oracle_horizon,
        ensemble=cfg.oracle_ensemble,
        seed=cfg.oracle_seed,
    )
    i, j = report.worst
    print(
        f"oracle: horizon={report.horizon:g} ensemble={report.ensemble} "
        f"seed={report.seed} max|z|={report.max_z:.3f} at V[{i},{j}]"
    )
    if report.passes():
        print("covariance propagation agrees within 4 standard errors")
        return 0
    print(
        "covariance propagation DISAGREES with the stochastic ensemble",
        file=sys.stderr,
    )
    return 2


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="optosync",
        description="Driven coupled optomechanical cavities: mean-field "
        "plus Gaussian fluctuation dynamics, synchronization and "
        "entanglement diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="propagate one configuration")
    run.add_argument("config", help="path to a key-value configuration file")
    run.add_argument("--out", help="output directory (overrides output.dir)")
    run.set_defaults(func=_cmd_run)

    sweep = sub.add_parser("sweep", help="run a parameter sweep")
    sweep.add_argument("config", help="path to a key-value configuration file")
    sweep.add_argument("--out", help="output directory (overrides output.dir)")
    sweep.set_defaults(func=_cmd_sweep)

    presets = sub.add_parser("presets", help="list the preset catalog")
    presets.set_defaults(func=_cmd_presets)

    oracle = sub.add_parser(
        "oracle", help="cross-check covariance propagation stochastically"
    )
    oracle.add_argument("config", help="path to a key-value configuration file")
    oracle.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OptosyncError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
