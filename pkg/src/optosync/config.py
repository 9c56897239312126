"""Flat key-value run configuration.

The document format is line-oriented: `key = value`, full-line comments
starting with `#`, blank lines ignored. Keys are dotted paths; pair
parameters take an optional 1-based oscillator suffix, so

    preset = fig3_quadratic
    integrator.t_end = 1500
    output.dir = results

and

    params.omega_m = 1.0
    params.omega_m.2 = 1.005
    params.delta_c.1 = -1.0
    ...

are both valid documents. Exactly one parameter source is allowed:
either `preset` or inline `params.*`.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .errors import (
    ConfigError,
    ConfigSyntaxError,
    ConflictingSource,
    UnknownKey,
)
from .integrate import IntegratorConfig, validate_integrator
from .params import SystemParams, validate_params

_INTEGRATOR_KEYS = {
    "integrator.mode": str,
    "integrator.h0": float,
    "integrator.rel_tol": float,
    "integrator.abs_tol": float,
    "integrator.t_end": float,
    "integrator.sample_every": float,
}
_OUTPUT_KEYS = {
    "output.dir": str,
    "output.trajectory": bool,
    "output.metrics": bool,
    "output.sweep": bool,
    "output.figures": bool,
}
_SWEEP_KEYS = {
    "sweep.axis": str,
    "sweep.values": "floats",
    "sweep.start": float,
    "sweep.stop": float,
    "sweep.count": int,
    "sweep.co_move_delta_c": bool,
}
_ORACLE_KEYS = {
    "oracle.horizon": float,
    "oracle.ensemble": int,
    "oracle.seed": int,
}
_PARAM_SCALARS = ("J", "E", "eta_D", "Omega_D")
_PARAM_PAIRS = ("omega_m", "delta_c", "g1", "g2", "gamma_m", "kappa", "n_bar")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved instructions for one CLI invocation."""

    preset: str | None
    params: SystemParams | None
    integrator: IntegratorConfig
    out_dir: str = "out"
    emit_trajectory: bool = True
    emit_metrics: bool = True
    emit_sweep: bool = True
    emit_figures: bool = True
    sweep_axis: str | None = None
    sweep_values: tuple[float, ...] | None = None
    co_move_delta_c: bool = False
    oracle_horizon: float = 20.0
    oracle_ensemble: int = 10_000
    oracle_seed: int = 20


def _parse_value(key: str, raw: str, kind):
    if kind is str:
        return raw
    if kind is bool:
        if raw == "true":
            return True
        if raw == "false":
            return False
        raise ConfigSyntaxError(f"{key}: expected true or false, got {raw!r}")
    if kind is int:
        try:
            return int(raw, 10)
        except ValueError:
            raise ConfigSyntaxError(f"{key}: expected an integer, got {raw!r}") from None
    if kind is float:
        try:
            return float(raw)
        except ValueError:
            raise ConfigSyntaxError(f"{key}: expected a number, got {raw!r}") from None
    if kind == "floats":
        try:
            return tuple(float(tok) for tok in raw.split(","))
        except ValueError:
            raise ConfigSyntaxError(
                f"{key}: expected comma-separated numbers, got {raw!r}"
            ) from None
    raise AssertionError(kind)


def _param_key(key: str) -> str | None:
    """Return the SystemParams entry name for a params.* key, with the
    optional .1/.2 suffix preserved; None when the key is malformed."""
    rest = key[len("params."):]
    if rest in _PARAM_SCALARS or rest in _PARAM_PAIRS:
        return rest
    name, _, idx = rest.partition(".")
    if name in _PARAM_PAIRS and idx in ("1", "2"):
        return rest
    return None


def _assemble_params(entries: dict[str, float]) -> SystemParams:
    """Merge scalar/pair/indexed parameter entries and validate."""
    record: dict[str, object] = {}
    pairs: dict[str, list] = {}
    for key, value in entries.items():
        name, _, idx = key.partition(".")
        if idx:
            pairs.setdefault(name, [None, None])[int(idx) - 1] = value
        else:
            record[name] = value
    for name, pair in pairs.items():
        base = record.get(name)
        if isinstance(base, (int, float)):
            filled = [base if v is None else v for v in pair]
        elif pair.count(None) == 0:
            filled = pair
        else:
            missing = pair.index(None) + 1
            raise ConfigError(
                f"params.{name}.{missing} missing; give both entries or a "
                f"bare params.{name} default"
            )
        record[name] = tuple(filled)
    return validate_params(record)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document."""
    seen: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, eq, value = (tok.strip() for tok in stripped.partition("="))
        if not eq or not key or not value:
            raise ConfigSyntaxError(f"line {lineno}: expected `key = value`, got {line!r}")
        if key in seen:
            raise ConfigSyntaxError(f"line {lineno}: duplicate key {key!r}")
        seen[key] = value

    known = {**_INTEGRATOR_KEYS, **_OUTPUT_KEYS, **_SWEEP_KEYS, **_ORACLE_KEYS}
    param_entries: dict[str, float] = {}
    plain: dict[str, object] = {}
    for key, raw in seen.items():
        if key == "preset":
            plain[key] = raw
        elif key.startswith("params."):
            entry = _param_key(key)
            if entry is None:
                raise UnknownKey(f"unknown parameter key {key!r}")
            param_entries[entry] = _parse_value(key, raw, float)
        elif key in known:
            plain[key] = _parse_value(key, raw, known[key])
        else:
            raise UnknownKey(f"unknown configuration key {key!r}")

    preset_name = plain.get("preset")
    if preset_name is not None and param_entries:
        raise ConflictingSource(
            "configuration gives both a preset and inline params.*"
        )
    if preset_name is None and not param_entries:
        raise ConfigError("configuration needs a preset or inline params.*")

    params = None
    if param_entries:
        params = _assemble_params(param_entries)
        base_integrator = IntegratorConfig()
    else:
        from .experiments import get_preset

        preset = get_preset(str(preset_name))
        base_integrator = preset.integrator

    overrides = {
        key.split(".", 1)[1]: value
        for key, value in plain.items()
        if key in _INTEGRATOR_KEYS
    }
    integrator = validate_integrator(replace(base_integrator, **overrides))

    count_keys = [k for k in ("sweep.start", "sweep.stop", "sweep.count") if k in plain]
    if "sweep.values" in plain and count_keys:
        raise ConfigError(
            "give sweep.values or sweep.start/stop/count, not both"
        )
    if count_keys and len(count_keys) != 3:
        raise ConfigError("sweep.start, sweep.stop and sweep.count go together")
    sweep_values = plain.get("sweep.values")
    if count_keys:
        count = int(plain["sweep.count"])
        if count < 1:
            raise ConfigError("sweep.count must be >= 1")
        start, stop = float(plain["sweep.start"]), float(plain["sweep.stop"])
        if count == 1:
            sweep_values = (start,)
        else:
            step = (stop - start) / (count - 1)
            sweep_values = tuple(start + i * step for i in range(count))

    return RunConfig(
        preset=str(preset_name) if preset_name is not None else None,
        params=params,
        integrator=integrator,
        out_dir=str(plain.get("output.dir", "out")),
        emit_trajectory=bool(plain.get("output.trajectory", True)),
        emit_metrics=bool(plain.get("output.metrics", True)),
        emit_sweep=bool(plain.get("output.sweep", True)),
        emit_figures=bool(plain.get("output.figures", True)),
        sweep_axis=plain.get("sweep.axis"),
        sweep_values=sweep_values,
        co_move_delta_c=bool(plain.get("sweep.co_move_delta_c", False)),
        oracle_horizon=float(plain.get("oracle.horizon", 20.0)),
        oracle_ensemble=int(plain.get("oracle.ensemble", 10_000)),
        oracle_seed=int(plain.get("oracle.seed", 20)),
    )


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def format_config(cfg: RunConfig) -> str:
    """Render a RunConfig as a document that parse_config round-trips."""
    lines: list[str] = []
    if cfg.preset is not None:
        lines.append(f"preset = {cfg.preset}")
    else:
        assert cfg.params is not None
        for name in _PARAM_PAIRS:
            a, b = getattr(cfg.params, name)
            lines.append(f"params.{name}.1 = {_fmt(a)}")
            lines.append(f"params.{name}.2 = {_fmt(b)}")
        for name in _PARAM_SCALARS:
            lines.append(f"params.{name} = {_fmt(getattr(cfg.params, name))}")
    for f in fields(IntegratorConfig):
        lines.append(f"integrator.{f.name} = {_fmt(getattr(cfg.integrator, f.name))}")
    lines.append(f"output.dir = {cfg.out_dir}")
    lines.append(f"output.trajectory = {_fmt(cfg.emit_trajectory)}")
    lines.append(f"output.metrics = {_fmt(cfg.emit_metrics)}")
    lines.append(f"output.sweep = {_fmt(cfg.emit_sweep)}")
    lines.append(f"output.figures = {_fmt(cfg.emit_figures)}")
    if cfg.sweep_axis is not None:
        lines.append(f"sweep.axis = {cfg.sweep_axis}")
    if cfg.sweep_values is not None:
        lines.append(
            "sweep.values = " + ",".join(_fmt(v) for v in cfg.sweep_values)
        )
    lines.append(f"sweep.co_move_delta_c = {_fmt(cfg.co_move_delta_c)}")
    lines.append(f"oracle.horizon = {_fmt(cfg.oracle_horizon)}")
    lines.append(f"oracle.ensemble = {cfg.oracle_ensemble}")
    lines.append(f"oracle.seed = {cfg.oracle_seed}")
    return "\n".join(lines) + "\n"
