"""Configuration document grammar and round-tripping."""

import dataclasses

import pytest

from optosync.config import format_config, parse_config
from optosync.errors import (
    ConfigError,
    ConfigSyntaxError,
    ConflictingSource,
    InvalidParams,
    UnknownKey,
)
from optosync.experiments import get_preset
from optosync.params import SystemParams

from test_params import FIG2

# an inline-parameter document covering every field, fig2 values
INLINE_DOC = """
params.omega_m = 1.0
params.omega_m.2 = 1.005
params.delta_c = -1.0
params.delta_c.2 = -1.005
params.g1 = 0.005
params.g2 = 0.0
params.gamma_m = 0.005
params.kappa = 0.15
params.n_bar = 0.0
params.J = 0.04
params.E = 100.0
params.eta_D = 1.0
params.Omega_D = 1.0
"""


def test_minimal_preset_document():
    cfg = parse_config("preset = fig2_linear\n")
    assert cfg.preset == "fig2_linear"
    assert cfg.params is None
    assert cfg.integrator == get_preset("fig2_linear").integrator
    assert cfg.integrator.t_end == 2000.0
    assert cfg.out_dir == "out"
    assert cfg.emit_trajectory and cfg.emit_metrics
    assert cfg.emit_sweep and cfg.emit_figures
    assert cfg.sweep_axis is None and cfg.sweep_values is None
    assert not cfg.co_move_delta_c
    assert cfg.oracle_horizon == 20.0
    assert cfg.oracle_ensemble == 10_000
    assert cfg.oracle_seed == 20


def test_comments_and_blank_lines_ignored():
    cfg = parse_config(
        "# a comment\n"
        "\n"
        "  preset   =  fig3_quadratic  \n"
        "   # indented comment\n"
    )
    assert cfg.preset == "fig3_quadratic"


def test_integrator_overrides_apply_on_preset_base():
    cfg = parse_config(
        "preset = fig3_quadratic\n"
        "integrator.t_end = 1500\n"
        "integrator.rel_tol = 1e-6\n"
    )
    base = get_preset("fig3_quadratic").integrator
    assert cfg.integrator.t_end == 1500.0
    assert cfg.integrator.rel_tol == 1e-6
    # untouched fields come from the preset
    assert cfg.integrator.h0 == base.h0
    assert cfg.integrator.sample_every == base.sample_every
    assert cfg.integrator.mode == base.mode


def test_inline_params_assemble():
    cfg = parse_config(INLINE_DOC)
    assert cfg.preset is None
    assert cfg.params == SystemParams(**FIG2)


def test_bare_default_with_indexed_override():
    # INLINE_DOC itself mixes bare defaults with .2 overrides
    cfg = parse_config(INLINE_DOC)
    assert cfg.params.omega_m == (1.0, 1.005)
    assert cfg.params.kappa == (0.15, 0.15)


def test_both_indices_without_bare_default():
    doc = INLINE_DOC.replace(
        "params.kappa = 0.15",
        "params.kappa.1 = 0.15\nparams.kappa.2 = 0.12",
    )
    assert parse_config(doc).params.kappa == (0.15, 0.12)


def test_half_specified_pair_rejected():
    doc = INLINE_DOC.replace(
        "params.kappa = 0.15", "params.kappa.2 = 0.12"
    )
    with pytest.raises(ConfigError, match=r"params\.kappa\.1 missing"):
        parse_config(doc)


def test_preset_plus_inline_params_conflict():
    with pytest.raises(ConflictingSource):
        parse_config("preset = fig2_linear\nparams.J = 0.04\n")


def test_no_parameter_source():
    with pytest.raises(ConfigError, match="preset or inline"):
        parse_config("output.dir = results\n")


def test_unknown_preset_name():
    with pytest.raises(ConfigError, match="fig2_linear"):
        parse_config("preset = fig5_wishful\n")


@pytest.mark.parametrize(
    "key",
    ["integrator.step", "params.coupling", "params.J.1", "params.n_bar.3", "outputs.dir"],
)
def test_unknown_keys_rejected(key):
    with pytest.raises(UnknownKey):
        parse_config(f"preset = fig2_linear\n{key} = 1\n")


@pytest.mark.parametrize(
    "line",
    [
        "preset fig2_linear",          # no equals sign
        "= fig2_linear",               # empty key
        "preset =",                    # empty value
    ],
)
def test_malformed_lines(line):
    with pytest.raises(ConfigSyntaxError, match="line 1"):
        parse_config(line + "\n")


def test_duplicate_key_rejected():
    with pytest.raises(ConfigSyntaxError, match="duplicate"):
        parse_config("preset = fig2_linear\npreset = fig3_quadratic\n")


def test_bool_values_are_strict():
    ok = parse_config("preset = fig2_linear\noutput.figures = false\n")
    assert ok.emit_figures is False
    for bad in ("yes", "True", "0"):
        with pytest.raises(ConfigSyntaxError, match="true or false"):
            parse_config(f"preset = fig2_linear\noutput.figures = {bad}\n")


def test_int_values_are_strict():
    with pytest.raises(ConfigSyntaxError, match="integer"):
        parse_config("preset = fig2_linear\noracle.ensemble = 1e4\n")


def test_float_value_rejects_garbage():
    with pytest.raises(ConfigSyntaxError, match="number"):
        parse_config("preset = fig2_linear\nintegrator.t_end = soon\n")


def test_sweep_values_list():
    cfg = parse_config(
        "preset = fig4a_thermal\nsweep.values = 0.0,0.5, 1.0\n"
    )
    assert cfg.sweep_values == (0.0, 0.5, 1.0)


def test_sweep_values_bad_token():
    with pytest.raises(ConfigSyntaxError, match="comma-separated"):
        parse_config("preset = fig4a_thermal\nsweep.values = 0.0,half\n")


def test_sweep_range_expansion():
    cfg = parse_config(
        "preset = fig4a_thermal\n"
        "sweep.start = 0.0\nsweep.stop = 2.0\nsweep.count = 5\n"
    )
    assert cfg.sweep_values == (0.0, 0.5, 1.0, 1.5, 2.0)


def test_sweep_range_single_point():
    cfg = parse_config(
        "preset = fig4a_thermal\n"
        "sweep.start = 0.3\nsweep.stop = 9.0\nsweep.count = 1\n"
    )
    assert cfg.sweep_values == (0.3,)


def test_sweep_values_and_range_conflict():
    with pytest.raises(ConfigError, match="not both"):
        parse_config(
            "preset = fig4a_thermal\nsweep.values = 0.0,1.0\n"
            "sweep.start = 0.0\nsweep.stop = 1.0\nsweep.count = 3\n"
        )


def test_sweep_range_needs_all_three():
    with pytest.raises(ConfigError, match="go together"):
        parse_config("preset = fig4a_thermal\nsweep.start = 0.0\nsweep.stop = 1.0\n")


def test_sweep_count_positive():
    with pytest.raises(ConfigError, match="count"):
        parse_config(
            "preset = fig4a_thermal\n"
            "sweep.start = 0.0\nsweep.stop = 1.0\nsweep.count = 0\n"
        )


def test_invalid_integrator_override_rejected():
    with pytest.raises(InvalidParams):
        parse_config("preset = fig2_linear\nintegrator.mode = leapfrog\n")


def test_invalid_inline_params_rejected():
    doc = INLINE_DOC.replace("params.kappa = 0.15", "params.kappa = 0.0")
    with pytest.raises(InvalidParams):
        parse_config(doc)


def test_round_trip_preset_config():
    cfg = parse_config(
        "preset = fig4a_thermal\n"
        "integrator.rel_tol = 1e-6\n"
        "output.dir = results\n"
        "output.figures = false\n"
        "sweep.values = 0.0,0.25,0.5\n"
        "oracle.seed = 7\n"
    )
    assert parse_config(format_config(cfg)) == cfg


def test_round_trip_inline_config():
    cfg = parse_config(
        INLINE_DOC
        + "integrator.t_end = 321.5\n"
        + "sweep.axis = J\n"
        + "sweep.values = 0.01,0.02,0.04\n"
        + "sweep.co_move_delta_c = true\n"
    )
    again = parse_config(format_config(cfg))
    assert again == cfg
    assert again.params == cfg.params


def test_round_trip_preserves_float_precision():
    cfg = parse_config("preset = fig2_linear\nintegrator.rel_tol = 1.3e-07\n")
    again = parse_config(format_config(cfg))
    assert again.integrator.rel_tol == cfg.integrator.rel_tol


def test_run_config_is_frozen():
    cfg = parse_config("preset = fig2_linear\n")
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.out_dir = "elsewhere"
