import numpy as np
import pytest
from scipy.linalg import expm

from optosync.errors import ConfigError, UnknownAxis, ValidationError
from optosync.experiments import (
    PRESETS,
    SWEEP_AXES,
    Preset,
    SweepResult,
    SweepRow,
    _worker_count,
    apply_axis,
    ensemble_covariance,
    get_preset,
    loss_threshold,
    run_preset,
    stochastic_oracle,
    sweep_axis,
    sweep_thermal,
)
from optosync.integrate import IntegratorConfig
from optosync.model import MeanFieldState, drift_matrix
from optosync.params import validate_params

from test_params import FIG2


def fig2_params(**over):
    return validate_params({**FIG2, **over})


def short_preset(name="short", t_end=300.0, **over) -> Preset:
    return Preset(
        name=name,
        params=fig2_params(g2=5e-5, **over),
        integrator=IntegratorConfig(rel_tol=1e-7, t_end=t_end),
        expected=None,
    )


# -------------------------------------------------------------- catalog


def test_catalog_names():
    assert sorted(PRESETS) == [
        "fig2_linear", "fig3_quadratic", "fig4a_thermal", "fig4b_detuning",
    ]


def test_figure_presets_differ_only_in_g2():
    f2 = get_preset("fig2_linear").params
    f3 = get_preset("fig3_quadratic").params
    assert f2.g2 == (0.0, 0.0)
    assert f3.g2 == (5e-5, 5e-5)
    assert f2.g1 == f3.g1 == (0.005, 0.005)
    assert f2.omega_m == f3.omega_m == (1.0, 1.005)
    assert f2.J == f3.J == 0.04


def test_default_sweep_axes():
    axis_a, vals_a = SWEEP_AXES["fig4a_thermal"]
    axis_b, vals_b = SWEEP_AXES["fig4b_detuning"]
    assert axis_a == "n_bar" and len(vals_a) == 26
    assert vals_a[0] == 0.0 and vals_a[-1] == 5.0
    assert axis_b == "delta_m" and len(vals_b) == 30
    assert vals_b[0] == pytest.approx(0.005) and vals_b[-1] == pytest.approx(0.3)


def test_unknown_preset():
    with pytest.raises(ConfigError, match="fig2_linear"):
        get_preset("fig5_imaginary")


# ------------------------------------------------------------ apply_axis


def test_delta_m_moves_second_oscillator_only():
    p = apply_axis(fig2_params(), "delta_m", 0.2)
    assert p.omega_m == (1.0, 1.2)
    assert p.delta_c == (-1.0, -1.005)  # held fixed by default


def test_delta_m_co_moving_detuning():
    p = apply_axis(fig2_params(), "delta_m", 0.2, co_move_delta_c=True)
    assert p.omega_m == (1.0, 1.2)
    assert p.delta_c == (-1.0, -1.2)


def test_scalar_axis():
    assert apply_axis(fig2_params(), "J", 0.1).J == 0.1


def test_pair_axis_sets_both():
    p = apply_axis(fig2_params(), "n_bar", 1.5)
    assert p.n_bar == (1.5, 1.5)


def test_indexed_axis_sets_one():
    p = apply_axis(fig2_params(), "g2.2", 7e-5)
    assert p.g2 == (0.0, 7e-5)
    p = apply_axis(fig2_params(), "kappa.1", 0.3)
    assert p.kappa == (0.3, 0.15)


def test_unknown_axis_rejected():
    for axis in ("coupling", "n_bar.3", "J.1", "delta"):
        with pytest.raises(UnknownAxis):
            apply_axis(fig2_params(), axis, 1.0)


def test_axis_values_must_be_monotone():
    with pytest.raises(ValidationError):
        sweep_axis(short_preset(), "n_bar", [0.0, 0.2, 0.1])
    with pytest.raises(ValidationError):
        sweep_thermal(short_preset(), [])


def test_thermal_sweep_rejects_negative_occupation():
    with pytest.raises(ValidationError):
        sweep_thermal(short_preset(), [-0.5, 0.0])


# ----------------------------------------------------------- run_preset


def test_single_value_sweep_matches_run_preset():
    base = short_preset()
    value = 0.3
    sr = sweep_axis(base, "n_bar", [value])
    direct = run_preset(
        Preset(
            name="direct",
            params=apply_axis(base.params, "n_bar", value),
            integrator=base.integrator,
            expected=None,
        )
    )
    assert len(sr.rows) == 1
    assert sr.rows[0].sq_bar == direct.sq_bar
    assert sr.rows[0].ed_bar == direct.ed_bar


def test_sweep_rows_do_not_contaminate_each_other():
    base = short_preset()
    a = sweep_axis(base, "n_bar", [0.0, 0.2])
    b = sweep_axis(base, "n_bar", [0.0, 0.4])
    assert a.rows[0].sq_bar == b.rows[0].sq_bar
    assert a.rows[0].ed_bar == b.rows[0].ed_bar
    assert a.axis_values == (0.0, 0.2)
    assert b.axis_values == (0.0, 0.4)


def test_run_preset_records_expectation_misses():
    p = short_preset()
    impossible = Preset(
        name=p.name,
        params=p.params,
        integrator=p.integrator,
        expected={"sq_bar": ("approx", 50.0, 1e-6), "ed_bar": ("less", 1e9)},
    )
    r = run_preset(impossible)
    assert len(r.expected_misses) == 1
    assert "sq_bar" in r.expected_misses[0]


def test_run_result_shapes():
    r = run_preset(short_preset())
    assert len(r.series) == len(r.trajectory)
    assert r.window[1] == pytest.approx(r.trajectory.times[-1])
    assert r.window[1] - r.window[0] <= 200.0
    assert r.wall_seconds > 0.0
    assert r.entangled == (r.ed_bar < 0.25)


# -------------------------------------------------------- loss threshold


def _fake_sweep(ed_values):
    rows = tuple(
        SweepRow(sq_bar=0.5, ed_bar=e, entangled=e < 0.25,
                 wall_seconds=0.1, phys_ok=True)
        for e in ed_values
    )
    axis = tuple(float(i) for i in range(len(ed_values)))
    return SweepResult(axis_name="n_bar", axis_values=axis, rows=rows)


def test_loss_threshold_first_crossing():
    sr = _fake_sweep([0.1, 0.2, 0.3, 0.2])
    assert loss_threshold(sr) == 2.0


def test_loss_threshold_none_when_entangled_throughout():
    assert loss_threshold(_fake_sweep([0.1, 0.2, 0.24])) is None


# ------------------------------------------------------------- workers


def test_worker_count_env_cap(monkeypatch):
    monkeypatch.setenv("OPTOSYNC_THREADS", "3")
    assert _worker_count(10) == 3
    assert _worker_count(2) == 2


def test_worker_count_rejects_garbage(monkeypatch):
    monkeypatch.setenv("OPTOSYNC_THREADS", "many")
    with pytest.raises(ConfigError):
        _worker_count(4)
    monkeypatch.setenv("OPTOSYNC_THREADS", "0")
    with pytest.raises(ConfigError):
        _worker_count(4)


# --------------------------------------------------------------- oracle


def test_ensemble_noiseless_transport_is_exact():
    # D = 0 turns the ensemble into pure linear transport, so the
    # sample covariance must equal the transported initial sample,
    # reconstructed from the documented (seed, chunk) substream and the
    # documented half-step exponential update.
    p = fig2_params(E=0.0)
    m = drift_matrix(
        p, MeanFieldState((0, 0), (0, 0), (0, 0), (0, 0))
    ).m
    h, n_steps, members, seed = 1e-3, 400, 1500, 11
    drift = np.tile(m, (n_steps, 1, 1))
    v0 = 0.5 * np.eye(8)
    est = ensemble_covariance(drift, np.zeros(8), v0, h, members, seed)

    rng = np.random.default_rng([seed, 0])
    r = np.linalg.cholesky(v0) @ rng.standard_normal((8, members))
    half = expm(0.5 * h * m)
    for _ in range(n_steps):
        r = half @ (half @ r)
    expect = r @ r.T / members
    assert np.allclose(est, expect, rtol=1e-9, atol=1e-12)


def test_ensemble_decoupled_cavity_relaxes_to_vacuum():
    # Undriven, uncoupled, zero-temperature: the cavity covariance must
    # land on vacuum within the sampling error of 1e4 members.
    p = fig2_params(E=0.0, J=0.0, g1=0.0, g2=0.0)
    m = drift_matrix(
        p, MeanFieldState((0, 0), (0, 0), (0, 0), (0, 0))
    ).m
    h, horizon = 1e-3, 40.0
    n_steps = int(round(horizon / h))
    drift = np.tile(m, (n_steps, 1, 1))
    d_diag = np.array([0, 0.005, 0.15, 0.15, 0, 0.005, 0.15, 0.15])
    v0 = np.diag([0.5, 0.5, 2.0, 2.0, 0.5, 0.5, 2.0, 2.0])
    est = ensemble_covariance(drift, d_diag, v0, h, 10_000, seed=5)
    # diagonal SE = sqrt(2*0.25/N), off-diagonal sqrt(0.25/N) at vacuum
    n = 10_000
    se_diag = np.sqrt(2 * 0.25 / n)
    se_off = np.sqrt(0.25 / n)
    for sl in (slice(2, 4), slice(6, 8)):
        block = est[sl, sl]
        assert abs(block[0, 0] - 0.5) < 3 * se_diag
        assert abs(block[1, 1] - 0.5) < 3 * se_diag
        assert abs(block[0, 1]) < 3 * se_off


def test_oracle_validates_inputs():
    p = fig2_params()
    with pytest.raises(ValidationError):
        stochastic_oracle(p, ensemble=500)
    with pytest.raises(ValidationError):
        stochastic_oracle(p, horizon=0.0)
    with pytest.raises(ValidationError):
        stochastic_oracle(p, horizon=60.0)


def test_oracle_short_horizon_agrees():
    report = stochastic_oracle(fig2_params(), horizon=5.0, ensemble=2000, seed=3)
    assert report.passes(4.0)
    assert report.max_z >= 0.0
    assert report.sample.shape == (8, 8)
    assert 0 <= report.worst[0] <= report.worst[1] <= 7


def test_oracle_deterministic_given_seed():
    p = fig2_params()
    r1 = stochastic_oracle(p, horizon=2.0, ensemble=1000, seed=9)
    r2 = stochastic_oracle(p, horizon=2.0, ensemble=1000, seed=9)
    assert np.array_equal(r1.sample, r2.sample)
    assert r1.max_z == r2.max_z
