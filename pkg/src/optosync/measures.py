"""Scalar diagnostics on mean states and covariance matrices.

Everything here is a pure function. Quadrature indices follow the basis
R = (dq1, dp1, dqa1, dpa1, dq2, dp2, dqa2, dpa2), so the mechanical
positions sit at 0 and 4 and the momenta at 1 and 5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVariance, WindowTooShort
from .model import OMEGA, SQRT2, MeanFieldState

#: Flag threshold for the uncertainty check; small negative slack
#: absorbs integrator noise on a saturated bound.
PHYS_FLAG_TOL = -1e-6

#: Variance-sum floor below which 1/(...) is refused as unphysical.
DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class EprVariances:
    """Variances of the joint +/- quadratures of the two mechanics."""

    var_q_minus: float
    var_p_minus: float
    var_q_plus: float
    var_p_plus: float


@dataclass(frozen=True)
class Metrics:
    """Per-sample diagnostics derived from one (state, covariance) pair."""

    s_q: float
    e_d: float
    q_minus_bar: float
    p_minus_bar: float
    q_plus_bar: float
    p_plus_bar: float
    entangled: bool


def epr_variances(v: np.ndarray) -> EprVariances:
    """Variances of q± = (q1 ± q2)/√2 and p± = (p1 ± p2)/√2."""
    v = np.asarray(v)
    return EprVariances(
        var_q_minus=0.5 * (v[0, 0] + v[4, 4] - v[0, 4] - v[4, 0]),
        var_p_minus=0.5 * (v[1, 1] + v[5, 5] - v[1, 5] - v[5, 1]),
        var_q_plus=0.5 * (v[0, 0] + v[4, 4] + v[0, 4] + v[4, 0]),
        var_p_plus=0.5 * (v[1, 1] + v[5, 5] + v[1, 5] + v[5, 1]),
    )


def sync_quantum(v: np.ndarray) -> float:
    """Quantum synchronization S_q = 1 / (<dq_-^2> + <dp_-^2>).

    Bounded by 1 for physical covariances; the bound is saturated by
    vacuum. Raises DegenerateVariance when the variance sum is too
    small to invert, which no physical V can produce.
    """
    e = epr_variances(v)
    total = e.var_q_minus + e.var_p_minus
    if total <= DEGENERATE_TOL:
        raise DegenerateVariance(
            f"var_q_minus + var_p_minus = {total:.3e} is not invertible"
        )
    return 1.0 / total


def entanglement_product(v: np.ndarray) -> float:
    """Product <dq_-^2><dp_+^2>; values below 1/4 witness entanglement."""
    e = epr_variances(v)
    return e.var_q_minus * e.var_p_plus


def classical_errors(s: MeanFieldState) -> tuple[float, float, float, float]:
    """Normalized sum/difference means (q̄₋, p̄₋, q̄₊, p̄₊).

    q̄₋ → 0 signals classical synchronization of the means; p̄₋ → 0
    with q̄₊ → 0 signals anti-synchronization.
    """
    q1, q2 = s.qbar
    p1, p2 = s.pbar
    return (
        (q1 - q2) / SQRT2,
        (p1 - p2) / SQRT2,
        (q1 + q2) / SQRT2,
        (p1 + p2) / SQRT2,
    )


def physicality_check(v: np.ndarray) -> tuple[bool, float]:
    """Smallest eigenvalue of the Hermitian matrix V + (i/2) Omega.

    Nonnegative for every bona fide quantum covariance; the flag allows
    -1e-6 of slack. The full 8-mode form also catches cross-correlation
    defects that per-mode Heisenberg products would miss.
    """
    herm = np.asarray(v, dtype=complex) + (0.5j) * OMEGA
    lam = float(np.linalg.eigvalsh(herm)[0])
    return lam >= PHYS_FLAG_TOL, lam


def window_average(
    times: np.ndarray, values: np.ndarray, t_start: float, t_end: float
) -> float:
    """Trapezoidal time average of a sampled series over [t_start, t_end].

    The window must lie inside the sampled range and cover at least 10
    samples.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    eps = 1e-9 * max(1.0, abs(t_end))
    if t_start < times[0] - eps or t_end > times[-1] + eps or t_end <= t_start:
        raise WindowTooShort(
            f"window [{t_start:g}, {t_end:g}] outside sampled range "
            f"[{times[0]:g}, {times[-1]:g}]"
        )
    sel = (times >= t_start - eps) & (times <= t_end + eps)
    n = int(np.count_nonzero(sel))
    if n < 10:
        raise WindowTooShort(f"window holds {n} samples, need at least 10")
    t = times[sel]
    return float(np.trapezoid(values[sel], t) / (t[-1] - t[0]))


def steady_state_window(
    times: np.ndarray, omega_d: float, span: float = 200.0
) -> tuple[float, float]:
    """Steady-state averaging window: the final `span` time units,
    clipped to a whole number of drive-modulation periods 2*pi/omega_d
    so the residual oscillation averages out. When the period exceeds
    the span the unclipped span is used."""
    times = np.asarray(times, dtype=float)
    t_end = float(times[-1])
    width = span
    if omega_d > 0.0:
        period = 2.0 * math.pi / omega_d
        n_periods = math.floor(span / period)
        if n_periods >= 1:
            width = n_periods * period
    t_start = t_end - width
    if t_start < times[0] - 1e-9:
        raise WindowTooShort(
            f"run of length {t_end - times[0]:g} cannot hold a "
            f"{width:g}-wide steady-state window"
        )
    return t_start, t_end


def metrics_at(s: MeanFieldState, v: np.ndarray) -> Metrics:
    """All per-sample diagnostics for one trajectory sample."""
    e_d = entanglement_product(v)
    qm, pm, qp, pp = classical_errors(s)
    return Metrics(
        s_q=sync_quantum(v),
        e_d=e_d,
        q_minus_bar=qm,
        p_minus_bar=pm,
        q_plus_bar=qp,
        p_plus_bar=pp,
        entangled=bool(e_d < 0.25),
    )


@dataclass(frozen=True)
class MetricsSeries:
    """Vectorized per-sample diagnostics along a trajectory."""

    times: np.ndarray
    s_q: np.ndarray
    e_d: np.ndarray
    var_q_minus: np.ndarray
    var_p_minus: np.ndarray
    var_q_plus: np.ndarray
    var_p_plus: np.ndarray
    q_minus_bar: np.ndarray
    p_minus_bar: np.ndarray
    q_plus_bar: np.ndarray
    p_plus_bar: np.ndarray
    phys_ok: np.ndarray
    phys_margin: np.ndarray

    def __len__(self) -> int:
        return self.times.shape[0]


def metrics_series(trajectory) -> MetricsSeries:
    """Evaluate every diagnostic at every sample of a trajectory."""
    v = trajectory.covariances
    m = trajectory.means
    vqm = 0.5 * (v[:, 0, 0] + v[:, 4, 4] - v[:, 0, 4] - v[:, 4, 0])
    vpm = 0.5 * (v[:, 1, 1] + v[:, 5, 5] - v[:, 1, 5] - v[:, 5, 1])
    vqp = 0.5 * (v[:, 0, 0] + v[:, 4, 4] + v[:, 0, 4] + v[:, 4, 0])
    vpp = 0.5 * (v[:, 1, 1] + v[:, 5, 5] + v[:, 1, 5] + v[:, 5, 1])
    total = vqm + vpm
    if np.min(total) <= DEGENERATE_TOL:
        i = int(np.argmin(total))
        raise DegenerateVariance(
            f"variance sum {total[i]:.3e} at t={trajectory.times[i]:g}"
        )
    herm = v.astype(complex) + (0.5j) * OMEGA
    margins = np.linalg.eigvalsh(herm)[:, 0]
    return MetricsSeries(
        times=trajectory.times,
        s_q=1.0 / total,
        e_d=vqm * vpp,
        var_q_minus=vqm,
        var_p_minus=vpm,
        var_q_plus=vqp,
        var_p_plus=vpp,
        q_minus_bar=(m[:, 0] - m[:, 4]) / SQRT2,
        p_minus_bar=(m[:, 1] - m[:, 5]) / SQRT2,
        q_plus_bar=(m[:, 0] + m[:, 4]) / SQRT2,
        p_plus_bar=(m[:, 1] + m[:, 5]) / SQRT2,
        phys_ok=margins >= PHYS_FLAG_TOL,
        phys_margin=margins,
    )
