"""Mean-field and linearized-fluctuation dynamics of the coupled system.

Two driven optical cavities, fiber-coupled with strength J, each hosting
a mechanical oscillator coupled linearly (g1) and quadratically (g2) to
the intracavity intensity. The cavity amplitudes are kept as real and
imaginary parts, so the joint classical state is the 8-vector

    (qbar1, pbar1, Re a1, Im a1, qbar2, pbar2, Re a2, Im a2).

Gaussian fluctuations live on the quadrature basis

    R = (dq1, dp1, dqa1, dpa1, dq2, dp2, dqa2, dpa2)      (indices 0..7)

and evolve as dR/dt = M R + N with drift M block-built from per-oscillator
4x4 blocks plus the +/-J cavity coupling, and diffusion
D = diag[0, (2 n1 + 1) gamma1, k1, k1, 0, (2 n2 + 1) gamma2, k2, k2].
The covariance obeys the Lyapunov equation dV/dt = M V + V M^T + D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFinite
from .params import SystemParams

SQRT2 = math.sqrt(2.0)

#: Upper-triangle index pair used to pack the symmetric 8x8 covariance
#: into the 36 trailing entries of the 44-dimensional flat joint state.
UPPER = np.triu_indices(8)

#: Symplectic form: block diagonal of [[0, 1], [-1, 0]] over the 4 modes.
OMEGA = np.kron(np.eye(4), np.array([[0.0, 1.0], [-1.0, 0.0]]))
OMEGA.setflags(write=False)


@dataclass(frozen=True)
class MeanFieldState:
    """Classical means; the limit-cycle trajectory lives here."""

    qbar: tuple[float, float]
    pbar: tuple[float, float]
    alpha_re: tuple[float, float]
    alpha_im: tuple[float, float]

    def to_array(self) -> np.ndarray:
        return np.array(
            [
                self.qbar[0], self.pbar[0], self.alpha_re[0], self.alpha_im[0],
                self.qbar[1], self.pbar[1], self.alpha_re[1], self.alpha_im[1],
            ]
        )

    @classmethod
    def from_array(cls, a) -> "MeanFieldState":
        a = np.asarray(a, dtype=float)
        return cls(
            qbar=(a[0], a[4]),
            pbar=(a[1], a[5]),
            alpha_re=(a[2], a[6]),
            alpha_im=(a[3], a[7]),
        )

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.to_array()).all())


@dataclass(frozen=True)
class DriftMatrix:
    """Fluctuation drift M plus the effective per-oscillator scalars."""

    m: np.ndarray
    g_eff: tuple[float, float]       # g1 - 2 g2 qbar
    omega_eff: tuple[float, float]   # omega_m + 2 g2 |alpha|^2
    delta_eff: tuple[float, float]   # delta_c - g1 qbar + g2 qbar^2


def _write_drift(m: np.ndarray, p: SystemParams, s8) -> tuple:
    """Write every nonzero entry of M for mean state s8; return the
    effective scalars ((g'1, g'2), (w'1, w'2), (d'1, d'2))."""
    g_eff = [0.0, 0.0]
    w_eff = [0.0, 0.0]
    d_eff = [0.0, 0.0]
    for j in range(2):
        o = 4 * j
        q = s8[o]
        ar = s8[o + 2]
        ai = s8[o + 3]
        a2 = ar * ar + ai * ai
        gp = p.g1[j] - 2.0 * p.g2[j] * q
        wp = p.omega_m[j] + 2.0 * p.g2[j] * a2
        # qbar is real, so |qbar|^2 and qbar^2 coincide
        dp = p.delta_c[j] - p.g1[j] * q + p.g2[j] * q * q
        g_eff[j], w_eff[j], d_eff[j] = gp, wp, dp
        m[o, o + 1] = p.omega_m[j]
        m[o + 1, o] = -wp
        m[o + 1, o + 1] = -p.gamma_m[j]
        m[o + 1, o + 2] = SQRT2 * gp * ar
        m[o + 1, o + 3] = SQRT2 * gp * ai
        m[o + 2, o] = -SQRT2 * gp * ai
        m[o + 2, o + 2] = -p.kappa[j]
        m[o + 2, o + 3] = dp
        m[o + 3, o] = SQRT2 * gp * ar
        m[o + 3, o + 2] = -dp
        m[o + 3, o + 3] = -p.kappa[j]
    m[2, 7] = -p.J
    m[3, 6] = p.J
    m[6, 3] = -p.J
    m[7, 2] = p.J
    return tuple(g_eff), tuple(w_eff), tuple(d_eff)


def drift_matrix(params: SystemParams, s: MeanFieldState) -> DriftMatrix:
    """Assemble the 8x8 fluctuation drift matrix at the given mean state."""
    s8 = s.to_array()
    if not np.isfinite(s8).all():
        raise NonFinite("mean-field state is not finite")
    m = np.zeros((8, 8))
    g_eff, w_eff, d_eff = _write_drift(m, params, s8)
    return DriftMatrix(m=m, g_eff=g_eff, omega_eff=w_eff, delta_eff=d_eff)


def diffusion_matrix(params: SystemParams) -> np.ndarray:
    """Diagonal diffusion matrix; independent of time and of the means."""
    d = np.zeros((8, 8))
    for j in range(2):
        o = 4 * j
        d[o + 1, o + 1] = (2.0 * params.n_bar[j] + 1.0) * params.gamma_m[j]
        d[o + 2, o + 2] = params.kappa[j]
        d[o + 3, o + 3] = params.kappa[j]
    return d


def _mean_derivs(p: SystemParams, t: float, s8) -> tuple:
    """Time derivatives of the 8 classical means at time t."""
    q1, p1, x1, y1 = s8[0], s8[1], s8[2], s8[3]
    q2, p2, x2, y2 = s8[4], s8[5], s8[6], s8[7]
    drive = p.E * (1.0 + p.eta_D * math.cos(p.Omega_D * t))
    a2_1 = x1 * x1 + y1 * y1
    a2_2 = x2 * x2 + y2 * y2
    d1 = p.delta_c[0] - p.g1[0] * q1 + p.g2[0] * q1 * q1
    d2 = p.delta_c[1] - p.g1[1] * q2 + p.g2[1] * q2 * q2
    return (
        p.omega_m[0] * p1,
        -p.omega_m[0] * q1 + p.g1[0] * a2_1 - 2.0 * p.g2[0] * a2_1 * q1
        - p.gamma_m[0] * p1,
        -p.kappa[0] * x1 + d1 * y1 - p.J * y2 + drive,
        -p.kappa[0] * y1 - d1 * x1 + p.J * x2,
        p.omega_m[1] * p2,
        -p.omega_m[1] * q2 + p.g1[1] * a2_2 - 2.0 * p.g2[1] * a2_2 * q2
        - p.gamma_m[1] * p2,
        -p.kappa[1] * x2 + d2 * y2 - p.J * y1 + drive,
        -p.kappa[1] * y2 - d2 * x2 + p.J * x1,
    )


def mean_field_rhs(
    params: SystemParams, t: float, s: MeanFieldState
) -> MeanFieldState:
    """Right-hand side of the classical mean equations, including the
    modulated drive E (1 + eta_D cos Omega_D t) and the cross term from
    the fiber coupling."""
    d = _mean_derivs(params, t, s.to_array())
    if not all(math.isfinite(v) for v in d):
        raise NonFinite(f"mean-field derivative not finite at t={t}")
    return MeanFieldState.from_array(d)


def joint_rhs(
    params: SystemParams, t: float, s: MeanFieldState, v: np.ndarray
) -> tuple[MeanFieldState, np.ndarray]:
    """Coupled derivative of means and covariance.

    The drift is frozen at the current mean state; the covariance part
    M V + V M^T + D is symmetric by construction. Returns the mean
    derivative and dV/dt.
    """
    s8 = s.to_array()
    ds = _mean_derivs(params, t, s8)
    m = np.zeros((8, 8))
    _write_drift(m, params, s8)
    a = m @ v
    dv = a + a.T + diffusion_matrix(params)
    if not (all(math.isfinite(x) for x in ds) and np.isfinite(dv).all()):
        raise NonFinite(f"joint derivative not finite at t={t}")
    return MeanFieldState.from_array(ds), dv


# -- flat 44-dimensional packing used by the integrators ----------------


def pack_covariance(v: np.ndarray) -> np.ndarray:
    """Upper triangle (row-major, diagonal included) of a symmetric V."""
    return np.asarray(v)[UPPER].copy()

def unpack_covariance(flat: np.ndarray) -> np.ndarray:
    """Rebuild the symmetric 8x8 matrix from its packed upper triangle."""
    v = np.empty((8, 8))
    v[UPPER] = flat
    v.T[UPPER] = flat
    return v


def pack_joint(s: MeanFieldState, v: np.ndarray) -> np.ndarray:
    y = np.empty(44)
    y[:8] = s.to_array()
    y[8:] = np.asarray(v)[UPPER]
    return y


def unpack_joint(y: np.ndarray) -> tuple[MeanFieldState, np.ndarray]:
    return MeanFieldState.from_array(y[:8]), unpack_covariance(y[8:])


def flat_rhs(params: SystemParams):
    """Build the fast flat-state derivative f(t, y) -> dy for propagation.

    y is the 44-vector [means(8), packed upper-tri covariance(36)]. The
    closure inlines the mean derivatives and touches only the
    mean-dependent drift entries per call (the constant entries are
    written once), so it stays cheap inside Runge-Kutta stage loops. It
    reuses scratch buffers internally but returns a fresh dy each call,
    so stages may be held concurrently. Agreement with mean_field_rhs
    and joint_rhs is exact, not approximate.
    """
    p = params
    om1, om2 = p.omega_m
    dc1, dc2 = p.delta_c
    g1a, g1b = p.g1
    g2a, g2b = p.g2
    gm1, gm2 = p.gamma_m
    k1, k2 = p.kappa
    jc, drv_e, eta, omd = p.J, p.E, p.eta_D, p.Omega_D
    cos = math.cos

    d_mat = diffusion_matrix(params)
    m = np.zeros((8, 8))
    _write_drift(m, params, np.zeros(8))
    a = np.empty((8, 8))
    b = np.empty((8, 8))
    v = np.empty((8, 8))
    iu = UPPER

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        dy = np.empty(44)
        q1 = y[0]; p1 = y[1]; x1 = y[2]; y1 = y[3]
        q2 = y[4]; p2 = y[5]; x2 = y[6]; y2 = y[7]
        drive = drv_e * (1.0 + eta * cos(omd * t))
        n1 = x1 * x1 + y1 * y1
        n2 = x2 * x2 + y2 * y2
        dp1 = dc1 - g1a * q1 + g2a * q1 * q1
        dp2 = dc2 - g1b * q2 + g2b * q2 * q2
        dy[0] = om1 * p1
        dy[1] = -om1 * q1 + g1a * n1 - 2.0 * g2a * n1 * q1 - gm1 * p1
        dy[2] = -k1 * x1 + dp1 * y1 - jc * y2 + drive
        dy[3] = -k1 * y1 - dp1 * x1 + jc * x2
        dy[4] = om2 * p2
        dy[5] = -om2 * q2 + g1b * n2 - 2.0 * g2b * n2 * q2 - gm2 * p2
        dy[6] = -k2 * x2 + dp2 * y2 - jc * y1 + drive
        dy[7] = -k2 * y2 - dp2 * x2 + jc * x1

        gp1 = g1a - 2.0 * g2a * q1
        gp2 = g1b - 2.0 * g2b * q2
        m[1, 0] = -(om1 + 2.0 * g2a * n1)
        m[1, 2] = SQRT2 * gp1 * x1
        m[1, 3] = SQRT2 * gp1 * y1
        m[2, 0] = -SQRT2 * gp1 * y1
        m[2, 3] = dp1
        m[3, 0] = SQRT2 * gp1 * x1
        m[3, 2] = -dp1
        m[5, 4] = -(om2 + 2.0 * g2b * n2)
        m[5, 6] = SQRT2 * gp2 * x2
        m[5, 7] = SQRT2 * gp2 * y2
        m[6, 4] = -SQRT2 * gp2 * y2
        m[6, 7] = dp2
        m[7, 4] = SQRT2 * gp2 * x2
        m[7, 6] = -dp2

        v[iu] = y[8:]
        v.T[iu] = y[8:]
        np.matmul(m, v, out=a)
        np.add(a, a.T, out=b)
        np.add(b, d_mat, out=b)
        dy[8:] = b[iu]
        return dy

    return rhs


def default_initial_conditions(
    params: SystemParams,
) -> tuple[MeanFieldState, np.ndarray]:
    """Pre-drive rest state: zero means, uncorrelated thermal mechanics
    plus vacuum cavities."""
    s = MeanFieldState(
        qbar=(0.0, 0.0), pbar=(0.0, 0.0),
        alpha_re=(0.0, 0.0), alpha_im=(0.0, 0.0),
    )
    diag = []
    for j in range(2):
        t = (2.0 * params.n_bar[j] + 1.0) / 2.0
        diag += [t, t, 0.5, 0.5]
    return s, np.diag(diag)
