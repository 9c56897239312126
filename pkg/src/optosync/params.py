"""Physical parameters of the coupled two-cavity optomechanical system.

All quantities are dimensionless: hbar = 1, frequencies in units of the
first mechanical frequency, time in units of its inverse. Per-oscillator
quantities are ordered pairs (oscillator 1, oscillator 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Mapping

from .errors import InvalidParams, NegativeOccupation, NonPositiveRate

_PAIR_FIELDS = ("omega_m", "delta_c", "g1", "g2", "gamma_m", "kappa", "n_bar")
_SCALAR_FIELDS = ("J", "E", "eta_D", "Omega_D")


@dataclass(frozen=True)
class SystemParams:
    """Complete parameter set for one run; immutable value object.

    omega_m    mechanical frequencies
    delta_c    cavity detunings from the drive lasers
    g1, g2     linear and quadratic optomechanical couplings
    gamma_m    mechanical damping rates
    kappa      cavity amplitude decay rates
    J          fiber coupling between the two cavities
    E          drive amplitude (shared by both cavities)
    eta_D      drive modulation depth
    Omega_D    drive modulation frequency
    n_bar      thermal phonon occupation of each mechanical bath
    """

    omega_m: tuple[float, float]
    delta_c: tuple[float, float]
    g1: tuple[float, float]
    g2: tuple[float, float]
    gamma_m: tuple[float, float]
    kappa: tuple[float, float]
    J: float
    E: float
    eta_D: float
    Omega_D: float
    n_bar: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class Violation:
    """One parameter constraint failure."""

    kind: str  # "non_positive_rate" | "negative_occupation" | "malformed"
    field: str
    value: object

    def __str__(self) -> str:
        return f"{self.field}={self.value!r} ({self.kind})"


def _as_pair(name: str, value) -> tuple[float, float]:
    if isinstance(value, (int, float)):
        v = float(value)
        return (v, v)
    pair = tuple(float(x) for x in value)
    if len(pair) != 2:
        raise ValueError(f"{name} needs exactly two entries, got {len(pair)}")
    return pair


def validate_params(raw: Mapping | SystemParams) -> SystemParams:
    """Validate a parameter record and return an immutable SystemParams.

    Accepts a mapping with the SystemParams field names (pair fields may
    be a scalar, which is applied to both oscillators) or an existing
    SystemParams to re-check. Raises InvalidParams carrying every
    violation found; the specific subclass (NonPositiveRate,
    NegativeOccupation) is raised when all violations share one kind.
    """
    if isinstance(raw, SystemParams):
        record = {f.name: getattr(raw, f.name) for f in fields(raw)}
    else:
        record = dict(raw)

    known = set(_PAIR_FIELDS) | set(_SCALAR_FIELDS)
    unknown = set(record) - known
    if unknown:
        raise InvalidParams(
            [Violation("malformed", k, record[k]) for k in sorted(unknown)]
        )
    missing = known - set(record)
    if missing:
        raise InvalidParams(
            [Violation("malformed", k, None) for k in sorted(missing)]
        )

    violations: list[Violation] = []
    clean: dict[str, object] = {}
    for name in _PAIR_FIELDS:
        try:
            clean[name] = _as_pair(name, record[name])
        except (TypeError, ValueError):
            violations.append(Violation("malformed", name, record[name]))
    for name in _SCALAR_FIELDS:
        try:
            clean[name] = float(record[name])
        except (TypeError, ValueError):
            violations.append(Violation("malformed", name, record[name]))
    if violations:
        raise InvalidParams(violations)

    for name in ("omega_m", "gamma_m", "kappa"):
        for j, v in enumerate(clean[name]):
            if not (math.isfinite(v) and v > 0.0):
                violations.append(Violation("non_positive_rate", f"{name}[{j}]", v))
    for j, v in enumerate(clean["n_bar"]):
        if not (math.isfinite(v) and v >= 0.0):
            violations.append(Violation("negative_occupation", f"n_bar[{j}]", v))
    for name in ("delta_c", "g1", "g2"):
        for j, v in enumerate(clean[name]):
            if not math.isfinite(v):
                violations.append(Violation("malformed", f"{name}[{j}]", v))
    for name in _SCALAR_FIELDS:
        if not math.isfinite(clean[name]):
            violations.append(Violation("malformed", name, clean[name]))

    if violations:
        kinds = {v.kind for v in violations}
        if kinds == {"non_positive_rate"}:
            raise NonPositiveRate(violations)
        if kinds == {"negative_occupation"}:
            raise NegativeOccupation(violations)
        raise InvalidParams(violations)

    return SystemParams(**clean)  # type: ignore[arg-type]
