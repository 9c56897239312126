"""CSV serialization of trajectories, summaries, and sweeps.

All numeric fields use shortest round-trip scientific notation, so
files are byte-identical for identical inputs. Writes to a path go
through a temporary file in the same directory followed by an atomic
rename; a failed run leaves no partial output behind.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .errors import SinkUnavailable

TIMESERIES_HEADER = (
    "t,qbar1,pbar1,re_a1,im_a1,qbar2,pbar2,re_a2,im_a2,"
    "Sq,Ed,var_q_minus,var_p_minus,var_p_plus,phys_ok"
)
SWEEP_HEADER = "axis,Sq_bar,Ed_bar,entangled,wall_seconds"
SUMMARY_HEADER = "Sq_bar,Ed_bar,entangled,wall_seconds"


def _num(x: float) -> str:
    return np.format_float_scientific(x, unique=True)


def _flag(b) -> str:
    return "true" if b else "false"


def _write_lines(sink: str | Path | IO[str], lines: Iterable[str]) -> None:
    if hasattr(sink, "write"):
        for line in lines:
            sink.write(line + "\n")
        return
    path = Path(sink)
    tmp = path.with_name(f"{path.name}.tmp-{os.getpid()}")
    try:
        with open(tmp, "w", encoding="ascii") as fh:
            for line in lines:
                fh.write(line + "\n")
        os.replace(tmp, path)
    except OSError as exc:
        try:
            tmp.unlink(missing_ok=True)
        except OSError:
            pass
        raise SinkUnavailable(f"cannot write {path}: {exc}") from exc


def emit_timeseries(trajectory, series, sink) -> int:
    """Write one CSV row per trajectory sample; returns the row count
    (header excluded)."""
    n = len(trajectory)
    if n == 0:
        raise SinkUnavailable("refusing to serialize an empty trajectory")

    def lines():
        yield TIMESERIES_HEADER
        means = trajectory.means
        for i in range(n):
            cells = [_num(trajectory.times[i])]
            cells += [_num(x) for x in means[i]]
            cells += [
                _num(series.s_q[i]),
                _num(series.e_d[i]),
                _num(series.var_q_minus[i]),
                _num(series.var_p_minus[i]),
                _num(series.var_p_plus[i]),
                _flag(series.phys_ok[i]),
            ]
            yield ",".join(cells)

    _write_lines(sink, lines())
    return n


def emit_sweep(sr, sink) -> int:
    """Write one CSV row per sweep point, in axis order."""

    def lines():
        yield SWEEP_HEADER
        for value, row in zip(sr.axis_values, sr.rows):
            yield ",".join(
                [
                    _num(value),
                    _num(row.sq_bar),
                    _num(row.ed_bar),
                    _flag(row.entangled),
                    _num(row.wall_seconds),
                ]
            )

    _write_lines(sink, lines())
    return len(sr.rows)


def emit_summary(result, sink) -> int:
    """Write the windowed steady-state averages of one run as a
    single-row CSV."""
    lines = [
        SUMMARY_HEADER,
        ",".join(
            [
                _num(result.sq_bar),
                _num(result.ed_bar),
                _flag(result.entangled),
                _num(result.wall_seconds),
            ]
        ),
    ]
    _write_lines(sink, lines)
    return 1
