"""CSV trace contract shared by the bench CLI and external plotting tools.

A trace file has one boundary row per restart (inner_iter = 0, capturing the
stage's starting point), one row per inner iteration, and one final row for
the terminal step, so its row count is

    total inner iterations + restarts + 1.

Floats are written with shortest round-trip formatting, which makes traces
byte-identical across reruns of the same seeded configuration.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

TRACE_HEADER = [
    "restart_index",
    "global_iter",
    "inner_iter",
    "L",
    "f_value",
    "grad_norm_f",
    "grad_norm_reg",
    "tensor_trials_cum",
    "wall_seconds",
]

SWEEP_HEADER = [
    "eps",
    "mode",
    "p",
    "total_inner_iterations",
    "restarts",
    "final_grad_norm",
    "guarantee_met",
]


@dataclass
class TraceRow:
    restart_index: int
    global_iter: int
    inner_iter: int
    L: float
    f_value: float
    grad_norm_f: float
    grad_norm_reg: float
    tensor_trials_cum: int
    wall_seconds: float


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(float(v))  # shortest round-trip, numpy scalars coerced
    return str(v)


def write_trace(path: str, rows: list[TraceRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for r in rows:
            writer.writerow([
                r.restart_index, r.global_iter, r.inner_iter, _fmt(r.L),
                _fmt(r.f_value), _fmt(r.grad_norm_f), _fmt(r.grad_norm_reg),
                r.tensor_trials_cum, _fmt(r.wall_seconds),
            ])


def read_trace(path: str) -> list[TraceRow]:
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty trace file") from None
        if header != TRACE_HEADER:
            missing = [c for c in TRACE_HEADER if c not in header]
            raise ValueError(f"{path}: unexpected header; missing columns {missing}")
        rows = []
        for rec in reader:
            rows.append(TraceRow(
                restart_index=int(rec[0]), global_iter=int(rec[1]),
                inner_iter=int(rec[2]), L=float(rec[3]), f_value=float(rec[4]),
                grad_norm_f=float(rec[5]), grad_norm_reg=float(rec[6]),
                tensor_trials_cum=int(rec[7]), wall_seconds=float(rec[8]),
            ))
    return rows


def write_sweep(path: str, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_HEADER)
        for r in rows:
            writer.writerow([_fmt(r[k]) for k in SWEEP_HEADER])
