"""Trace serialization, metrics, and mode comparison.

Traces are CSV at the high-rate cadence with a fixed header and floats at 9
significant digits; identical configurations must serialize byte-identically,
so every formatting choice here is deterministic.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass

from .frames import I_PHASE_PEAK, V_PHASE_PEAK
from .scheduler import SimResult

TRACE_HEADER = ("t", "v_src_a", "v_src_b", "v_src_c", "v_pcc_al", "v_pcc_be",
                "i_inv_al", "i_inv_be", "i_inv_norm_pu", "rst", "ctr_ovs_w")

_INT_COLS = {9, 10}  # rst, ctr_ovs_w


@dataclass
class Metrics:
    peak_current_pu: float
    peak_time: float
    rst_count: int
    reaction_latency: float | None
    steady_state_current_error_pu: float


def write_traces(rows, path: str) -> None:
    """Write trace rows; an empty trace yields a header-only file."""
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(TRACE_HEADER) + "\n")
            for row in rows:
                cells = []
                for i, v in enumerate(row):
                    cells.append(str(int(v)) if i in _INT_COLS else f"{v:.9g}")
                fh.write(",".join(cells) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write trace file {path!r}: {exc}") from exc


def read_traces(path: str):
    """Parse a trace file back into row tuples (floats, ints per schema)."""
    rows = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != TRACE_HEADER:
            raise ValueError(f"{path}: unexpected trace header {header}")
        for line in fh:
            parts = line.strip().split(",")
            rows.append(tuple(
                int(p) if i in _INT_COLS else float(p)
                for i, p in enumerate(parts)))
    return rows


def compute_metrics(res: SimResult) -> Metrics:
    """Headline numbers for one run.

    Peak current is the maximum alpha-beta norm in per-unit over t >= 0.
    The steady-state error is the norm of the mean dq tracking error over
    the last full grid cycle of pre-roll, which rejects switching ripple.
    """
    peak = 0.0
    peak_t = 0.0
    for row in res.rows:
        if row[0] >= 0.0 and row[8] > peak:
            peak = row[8]
            peak_t = row[0]

    cycle = 2.0 * math.pi / res.params.omega_g
    ed_sum = eq_sum = 0.0
    n = 0
    for row, tel in zip(res.rows, res.telemetry):
        t = row[0]
        if -cycle <= t < 0.0:
            c, s = math.cos(tel.theta), math.sin(tel.theta)
            i_d = row[6] * c + row[7] * s
            i_q = -row[6] * s + row[7] * c
            ed_sum += i_d - res.cfg.i_ref_dq.d
            eq_sum += i_q - res.cfg.i_ref_dq.q
            n += 1
    sse = math.hypot(ed_sum / n, eq_sum / n) / res.i_base if n else float("nan")

    latency = None
    if res.resets and res.fault_t0 is not None:
        for tick in res.resets:
            t_reset = tick * res.t_clk
            if t_reset >= res.fault_t0:
                latency = t_reset - res.fault_t0
                break
    return Metrics(
        peak_current_pu=peak,
        peak_time=peak_t,
        rst_count=len(res.resets),
        reaction_latency=latency,
        steady_state_current_error_pu=sse,
    )


def compare_modes(m_dsdu: Metrics, m_prop: Metrics) -> dict:
    """Peak reduction and reaction statistics of proposed vs baseline."""
    reduction = m_dsdu.peak_current_pu - m_prop.peak_current_pu
    pct = 100.0 * reduction / m_dsdu.peak_current_pu if m_dsdu.peak_current_pu else 0.0
    return {
        "peak_reduction_pu": reduction,
        "peak_reduction_pct": pct,
        "dsdu": asdict(m_dsdu),
        "proposed": asdict(m_prop),
    }


def write_summary(path: str, scenario: str, metrics_by_mode: dict,
                  params, cfg) -> None:
    """JSON summary of a scenario run; records the per-unit basis used."""
    payload = {
        "scenario": scenario,
        "per_unit": {
            "basis": "phase-peak",
            "i_base_a": I_PHASE_PEAK,
            "v_base_v": V_PHASE_PEAK,
        },
        "plant": {k: v for k, v in asdict(params).items()},
        "controller": {
            k: (list(v) if isinstance(v, tuple) else v)
            for k, v in asdict(cfg).items()
        },
        "metrics": {mode: asdict(m) for mode, m in metrics_by_mode.items()},
    }
    if len(metrics_by_mode) == 2 and {"dsdu", "proposed"} <= set(metrics_by_mode):
        payload["comparison"] = compare_modes(metrics_by_mode["dsdu"],
                                              metrics_by_mode["proposed"])
    tmp = json.dumps(payload, indent=2, sort_keys=True, allow_nan=True)
    with open(path, "w") as fh:
        fh.write(tmp + "\n")


def trace_path(out_dir: str, scenario: str, mode: str) -> str:
    return os.path.join(out_dir, f"{scenario}_{mode}.csv")


def summary_path(out_dir: str, scenario: str) -> str:
    return os.path.join(out_dir, f"{scenario}_summary.json")
