"""Stacked-row figure rendering for inverter fault-scenario traces.

Input is the simulator's CSV trace format (one row per high-rate control
execution). A both-mode figure stacks four rows: line-to-line source
voltage, baseline-mode currents, carrier-shift-mode currents, and a
reset/counter detail strip; zoom panels over caller-chosen windows repeat
the currents with the reset pulses and the oversampling window counter
staircase overlaid. Output is a static PNG or SVG.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.gridspec import GridSpec

TRACE_COLUMNS = ("t", "v_src_a", "v_src_b", "v_src_c", "v_pcc_al", "v_pcc_be",
                 "i_inv_al", "i_inv_be", "i_inv_norm_pu", "rst", "ctr_ovs_w")

MODE_LABELS = {"dsdu": "conventional double-update",
               "proposed": "carrier-shift limiter"}


class SchemaError(ValueError):
    """Trace file does not match the expected column layout."""


@dataclass(frozen=True)
class FigureSpec:
    traces: dict                      # mode name -> csv path, 1 or 2 entries
    out_path: str
    zooms: list = field(default_factory=list)   # (t_start, t_end) windows
    title: str = ""

    def __post_init__(self):
        if not 1 <= len(self.traces) <= 2:
            raise ValueError("need one or two trace files")
        for t0, t1 in self.zooms:
            if not t1 > t0:
                raise ValueError(f"empty zoom window ({t0}, {t1})")


def load_trace(path: str) -> dict:
    """Load one trace CSV into named arrays, verifying the schema."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    for want, got in zip(TRACE_COLUMNS, header):
        if want != got:
            raise SchemaError(f"{path}: expected column {want!r}, found {got!r}")
    if len(header) != len(TRACE_COLUMNS):
        extra = header[len(TRACE_COLUMNS):]
        raise SchemaError(f"{path}: unexpected trailing columns {extra}")
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    if data.ndim == 1:
        data = data.reshape(-1, len(TRACE_COLUMNS))
    cols = {name: data[:, i] for i, name in enumerate(TRACE_COLUMNS)}
    # per-unit current base recovered from the norm column
    norms = np.hypot(cols["i_inv_al"], cols["i_inv_be"])
    mask = cols["i_inv_norm_pu"] > 1e-9
    cols["i_base"] = float(np.median(norms[mask] / cols["i_inv_norm_pu"][mask])) \
        if mask.any() else 1.0
    return cols


def _pu_gridlines(ax):
    for level in (1.0, 1.5):
        ax.axhline(level, color="0.75", lw=0.6, ls="--", zorder=0)
        ax.axhline(-level, color="0.75", lw=0.6, ls="--", zorder=0)


def _plot_line_voltage(ax, tr):
    t = tr["t"] * 1e3
    ax.plot(t, tr["v_src_a"] - tr["v_src_b"], lw=0.6, label="v_ab")
    ax.plot(t, tr["v_src_b"] - tr["v_src_c"], lw=0.6, label="v_bc")
    ax.plot(t, tr["v_src_c"] - tr["v_src_a"], lw=0.6, label="v_ca")
    ax.set_ylabel("v line [V]")
    ax.legend(loc="upper right", fontsize=6, ncol=3)


def _plot_currents(ax, tr, label):
    t = tr["t"] * 1e3
    base = tr["i_base"]
    ax.plot(t, tr["i_inv_al"] / base, lw=0.6, label="i_alpha")
    ax.plot(t, tr["i_inv_be"] / base, lw=0.6, label="i_beta")
    _pu_gridlines(ax)
    ax.set_ylim(-1.8, 1.8)
    ax.set_ylabel(f"{label}\n[p.u.]")
    ax.legend(loc="upper right", fontsize=6, ncol=2)


def _plot_detail_strip(ax, tr):
    """Reset pulses and the oversampling window counter staircase."""
    t = tr["t"] * 1e3
    k_max = max(tr["ctr_ovs_w"].max(), 1.0)
    ax.step(t, tr["ctr_ovs_w"] / k_max, where="post", lw=0.5,
            color="tab:gray", label="window counter")
    ax.fill_between(t, 0.0, tr["rst"], step="post", color="tab:red",
                    label="rst", zorder=3)
    ax.set_ylim(-0.05, 1.15)
    ax.set_ylabel("rst / ctr")
    ax.legend(loc="upper right", fontsize=6, ncol=2)


def _zoom_panel(ax, traces, window):
    t0, t1 = window
    detail = traces.get("proposed") or next(iter(traces.values()))
    sel = (detail["t"] >= t0) & (detail["t"] <= t1)
    t = detail["t"][sel] * 1e3
    base = detail["i_base"]
    ax.plot(t, detail["i_inv_al"][sel] / base, lw=0.8, label="i_alpha")
    ax.plot(t, detail["i_inv_be"][sel] / base, lw=0.8, label="i_beta")
    _pu_gridlines(ax)
    ax.set_ylabel("zoom [p.u.]")
    twin = ax.twinx()
    k_max = max(detail["ctr_ovs_w"].max(), 1.0)
    twin.step(t, detail["ctr_ovs_w"][sel] / k_max, where="post", lw=0.5,
              color="tab:gray")
    twin.fill_between(t, 0.0, detail["rst"][sel], step="post",
                      color="tab:red", zorder=3)
    twin.set_ylim(-0.05, 3.0)
    twin.set_yticks([])
    ax.set_xlim(t0 * 1e3, t1 * 1e3)
    ax.legend(loc="upper right", fontsize=6, ncol=2)


def build_figure(spec: FigureSpec):
    """Assemble the matplotlib figure for a spec; returns the Figure."""
    traces = {mode: load_trace(path) for mode, path in spec.traces.items()}
    t_min = max(tr["t"][0] for tr in traces.values())
    t_max = min(tr["t"][-1] for tr in traces.values())
    for t0, t1 in spec.zooms:
        if t0 < t_min - 1e-12 or t1 > t_max + 1e-12:
            raise ValueError(
                f"zoom window ({t0}, {t1}) outside trace range "
                f"({t_min:.6f}, {t_max:.6f})")

    both = len(traces) == 2
    n_main = 4 if both else 2
    n_rows = n_main + len(spec.zooms)
    fig = plt.figure(figsize=(8.0, 1.9 * n_rows))
    gs = GridSpec(n_rows, 1, figure=fig, hspace=0.55)

    any_trace = traces.get("proposed") or next(iter(traces.values()))
    ax = fig.add_subplot(gs[0])
    _plot_line_voltage(ax, any_trace)
    if spec.title:
        ax.set_title(spec.title, fontsize=10)

    row = 1
    for mode in ("dsdu", "proposed"):
        if mode in traces:
            ax = fig.add_subplot(gs[row])
            _plot_currents(ax, traces[mode], MODE_LABELS.get(mode, mode))
            row += 1

    if both:
        ax = fig.add_subplot(gs[row])
        _plot_detail_strip(ax, any_trace)
        row += 1

    for window in spec.zooms:
        ax = fig.add_subplot(gs[row])
        _zoom_panel(ax, traces, window)
        row += 1
    ax.set_xlabel("t [ms]")
    return fig


def render(spec: FigureSpec) -> str:
    """Render a spec to its output file and return the path."""
    fig = build_figure(spec)
    out = spec.out_path
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    metadata = {"Date": None} if out.lower().endswith(".svg") else None
    fig.savefig(out, dpi=130, metadata=metadata)
    plt.close(fig)
    return out


def default_zooms(trace_path: str, half_width: float = 2.5e-3) -> list:
    """Zoom windows centered on the first and last source-voltage
    disturbance edges (sag entry/exit, phase jumps). Returns up to two
    windows; an undisturbed trace yields none."""
    tr = load_trace(trace_path)
    al = (2.0 * tr["v_src_a"] - tr["v_src_b"] - tr["v_src_c"]) / 3.0
    be = (tr["v_src_b"] - tr["v_src_c"]) / np.sqrt(3.0)
    jump = np.hypot(np.diff(al), np.diff(be))
    thresh = 0.1 * max(np.hypot(al, be).max(), 1e-9)
    edges = tr["t"][1:][jump > thresh]
    if edges.size == 0:
        return []
    t_lo, t_hi = tr["t"][0], tr["t"][-1]
    windows = []
    for center in (edges[0], edges[-1]):
        w = (max(t_lo, center - half_width), min(t_hi, center + half_width))
        if not windows or w[0] - windows[-1][0] > 2.0 * half_width:
            windows.append(w)
    return windows
