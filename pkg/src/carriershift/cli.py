"""Command-line interface.

    carriershift run --scenario sym_sag_90 --mode both --out results/
    carriershift run --scenario my_case.ini --mode proposed --out . \
        --param plant.l_g=2e-6 --param controller.delta_i_mag=1.5
    carriershift run --list-scenarios

Exit codes: 0 success, 1 usage error, 2 aborted on a non-finite plant state.
"""

from __future__ import annotations

import argparse
import os
import sys

from .controller import ControllerConfig
from .plant import NonFiniteState
from .scenarios import (apply_overrides, builtin_scenarios, get_scenario,
                        scenario_from_file, scenario_plant_params)
from .scheduler import SimSettings, run_single
from .traces import (compute_metrics, summary_path, trace_path, write_summary,
                     write_traces)

USAGE_ERROR, NONFINITE_ERROR = 1, 2


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="carriershift", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command")
    run = sub.add_parser("run", help="run a fault scenario")
    run.add_argument("--scenario", help="built-in scenario name or INI file path")
    run.add_argument("--mode", choices=("dsdu", "proposed", "both"), default=None)
    run.add_argument("--out", default=".", help="output directory")
    run.add_argument("--fault-align", type=float, default=0.0, metavar="FRACTION",
                     help="shift fault events by this fraction of a base period")
    run.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                     help="override e.g. plant.l_g=2e-6 or controller.pi_kp=8.0")
    run.add_argument("--list-scenarios", action="store_true")
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors; remap (2 means a
        # non-finite abort here), keep 0 for --help
        return 0 if exc.code == 0 else USAGE_ERROR

    if args.command != "run":
        parser.print_usage(sys.stderr)
        return USAGE_ERROR

    if args.list_scenarios:
        for s in builtin_scenarios():
            kinds = ",".join(type(ev.kind).__name__ for ev in s.fault.events)
            print(f"{s.name}  duration={s.duration:g}s  events=[{kinds}]")
        print("no_fault  duration=0.167s  events=[]")
        return 0

    if not args.scenario:
        print("error: --scenario is required (or use --list-scenarios)", file=sys.stderr)
        return USAGE_ERROR

    try:
        if os.path.exists(args.scenario) or args.scenario.endswith(".ini"):
            scenario = scenario_from_file(args.scenario)
        else:
            scenario = get_scenario(args.scenario)
    except (KeyError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR

    overrides = dict(scenario.overrides)
    for item in args.param:
        key, sep, val = item.partition("=")
        if not sep:
            print(f"error: bad --param {item!r}, expected KEY=VALUE", file=sys.stderr)
            return USAGE_ERROR
        overrides[key] = val

    try:
        if not 0.0 <= args.fault_align < 1.0:
            raise ValueError("--fault-align must lie in [0, 1)")
        params, cfg = apply_overrides(scenario_plant_params(), ControllerConfig(),
                                      overrides)
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR

    mode = args.mode or scenario.mode
    modes = ("dsdu", "proposed") if mode == "both" else (mode,)
    os.makedirs(args.out, exist_ok=True)

    settings = SimSettings()
    metrics_by_mode = {}
    used = None
    try:
        for m in modes:
            from dataclasses import replace
            res = run_single(scenario.name, scenario.fault, scenario.duration,
                             params, replace(cfg, mode=m),
                             fault_align=args.fault_align, settings=settings)
            write_traces(res.rows, trace_path(args.out, scenario.name, m))
            metrics_by_mode[m] = compute_metrics(res)
            used = res
    except NonFiniteState as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NONFINITE_ERROR

    write_summary(summary_path(args.out, scenario.name), scenario.name,
                  metrics_by_mode, used.params, used.cfg)
    for m, met in metrics_by_mode.items():
        lat = "n/a" if met.reaction_latency is None else f"{met.reaction_latency * 1e6:.2f} us"
        print(f"{scenario.name} [{m}]: peak {met.peak_current_pu:.3f} p.u. "
              f"at t={met.peak_time * 1e3:.2f} ms, resets={met.rst_count}, "
              f"latency={lat}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
