"""Command-line interface.

    plotkit plot --spec figure.ini
    plotkit plot --scenario-dir results/ --auto [--format png]

Spec files are flat INI: a [figure] section (title, out), a [traces]
section mapping mode names to csv paths, and optional [zoom.N] sections
with t_start / t_end.
"""

from __future__ import annotations

import argparse
import configparser
import glob
import os
import sys

from .figures import FigureSpec, SchemaError, default_zooms, render


def spec_from_file(path: str) -> FigureSpec:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise FileNotFoundError(path)
    if "traces" not in cp:
        raise ValueError(f"{path}: missing [traces] section")
    traces = dict(cp["traces"].items())
    fig = cp["figure"] if "figure" in cp else {}
    zooms = []
    for name in cp.sections():
        if name.startswith("zoom"):
            zooms.append((float(cp[name]["t_start"]), float(cp[name]["t_end"])))
    return FigureSpec(traces=traces,
                      out_path=fig.get("out", "figure.png"),
                      zooms=zooms,
                      title=fig.get("title", ""))


def specs_from_dir(directory: str, fmt: str) -> list[FigureSpec]:
    """Pair up <scenario>_<mode>.csv files and build one spec per scenario."""
    groups: dict[str, dict] = {}
    for path in sorted(glob.glob(os.path.join(directory, "*.csv"))):
        stem = os.path.splitext(os.path.basename(path))[0]
        for mode in ("dsdu", "proposed"):
            suffix = f"_{mode}"
            if stem.endswith(suffix):
                groups.setdefault(stem[: -len(suffix)], {})[mode] = path
    specs = []
    for scenario, traces in sorted(groups.items()):
        ref = traces.get("proposed") or next(iter(traces.values()))
        specs.append(FigureSpec(
            traces=traces,
            out_path=os.path.join(directory, f"{scenario}.{fmt}"),
            zooms=default_zooms(ref),
            title=scenario))
    return specs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plotkit", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command")
    plot = sub.add_parser("plot", help="render figures from trace CSVs")
    plot.add_argument("--spec", help="figure spec INI file")
    plot.add_argument("--scenario-dir", help="directory of scenario traces")
    plot.add_argument("--auto", action="store_true",
                      help="derive figures for every scenario in the directory")
    plot.add_argument("--format", default="png", choices=("png", "svg"))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1

    if args.command != "plot":
        parser.print_usage(sys.stderr)
        return 1
    try:
        if args.spec:
            specs = [spec_from_file(args.spec)]
        elif args.scenario_dir and args.auto:
            specs = specs_from_dir(args.scenario_dir, args.format)
            if not specs:
                print(f"no scenario traces found in {args.scenario_dir}",
                      file=sys.stderr)
                return 1
        else:
            print("error: need --spec or --scenario-dir with --auto",
                  file=sys.stderr)
            return 1
        for spec in specs:
            out = render(spec)
            print(f"wrote {out}")
    except (SchemaError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
