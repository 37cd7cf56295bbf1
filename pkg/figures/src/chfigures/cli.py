"""Command-line entry points: ``plot_norms`` and ``plot_snapshots``."""
from __future__ import annotations

import argparse
import sys

from .io import BadCheckpoint, SchemaError, load_manifest
from .plots import plot_norm_evolution, plot_snapshots


def _use_agg():
    import matplotlib

    matplotlib.use("Agg")


def main_norms(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plot_norms",
                                     description="norm-evolution panels from diagnostics CSVs")
    parser.add_argument("--csv", nargs="+", required=True,
                        help="diagnostics files, one per curve")
    parser.add_argument("--labels", nargs="+", default=None)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--format", default="png")
    parser.add_argument("--logy", action="store_true")
    args = parser.parse_args(argv)
    _use_agg()
    try:
        target = plot_norm_evolution(args.csv, args.out, labels=args.labels,
                                     fmt=args.format, logy=args.logy)
    except (SchemaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {target}")
    return 0


def main_snapshots(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plot_snapshots",
                                     description="solution snapshot grid from checkpoints")
    parser.add_argument("--manifest", required=True, help="JSON manifest of checkpoints")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--format", default="png")
    parser.add_argument("--vmin", type=float, default=-1.2)
    parser.add_argument("--vmax", type=float, default=1.2)
    parser.add_argument("--cmap", default="RdBu_r")
    args = parser.parse_args(argv)
    _use_agg()
    try:
        manifest = load_manifest(args.manifest)
        target = plot_snapshots(manifest, args.out, fmt=args.format,
                                vmin=args.vmin, vmax=args.vmax, cmap=args.cmap)
    except (SchemaError, BadCheckpoint, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {target}")
    return 0
