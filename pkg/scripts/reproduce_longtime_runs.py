#!/usr/bin/env python3
"""Reproduce the three long-time reference runs (T = 100, k = 0.1, eps = 0.1).

Executes the three shipped configs, replays the inequality monitors over each
finished CSV, prints the computable stability radii, and writes
results/manifest.json for the snapshot figure tooling.

Usage:  python scripts/reproduce_longtime_runs.py [--fast]

--fast drops the grid to 48^2 and the horizon to T = 20 for a quick smoke
run (the outputs then do not reproduce the reference figures).
"""
import argparse
import json
import sys
import time
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from chseed.cli import main as chseed_main  # noqa: E402

NUMBER = {"I": 1, "II": 2, "III": 3}
CONFIGS = {label: REPO / "configs" / f"ic{num}.toml" for label, num in NUMBER.items()}
SNAPSHOT_TIMES = (0.0, 10.0, 50.0, 100.0)


def snapshot_file(out_dir: Path, t: float, k: float = 0.1, t_end: float = 100.0) -> Path:
    if t <= 0.0:
        return out_dir / "state_000000.chk"
    if t >= t_end:
        return out_dir / "state_final.chk"
    return out_dir / f"state_{int(round(t / k)):06d}.chk"


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--fast", action="store_true")
    args = parser.parse_args()

    overrides = []
    t_end = 100.0
    if args.fast:
        t_end = 20.0
        overrides = ["--override", "grid.n=48", "--override", "run.t_end=20.0"]

    (REPO / "results").mkdir(exist_ok=True)
    columns = []
    for label, config in CONFIGS.items():
        print(f"=== initial value {label}: running {config.name} ===")
        start = time.perf_counter()
        rc = chseed_main(["run", "--config", str(config), *overrides])
        if rc != 0:
            print(f"run failed with status {rc}")
            return rc
        print(f"    finished in {time.perf_counter() - start:.1f}s")
        csv_path = REPO / "results" / f"ic{NUMBER[label]}.csv"
        rc = chseed_main(["check", "--csv", str(csv_path), "--config", str(config), *overrides])
        if rc != 0:
            print(f"monitor replay failed with status {rc}")
            return rc
        chseed_main(["bounds", "--config", str(config), *overrides])
        out_dir = REPO / "results" / f"ic{NUMBER[label]}"
        times = [t for t in SNAPSHOT_TIMES if t <= t_end]
        columns.append({
            "label": f"Initial value {label}",
            "snapshots": [{"time": t, "path": str(snapshot_file(out_dir, t, t_end=t_end))}
                          for t in times],
        })

    manifest = REPO / "results" / "manifest.json"
    manifest.write_text(json.dumps({"columns": columns}, indent=2) + "\n")
    print(f"wrote {manifest}")
    print("norm figure:     plot_norms --csv results/ic1.csv results/ic2.csv "
          "results/ic3.csv --labels I II III --out results/figures")
    print("snapshot figure: plot_snapshots --manifest results/manifest.json "
          "--out results/figures")
    return 0


if __name__ == "__main__":
    sys.exit(main())
