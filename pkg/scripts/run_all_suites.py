"""Run every shipped config and write records under results/ (or --out)."""

import argparse
import sys
from pathlib import Path

from gaussweyl.config import load_config
from gaussweyl.suites import run_suite

CONFIGS = Path(__file__).parent / "configs"


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("names", nargs="*", help="config names (default: all)")
    p.add_argument("--out", default="results")
    args = p.parse_args()
    names = args.names or sorted(f.stem for f in CONFIGS.glob("*.yaml"))
    worst = 0
    for name in names:
        rec = run_suite(load_config(CONFIGS / f"{name}.yaml"))
        rec.write(Path(args.out) / name)
        c = rec.counts()
        print(f"{name:14s} pass {c['pass']:4d}  fail {c['fail']:3d}  inconclusive {c['inconclusive']:3d}  "
              f"info {c['info']:3d}  {rec.wall_time:7.1f}s  {rec.payload_hash()[:12]}", flush=True)
        for chk in rec.checks:
            if chk.status in ("fail", "inconclusive"):
                print(f"    {chk.status} {chk.id}: {chk.measured:.4g} vs {chk.bound:.4g}")
        worst = 1 if 1 in (worst, rec.exit_code) else max(worst, rec.exit_code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
