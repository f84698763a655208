"""Paired all-QAM versus hybrid campaigns for both scenarios.

Writes one ``compare`` output tree per scenario below ``--out`` and prints
the headline metrics with their bootstrap intervals.
"""

import argparse
from pathlib import Path

from fqamsim.cli import main as cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--drops", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--config", type=Path)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    for scenario in ("space", "frequency"):
        print(f"[{scenario}]")
        argv = ["compare", "--scenario", scenario, "--drops", str(args.drops), "--seed",
                str(args.seed), "--workers", str(args.workers), "--out", str(args.out / scenario)]
        if args.config:
            argv += ["--config", str(args.config)]
        rc = cli(argv)
        if rc:
            raise SystemExit(rc)


if __name__ == "__main__":
    main()
