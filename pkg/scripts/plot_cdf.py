"""Plot the rate CDFs written by ``fqam-sim compare``.

Usage: python scripts/plot_cdf.py results/space [--png cdf.png]
"""

import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read_cdf(path):
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [float(r["rate_bps"]) / 1e6 for r in rows], [float(r["cumulative_fraction"]) for r in rows]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("run", type=Path, help="output directory of a compare run")
    ap.add_argument("--png", type=Path, default=None)
    args = ap.parse_args()

    fig, ax = plt.subplots(figsize=(6, 4))
    for mode in ("all_qam", "hybrid"):
        x, f = read_cdf(args.run / mode / "cdf.csv")
        ax.step(x, f, where="post", label=mode.replace("_", "-"))
    ax.set_xlabel("user rate [Mbit/s]")
    ax.set_ylabel("CDF")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.png or args.run / "cdf.png", dpi=120)


if __name__ == "__main__":
    main()
