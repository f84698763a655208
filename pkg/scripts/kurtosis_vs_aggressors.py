"""Excess kurtosis of FQAM interference as the aggressor count grows.

Total interference power is held fixed and split equally between the
aggressors.  Prints a CSV table.
"""

import argparse

import numpy as np

from fqamsim.modem import build_fqam
from fqamsim.rate import build_mixture, excess_kurtosis


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--inr-db", type=float, default=20.0)
    ap.add_argument("--max-aggressors", type=int, default=8)
    ap.add_argument("--samples", type=int, default=1_000_000)
    args = ap.parse_args()

    c = build_fqam(4, 4)
    inr = 10 ** (args.inr_db / 10)
    print("aggressors,excess_kurtosis")
    for n in range(0, args.max_aggressors + 1):
        ag = [(np.ones(4), c, inr / n)] * n if n else []
        mix = build_mixture((np.ones(4), c, 1.0), ag, 1.0, cap=max(n, 1))
        print(f"{n},{excess_kurtosis(mix, 0, args.samples, seed=n):.4f}")


if __name__ == "__main__":
    main()
