"""Per-tone rate of (4,4)-FQAM and 16-QAM versus signal-to-interference ratio.

Each network is homogeneous: the FQAM victim faces one FQAM aggressor
(enumerated exactly) and the QAM victim faces QAM interference of equal
power, modelled as Gaussian.  Prints a CSV table.
"""

import argparse

import numpy as np

from fqamsim.modem import build_fqam, build_qam
from fqamsim.rate import build_mixture, mutual_information


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--inr-db", type=float, default=20.0)
    ap.add_argument("--samples", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    fqam, qam = build_fqam(4, 4), build_qam(16)
    inr = 10 ** (args.inr_db / 10)
    print("sir_db,fqam_bits_per_tone,qam_bits_per_tone")
    for sir_db in np.arange(-15, 21, 2.5):
        sig = inr * 10 ** (sir_db / 10)
        f = build_mixture((np.ones(4), fqam, sig), [(np.ones(4), fqam, inr)], 1.0)
        q = build_mixture((np.ones(1), qam, sig), [], 1.0 + inr)
        rf = mutual_information(fqam, f, args.samples, args.seed) / fqam.m_f
        rq = mutual_information(qam, q, args.samples, args.seed)
        print(f"{sir_db:.1f},{rf:.4f},{rq:.4f}")


if __name__ == "__main__":
    main()
