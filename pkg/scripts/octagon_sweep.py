"""Extremal octagon versus the hot field B2: vertex modes, hull membership and linearity of Q2."""

import argparse

import numpy as np

from qcollide.ensemble import octagon_analysis
from qcollide.model import LABELS, ModelParams


def r_squared(x, y):
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    return 1 - resid @ resid / np.sum((y - y.mean()) ** 2)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--B2", type=float, nargs="+", default=[0.15, 0.3, 0.6, 0.9])
    args = ap.parse_args()

    b2 = np.array(args.B2)
    reps = [octagon_analysis(ModelParams(B2=b)) for b in b2]
    print("B2      " + " ".join(f"{k:>12}" for k in LABELS))
    for b, rep in zip(b2, reps):
        print(f"{b:<7.3f} " + " ".join(f"{rep.modes[k]:>12}" for k in LABELS))
    for b, rep in zip(b2, reps):
        extra = sorted(set(rep.hull) - set(LABELS))
        print(f"B2={b}: hull has {len(rep.hull)} vertices, extra {extra or 'none'}")
    if len(b2) > 2:
        for k in LABELS:
            q2 = np.array([rep.vertices[k][0] for rep in reps])
            print(f"{k:>5}: R^2 of Q2_complete vs B2 = {r_squared(b2, q2):.7f}")


if __name__ == "__main__":
    main()
