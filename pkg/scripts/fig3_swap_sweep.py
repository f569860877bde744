"""Partial-swap sweep at the default parameters: work and heats versus phi.

    python scripts/fig3_swap_sweep.py --steps 401 --out runs/swap
"""

import argparse
import math
from pathlib import Path

import numpy as np

from qcollide.model import ModelParams, effective_population, partial_swap
from qcollide.thermo import CSV_COLUMNS, csv_row, evaluate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=201)
    ap.add_argument("--out", default="runs/swap")
    args = ap.parse_args()

    p = ModelParams()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    phis = np.linspace(0, math.pi, args.steps)
    rows, w = [], []
    for phi in phis:
        rec = evaluate(p, partial_swap(phi))[1]
        w.append(rec.w_partial)
        rows.append(csv_row(rec, "swap", phi) + [effective_population(p, phi, 1), effective_population(p, phi, 2)])
    with open(out / "sweep.csv", "w") as fh:
        fh.write(",".join(CSV_COLUMNS + ("N1", "N2")) + "\n")
        for r in rows:
            fh.write(",".join(x if isinstance(x, str) else f"{x:.17g}" for x in r) + "\n")

    w = np.array(w)
    flips = np.flatnonzero(np.sign(w[:-1]) != np.sign(w[1:]))
    for k in flips:
        print(f"W_partial changes sign in ({phis[k] / math.pi:.4f} pi, {phis[k + 1] / math.pi:.4f} pi)")
    print(f"|W_partial(pi/4)| = {abs(evaluate(p, partial_swap(math.pi / 4))[1].w_partial):.3e}")
    print(f"wrote {out / 'sweep.csv'}")


if __name__ == "__main__":
    main()
