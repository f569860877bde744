"""Distance between the collision-map and Lindblad steady states as tau shrinks."""

import argparse

import numpy as np

from qcollide.dynamics import build_channel, lindblad_generator, lindblad_steady_state, steady_state
from qcollide.linalg import trace_distance
from qcollide.model import ModelParams, correlated_bath_state, partial_swap


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--phi", type=float, nargs="+", default=[0.0, 0.05, 0.2])
    ap.add_argument("--tau", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025, 0.0125])
    args = ap.parse_args()

    base = ModelParams()
    print("phi     " + " ".join(f"tau={t:<9g}" for t in args.tau))
    for phi in args.phi:
        target = lindblad_steady_state(lindblad_generator(base, phi))
        d = []
        for tau in args.tau:
            p = base.with_(tau=tau)
            rho = steady_state(build_channel(p, correlated_bath_state(p, partial_swap(phi)))).state
            d.append(trace_distance(rho, target))
        slope = np.polyfit(np.log(args.tau), np.log(d), 1)[0]
        print(f"{phi:<7g} " + " ".join(f"{x:<13.3e}" for x in d) + f" order~{slope:.2f}")


if __name__ == "__main__":
    main()
