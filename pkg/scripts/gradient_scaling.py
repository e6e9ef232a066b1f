"""Adjacent-pair skew per unit distance, A(n), on paths of growing length.

At the default drift (rho=1e-4) a ramp never pushes a path into fast mode,
so A(n) only reflects hardware drift. Pass a larger --rho to see the
algorithm working:

    python scripts/gradient_scaling.py --rho 1e-2 --mu 0.1
"""

import argparse

import numpy as np

from gradsync import Scenario, SystemParams, TopologyKind, TopologySpec, compute_skew_report, run_scenario


def adjacent_ratio(report):
    adjacent = report.pairs[:, 1] - report.pairs[:, 0] == 1
    return float(np.max(report.pair_max_skew[adjacent] / report.pair_dist[adjacent]))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 16, 32, 64])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--rho", type=float, default=1e-4)
    ap.add_argument("--mu", type=float, default=None)
    ap.add_argument("--drift", default="ramp_across_nodes")
    ap.add_argument("--duration", type=float, default=1e4)
    args = ap.parse_args()

    params = SystemParams(rho=args.rho, mu=args.mu)
    print("seed n diameter A(n) global_skew fast_entries")
    for seed in args.seeds:
        a = {}
        for n in args.sizes:
            sc = Scenario(
                topology=TopologySpec(TopologyKind.PATH, n), params=params, drift=args.drift,
                duration=args.duration, seed=seed,
            )
            tr = run_scenario(sc)
            rep = compute_skew_report(tr)
            a[n] = adjacent_ratio(rep)
            print(seed, n, f"{rep.diameter:.5g}", f"{a[n]:.5g}", f"{rep.global_skew_max:.5g}", tr.stats["fast_entries"])
        lo, hi = min(args.sizes), max(args.sizes)
        print(f"# seed {seed}: A({hi})/A({lo}) = {a[hi] / a[lo]:.4f}")


if __name__ == "__main__":
    main()
