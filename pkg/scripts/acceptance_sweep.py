"""Run the default scenario suite and print per-run soundness and bound stats.

Same grid as the acceptance suite, but reports every run instead of
pass/fail, and can write a CSV for plotting.

    python scripts/acceptance_sweep.py --seeds 0 1 --csv suite.csv
"""

import argparse
import csv
import itertools
import time

from gradsync import (
    GradientBoundSpec,
    Scenario,
    SystemParams,
    TopologyKind,
    TopologySpec,
    check_gradient_bound,
    compute_skew_report,
    run_scenario,
)

TOPOLOGIES = [("path", 16), ("ring", 16), ("grid", 16), ("random_geometric", 32)]
DRIFTS = ["alternating_extremes", "ramp_across_nodes"]
DELAYS = ["seeded_uniform", "alternating_extremes"]
COLUMNS = [
    "topology", "n", "seed", "drift", "delay", "diameter", "global_skew", "max_error_ratio",
    "soundness_violations", "validity_violations", "fast_entries", "gradient_ratio", "worst_pair",
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=list(range(5)))
    ap.add_argument("--duration", type=float, default=1e4)
    ap.add_argument("--rho", type=float, default=1e-4)
    ap.add_argument("--cl", type=float, default=8.0)
    ap.add_argument("--csv", default=None)
    args = ap.parse_args()

    params = SystemParams(rho=args.rho)
    spec = GradientBoundSpec(c_l=args.cl)
    rows = []
    t0 = time.perf_counter()
    for (kind, n), seed, drift, delay in itertools.product(TOPOLOGIES, args.seeds, DRIFTS, DELAYS):
        radius = 0.3 if kind == "random_geometric" else None
        sc = Scenario(
            topology=TopologySpec(TopologyKind(kind), n, radius=radius),
            params=params, drift=drift, delay=delay, duration=args.duration, seed=seed,
        )
        tr = run_scenario(sc)
        rep = compute_skew_report(tr)
        res = check_gradient_bound(rep, spec)
        s = tr.stats
        row = [
            kind, n, seed, drift, delay, f"{rep.diameter:.6g}", f"{rep.global_skew_max:.6g}",
            f"{s['max_error_ratio']:.4f}", s["soundness_violations"], s["validity_violations"],
            s["fast_entries"], f"{res.max_ratio:.4f}", "%d-%d" % res.worst_pair,
        ]
        rows.append(row)
        print(" ".join(str(x) for x in row), flush=True)
    print(f"# {len(rows)} runs in {time.perf_counter() - t0:.1f}s")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COLUMNS)
            w.writerows(rows)


if __name__ == "__main__":
    main()
