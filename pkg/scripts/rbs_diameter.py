"""Effective diameter of paths with and without RBS estimate edges."""

import argparse
import math

from gradsync import (
    SystemParams,
    TopologyKind,
    TopologySpec,
    build_estimate_graph,
    build_network,
    direct_uncertainty,
    effective_diameter,
    rbs_uncertainty,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[2, 4, 8, 16, 32, 64, 128])
    ap.add_argument("--rho", type=float, default=1e-4)
    ap.add_argument("--ru", type=float, default=0.01)
    args = ap.parse_args()

    on_p = SystemParams(rho=args.rho, ru=args.ru)
    off_p = SystemParams(rho=args.rho, ru=args.ru, rbs_enabled=False)
    e_rbs, e_dir = rbs_uncertainty(on_p, 1.0), direct_uncertainty(0.0, 1.0, on_p)
    print(f"# eps_direct={e_dir:.6g} eps_rbs={e_rbs:.6g}")
    print("n D_on D_off ratio cap")
    for n in args.sizes:
        g = build_network(TopologySpec(TopologyKind.PATH, n))
        on = effective_diameter(build_estimate_graph(g, on_p))
        off = effective_diameter(build_estimate_graph(g, off_p))
        cap = math.ceil((n - 1) / 2) * e_rbs + e_dir
        print(n, f"{on:.6g}", f"{off:.6g}", f"{on / off:.4f}", f"{cap:.6g}")


if __name__ == "__main__":
    main()
