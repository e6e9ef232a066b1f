"""Command line interface: ``run``, ``sweep`` and ``graph``.

    gradsync run --scenario path16.cfg --out out/ [--no-rbs]
    gradsync sweep --scenario path16.cfg --vary topology.n=8,16,32,64 --out sweep/
    gradsync graph --scenario path16.cfg [--distances]

``run`` and ``sweep`` exit 0 iff every gradient bound check passes.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError, parse_assignments, parse_value, scenario_from_values, without_rbs
from .metrics import (
    GradientBoundSpec,
    check_gradient_bound,
    compute_skew_report,
    export_pairs_csv,
    export_skew_csv,
    export_trace_csv,
    fmt,
)
from .simengine import Scenario, run_scenario
from .topology import (
    all_pairs_distances,
    build_estimate_graph,
    build_network,
    effective_diameter,
)

log = logging.getLogger("gradsync")


def summarize(sc: Scenario, out: Optional[Path], spec: GradientBoundSpec) -> dict[str, str]:
    trace = run_scenario(sc)
    report = compute_skew_report(trace, warmup=spec.warmup)
    result = check_gradient_bound(report, spec)
    if out is not None:
        export_trace_csv(trace, out / "trace.csv")
        export_skew_csv(report, out / "skew.csv")
        export_pairs_csv(report, out / "pairs.csv")
    s = trace.stats
    summary = {
        "nodes": str(trace.n),
        "estimate_edges": str(len(trace.estimate_graph.edges)),
        "effective_diameter": fmt(report.diameter),
        "global_skew_max": fmt(report.global_skew_max),
        "gradient_ratio_max": fmt(result.max_ratio),
        "worst_pair": "-" if result.worst_pair is None else "%d-%d" % result.worst_pair,
        "soundness_violations": str(s["soundness_violations"]),
        "validity_violations": str(s["validity_violations"]),
        "max_error_ratio": fmt(s["max_error_ratio"]),
        "fast_entries": str(s["fast_entries"]),
        "events": str(s["events"]),
        "bound_check": "pass" if result.passed else "fail",
    }
    if out is not None:
        (out / "summary.txt").write_text("".join(f"{k} = {v}\n" for k, v in summary.items()))
    return summary


def _load(path: str) -> dict:
    return parse_assignments(Path(path).read_text(encoding="utf-8"))


def _bound_spec(args) -> GradientBoundSpec:
    return GradientBoundSpec(c_l=args.cl, log_base=args.log_base, warmup=args.warmup)


def cmd_run(args) -> int:
    sc = scenario_from_values(_load(args.scenario))
    if args.no_rbs:
        sc = without_rbs(sc)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = summarize(sc, out, _bound_spec(args))
    for k, v in summary.items():
        print(f"{k} = {v}")
    return 0 if summary["bound_check"] == "pass" else 1


def _parse_vary(items: Sequence[str]) -> list[tuple[str, list]]:
    axes = []
    for item in items:
        if "=" not in item:
            raise ConfigError(f"--vary expects key=v1,v2,...: {item!r}")
        key, raw = item.split("=", 1)
        key = key.strip()
        axes.append((key, [(text.strip(), parse_value(key, text.strip())) for text in raw.split(",")]))
    return axes


def cmd_sweep(args) -> int:
    base = _load(args.scenario)
    axes = _parse_vary(args.vary)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = _bound_spec(args)
    keys = [k for k, _ in axes]
    rows = []
    all_pass = True
    for combo in itertools.product(*(vals for _, vals in axes)):
        overrides = {k: val for k, (_, val) in zip(keys, combo)}
        sc = scenario_from_values({**base, **overrides})
        if args.no_rbs:
            sc = without_rbs(sc)
        name = "_".join(f"{k}={text}" for k, (text, _) in zip(keys, combo)) or "base"
        point_dir = out / name
        point_dir.mkdir(parents=True, exist_ok=True)
        summary = summarize(sc, point_dir, spec)
        all_pass &= summary["bound_check"] == "pass"
        print(f"# {name}")
        for k, v in summary.items():
            print(f"{k} = {v}")
        rows.append([text for text, _ in combo] + [
            summary["effective_diameter"],
            summary["global_skew_max"],
            summary["gradient_ratio_max"],
            summary["bound_check"],
        ])
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(keys + ["effective_diameter", "global_skew_max", "gradient_ratio_max", "bound_check"])
        w.writerows(rows)
    print(f"bound_check = {'pass' if all_pass else 'fail'}")
    return 0 if all_pass else 1


def cmd_graph(args) -> int:
    sc = scenario_from_values(_load(args.scenario))
    if args.no_rbs:
        sc = without_rbs(sc)
    g = build_network(sc.topology_spec())
    eg = build_estimate_graph(g, sc.params)
    for e in eg.edges:
        parts = [str(e.u), str(e.v), e.kind.value, fmt(e.eps)]
        if e.relay is not None:
            parts.append(str(e.relay))
        print(" ".join(parts))
    dist = all_pairs_distances(eg)
    print(f"diameter {fmt(effective_diameter(eg, dist))}")
    if args.distances:
        for row in dist:
            print(",".join(fmt(x) for x in row))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gradsync", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, bound=True):
        p.add_argument("--scenario", required=True, help="scenario config file")
        p.add_argument("--no-rbs", action="store_true", help="disable RBS estimate edges")
        if bound:
            p.add_argument("--cl", type=float, default=8.0, help="gradient bound constant")
            p.add_argument("--log-base", type=float, default=None, help="default 1/rho")
            p.add_argument("--warmup", type=float, default=None, help="excluded prefix (time)")

    p = sub.add_parser("run", help="simulate one scenario and check the gradient bound")
    common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a grid of scenario variations")
    common(p)
    p.add_argument("--vary", action="append", default=[], help="key=v1,v2,... (repeatable)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("graph", help="print the estimate graph")
    common(p, bound=False)
    p.add_argument("--distances", action="store_true")
    p.set_defaults(func=cmd_graph)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
