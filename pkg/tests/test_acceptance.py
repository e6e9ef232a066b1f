"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line; the lines are also
collected into the terminal summary. Run standalone with

    python -m pytest tests/test_acceptance.py -s
"""

import itertools
import math
import time

import numpy as np
import pytest

from gradsync.metrics import (
    GradientBoundSpec,
    check_gradient_bound,
    compute_skew_report,
    export_pairs_csv,
    export_skew_csv,
    export_trace_csv,
)
from gradsync.simengine import Scenario, run_scenario
from gradsync.topology import (
    SystemParams,
    TopologyKind,
    TopologySpec,
    build_estimate_graph,
    build_network,
    direct_uncertainty,
    effective_diameter,
    effective_distance,
    graph_from_weights,
    rbs_uncertainty,
)
from oracles import simple_path_distance

pytestmark = pytest.mark.slow

RESULTS: dict[int, str] = {}

DEFAULTS = SystemParams(rho=1e-4, mu=1e-2, ru=0.01, delta_t=1.0, delta_b=1.0, lam=4.0)
DURATION = 1e4
SUITE_TOPOLOGIES = [
    (TopologyKind.PATH, 16),
    (TopologyKind.RING, 16),
    (TopologyKind.GRID, 16),
    (TopologyKind.RANDOM_GEOMETRIC, 32),
]
SUITE_SEEDS = range(5)
SUITE_DRIFTS = ["alternating_extremes", "ramp_across_nodes"]
SUITE_DELAYS = ["seeded_uniform", "alternating_extremes"]
RUNTIME_TARGET = 180.0


def record(criterion, name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion} ({name}): {detail}"
    RESULTS[criterion] = line
    print(line)
    return ok


def topo(kind, n):
    radius = 0.3 if kind is TopologyKind.RANDOM_GEOMETRIC else None
    return TopologySpec(kind, n, radius=radius)


@pytest.fixture(scope="module")
def suite():
    runs = []
    start = time.perf_counter()
    for (kind, n), seed, drift, delay in itertools.product(
        SUITE_TOPOLOGIES, SUITE_SEEDS, SUITE_DRIFTS, SUITE_DELAYS
    ):
        sc = Scenario(topology=topo(kind, n), params=DEFAULTS, drift=drift, delay=delay, duration=DURATION, seed=seed)
        tr = run_scenario(sc)
        runs.append((f"{kind.value}{n}/s{seed}/{drift}/{delay}", tr, compute_skew_report(tr)))
    return runs, time.perf_counter() - start


def test_c1_estimate_soundness(suite):
    runs, elapsed = suite
    checks = sum(tr.stats["soundness_checks"] for _, tr, _ in runs)
    bad = [(name, tr.stats["soundness_violations"]) for name, tr, _ in runs if tr.stats["soundness_violations"]]
    worst = max(tr.stats["max_error_ratio"] for _, tr, _ in runs)
    ok = record(
        1, "estimate soundness", not bad and checks > 0 and elapsed < RUNTIME_TARGET,
        f"{len(runs)} scenarios, {checks} checks, violations in {len(bad)} runs, "
        f"max |err|/eps {worst:.4f}, suite time {elapsed:.1f}s (target < {RUNTIME_TARGET:.0f}s)",
    )
    assert ok, bad[:5]


def test_c2_clock_validity(suite):
    runs, _ = suite
    checks = sum(tr.stats["validity_checks"] for _, tr, _ in runs)
    bad = [name for name, tr, _ in runs if tr.stats["validity_violations"]]
    # also re-check the sampled traces from outside the engine
    r_max = DEFAULTS.r_max
    for name, tr, _ in runs:
        dl = np.diff(tr.logical, axis=0)
        dt = np.diff(tr.times)[:, None]
        if (
            np.any(dl < 0)
            or np.any(tr.logical < tr.times[:, None] - 1e-9)
            or np.any(dl > r_max * dt + 1e-9)
        ):
            bad.append(name)
    dev = max(tr.stats["max_rate_deviation"] for _, tr, _ in runs)
    ok = record(
        2, "clock validity", not bad and checks > 0,
        f"{checks} ticks checked, {len(bad)} runs with violations, max |dL/dH - rate| {dev:.2e}",
    )
    assert ok, bad[:5]


def test_c3_global_skew():
    details, ok = [], True
    for seed, delay in itertools.product(range(3), ["seeded_uniform", "alternating_extremes"]):
        sc = Scenario(
            topology=TopologySpec(TopologyKind.PATH, 32), params=DEFAULTS, drift="ramp_across_nodes",
            delay=delay, duration=DURATION, seed=seed,
        )
        rep = compute_skew_report(run_scenario(sc))
        limit = 4 * rep.diameter
        ok &= rep.global_skew_max <= limit
        details.append(f"{rep.global_skew_max:.4f}")
    record(3, "global skew", ok, f"max post-warmup skew per run [{', '.join(details)}] vs 4*D_eff {limit:.4f}")
    assert ok


def test_c4_gradient_bound(suite):
    runs, _ = suite
    spec = GradientBoundSpec(c_l=8.0)
    results = [(name, check_gradient_bound(rep, spec)) for name, _, rep in runs]
    failed = [name for name, res in results if not res.passed]
    name, worst = max(results, key=lambda x: x[1].max_ratio)
    ok = record(
        4, "gradient bound", not failed,
        f"{len(results) - len(failed)}/{len(results)} pass at C_L=8, worst ratio {worst.max_ratio:.3f} "
        f"on {name} pair {worst.worst_pair}",
    )
    assert ok, failed[:5]


def test_c5_gradient_scaling():
    sizes = [8, 16, 32, 64]
    ok, details = True, []
    for seed in range(3):
        a, fast = {}, 0
        for n in sizes:
            sc = Scenario(
                topology=TopologySpec(TopologyKind.PATH, n), params=DEFAULTS, drift="ramp_across_nodes",
                delay="seeded_uniform", duration=DURATION, seed=seed,
            )
            tr = run_scenario(sc)
            rep = compute_skew_report(tr)
            adjacent = rep.pairs[:, 1] - rep.pairs[:, 0] == 1
            a[n] = float(np.max(rep.pair_max_skew[adjacent] / rep.pair_dist[adjacent]))
            fast += tr.stats["fast_entries"]
        ratio = a[64] / a[8]
        ok &= ratio <= 3
        details.append(f"seed {seed}: A(64)/A(8) = {ratio:.4f} (fast entries {fast})")
    record(5, "gradient scaling", ok, "; ".join(details))
    assert ok


def test_c6_rbs_diameter():
    g = build_network(TopologySpec(TopologyKind.PATH, 64))
    on = effective_diameter(build_estimate_graph(g, DEFAULTS))
    off_params = SystemParams(rho=DEFAULTS.rho, mu=DEFAULTS.mu, rbs_enabled=False)
    off = effective_diameter(build_estimate_graph(g, off_params))
    cap = math.ceil(63 / 2) * rbs_uncertainty(DEFAULTS, 1.0) + direct_uncertainty(0.0, 1.0, DEFAULTS)
    ok = on / off <= 0.25 and on <= cap
    record(6, "RBS diameter reduction", ok, f"D_on/D_off = {on:.4f}/{off:.4f} = {on / off:.4f}, D_on <= {cap:.4f}")
    assert ok


def test_c7_shortest_path_oracle():
    rng = np.random.default_rng(20240607)
    worst, mismatches = 0.0, 0
    for _ in range(200):
        n = int(rng.integers(2, 7))
        pairs = [p for p in itertools.combinations(range(n), 2) if rng.random() < 0.6]
        weighted = [(a, b, float(rng.uniform(1e-3, 10.0))) for a, b in pairs]
        eg = graph_from_weights(n, weighted)
        for u, v in itertools.product(range(n), repeat=2):
            want = simple_path_distance(n, weighted, u, v)
            got = effective_distance(eg, u, v)
            if math.isinf(want) or want == 0:
                mismatches += got != want
                continue
            rel = abs(got - want) / want
            worst = max(worst, rel)
            mismatches += rel > 1e-12
    ok = mismatches == 0
    record(7, "shortest-path oracle", ok, f"200 graphs, {mismatches} mismatches, max rel err {worst:.2e}")
    assert ok


def test_c8_determinism(tmp_path):
    sc = Scenario(
        topology=TopologySpec(TopologyKind.RANDOM_GEOMETRIC, 32, radius=0.3), params=DEFAULTS,
        drift="seeded_random_walk", delay="seeded_uniform", duration=2000, seed=5,
    )
    files = {}
    for run in ("a", "b"):
        tr = run_scenario(sc)
        rep = compute_skew_report(tr)
        d = tmp_path / run
        export_trace_csv(tr, d / "trace.csv")
        export_skew_csv(rep, d / "skew.csv")
        export_pairs_csv(rep, d / "pairs.csv")
        files[run] = {p.name: p.read_bytes() for p in sorted(d.iterdir())}
    ok = files["a"] == files["b"]
    size = sum(len(b) for b in files["a"].values())
    record(8, "determinism", ok, f"3 CSVs ({size} bytes) byte-identical across two runs")
    assert ok


def test_c9_zero_drift_fixpoint():
    p = SystemParams(rho=0.0, mu=DEFAULTS.mu)
    eps = direct_uncertainty(0.0, 1.0, p)
    ok, details = True, []
    for delay in ("fixed_max", "fixed_min"):
        sc = Scenario(topology=TopologySpec(TopologyKind.PATH, 8), params=p, delay=delay, duration=DURATION)
        tr = run_scenario(sc)
        rep = compute_skew_report(tr)
        skew = float(rep.global_skew.max())
        fast = tr.stats["fast_entries_after_warmup"] + tr.stats["fast_ticks_after_warmup"]
        ok &= skew <= eps and fast == 0
        details.append(f"{delay}: max skew {skew:.3g}, fast after warmup {fast}")
    record(9, "zero-drift fixpoint", ok, "; ".join(details) + f" (eps_direct {eps:.4f})")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-s", "-q"]))
