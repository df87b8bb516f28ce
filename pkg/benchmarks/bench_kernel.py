"""Benchmark: compiled matching kernel vs the pure-Python fallback.

Measures the raw embedding enumerator on synthetic workloads and the
end-to-end surfaces that sit on top of it (rule matching on randomized
memory graphs, state-space exploration). Run:

    python benchmarks/bench_kernel.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import random
import statistics
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from ptrgraph._kernel import _pymatch

try:
    from ptrgraph._kernel import _cmatch
except ImportError:
    _cmatch = None


def synth_workload(rng: random.Random, n_host: int):
    """A 4-node chain pattern over a random labelled host graph."""
    cands = tuple(tuple(range(n_host)) for _ in range(4))
    pedges = ((0, 1, 0), (1, 2, 1), (2, 3, 0))
    hedges = frozenset(
        (rng.randrange(n_host), rng.randrange(n_host), rng.randrange(2))
        for _ in range(n_host * 3)
    )
    return cands, pedges, hedges, frozenset()


def time_fn(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_raw_kernel(repeat: int) -> list[tuple[str, float, float]]:
    rows = []
    for n_host in (20, 60, 120):
        rng = random.Random(7)
        workloads = [synth_workload(rng, n_host) for _ in range(30)]

        def run(impl):
            def inner():
                for cands, pedges, hedges, alias in workloads:
                    impl.enumerate_embeddings(cands, pedges, hedges, alias)

            return inner

        t_pure = time_fn(run(_pymatch), repeat)
        t_comp = time_fn(run(_cmatch), repeat) if _cmatch else float("nan")
        rows.append((f"raw kernel, host={n_host}", t_pure, t_comp))
    return rows


def bench_rule_matching(repeat: int) -> list[tuple[str, float, float]]:
    from oracles import random_wf_graph
    from ptrgraph.model import rule_catalog
    from ptrgraph.rewrite import find_matches

    rng = random.Random(11)
    graphs = [random_wf_graph(rng, max_nodes=12) for _ in range(150)]
    cat = rule_catalog()

    def run_all():
        for g in graphs:
            for rule in cat.values():
                find_matches(g, rule)

    rows = []
    import ptrgraph._kernel as kernel_mod

    saved = kernel_mod.enumerate_embeddings
    try:
        kernel_mod_targets = [("pure", _pymatch)]
        if _cmatch:
            kernel_mod_targets.append(("compiled", _cmatch))
        timings = {}
        for name, impl in kernel_mod_targets:
            # swap the shared entry point so every caller uses this backend
            import ptrgraph.matching as matching_mod

            matching_mod._kernel.enumerate_embeddings = impl.enumerate_embeddings
            timings[name] = time_fn(run_all, repeat)
    finally:
        kernel_mod.enumerate_embeddings = saved
    rows.append(
        (
            "find_matches, 150 graphs x 11 rules",
            timings.get("pure", float("nan")),
            timings.get("compiled", float("nan")),
        )
    )
    return rows


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if _cmatch is None:
        print("compiled kernel not built; timing the pure backend only\n")

    rows = bench_raw_kernel(args.repeat) + bench_rule_matching(args.repeat)
    width = max(len(r[0]) for r in rows) + 2
    print(f"{'workload':<{width}} {'pure':>10} {'compiled':>10} {'speedup':>9}")
    for name, t_pure, t_comp in rows:
        speedup = t_pure / t_comp if t_comp == t_comp and t_comp > 0 else float("nan")
        print(
            f"{name:<{width}} {t_pure * 1e3:>8.1f}ms {t_comp * 1e3:>8.1f}ms "
            f"{speedup:>8.2f}x"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
