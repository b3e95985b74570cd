#!/usr/bin/env python3
"""Compare the compiled kernels against their pure-numpy fallbacks.

The simulator benchmark times the whole simulate() call (encode + kernel +
decode) the way a user sees it; the pareto and sampling benchmarks time the
kernels directly.  The fallback path is the one selected by
SDFPROBE_NO_NUMBA=1, swapped in-process here so one run covers both.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --cycles 2000000 --repeats 5
"""
import argparse
import time

import numpy as np

import sdfprobe._kernels as K
from sdfprobe import (
    GranularityLevel,
    StopCondition,
    annotate,
    bundled_path,
    enumerate_scenarios,
    load_dut,
    simulate,
)


def best_of(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def swap(attr: str, variant):
    """Temporarily rebind one kernel entry point."""
    class _Ctx:
        def __enter__(self):
            self.old = getattr(K, attr)
            setattr(K, attr, variant)

        def __exit__(self, *exc):
            setattr(K, attr, self.old)

    return _Ctx()


def bench_simulator(cycles: int, repeats: int):
    dut = load_dut(bundled_path("sobel_quad.xml"))
    mapping = dut.mappings[0]
    program = annotate(mapping, dut.graphs, GranularityLevel.PHASE, dut.control_cost)
    scenario = enumerate_scenarios(program)[0]

    def run():
        simulate(
            dut.platform, mapping, scenario.program, dut.graphs,
            cost_model=dut.cost_model,
            stop=StopCondition.cycles(cycles),
            seed=3,
        )

    rows = []
    for label, variant in _variants(K._sim_kernel_jit, K._sim_kernel_py):
        with swap("sim_kernel", variant):
            run()  # warm-up: jit compilation / cache load
            rows.append((label, best_of(run, repeats)))
    return f"simulate, {cycles} cycles, 4 tiles", rows


def bench_pareto(points: int, repeats: int):
    rng = np.random.default_rng(1)
    lat = rng.integers(0, 500, size=points).astype(np.float64)
    pw = rng.integers(0, 500, size=points).astype(np.float64)
    rows = []
    for label, variant in _variants(K._pareto_mask_jit, K._pareto_mask_np):
        variant(lat[:8], pw[:8])
        rows.append((label, best_of(lambda: variant(lat, pw), repeats)))
    return f"pareto mask, {points} points", rows


def bench_sampling(samples: int, repeats: int):
    rng = np.random.default_rng(2)
    breaks = np.sort(rng.integers(0, 10**9, size=200_000)).astype(np.int64)
    breaks[0] = 0
    watts = rng.uniform(0.3, 0.7, size=breaks.shape[0])
    instants = np.sort(rng.integers(0, 10**9, size=samples)).astype(np.int64)
    rows = []
    for label, variant in _variants(K._sample_signal_jit, K._sample_signal_np):
        variant(breaks, watts, instants[:8])
        rows.append((label, best_of(lambda: variant(breaks, watts, instants), repeats)))
    return f"signal sampling, {samples} instants over 200k segments", rows


def _variants(jit, fallback):
    out = []
    if K.HAS_NUMBA and jit is not None:
        out.append(("numba", jit))
    out.append(("numpy", fallback))
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cycles", type=int, default=1_000_000)
    parser.add_argument("--points", type=int, default=4000)
    parser.add_argument("--samples", type=int, default=2_000_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args(argv)

    if not K.HAS_NUMBA:
        print("numba not installed: timing the numpy fallback only")

    for title, rows in (
        bench_simulator(args.cycles, args.repeats),
        bench_pareto(args.points, args.repeats),
        bench_sampling(args.samples, args.repeats),
    ):
        print(f"\n{title}")
        base = rows[-1][1]  # numpy fallback
        for label, secs in rows:
            note = f"  ({base / secs:5.1f}x vs numpy)" if label != "numpy" else ""
            print(f"  {label:6s} {secs * 1e3:10.2f} ms{note}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
