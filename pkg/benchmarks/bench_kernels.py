#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Sizes default to dataset scale: one corpus-sized event array per kernel
(millions of commit timestamps, tens of thousands of score rows).

    python benchmarks/bench_kernels.py [--events N] [--scores N] [--repeat K]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from malta._kernels import _fallback

try:
    from malta._kernels import _native
except ImportError:
    _native = None


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--events", type=int, default=2_000_000,
                        help="commit-event array length (default 2e6)")
    parser.add_argument("--scores", type=int, default=50_000,
                        help="score array length for rank statistics (default 5e4)")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    times = rng.uniform(0, 1.6e8, size=args.events)
    flags = (rng.random(size=args.events) < 0.85).astype(np.uint8)
    delays = rng.uniform(0, 400, size=args.events // 20)
    scores = rng.normal(size=args.scores)
    labels = (rng.random(size=args.scores) < 0.3).astype(np.uint8)
    sample_a = rng.normal(size=args.scores // 2)
    sample_b = rng.normal(loc=0.3, size=args.scores // 2)

    cases = [
        ("window_count", lambda m: m.window_count(times, flags, 4e7, 1.2e8)),
        ("latest_flagged", lambda m: m.latest_flagged_at_or_before(times, flags, 1.2e8)),
        ("median_clamped", lambda m: m.median_clamped_ratio(delays, 180.0)),
        ("rank_auc", lambda m: m.rank_auc(scores, labels)),
        ("mann_whitney_u", lambda m: m.mann_whitney_u(sample_a, sample_b)),
        ("cliffs_delta", lambda m: m.cliffs_delta(sample_a, sample_b)),
    ]

    if _native is None:
        print("native kernels not built; benchmarking the fallback only")

    header = f"{'kernel':<16} {'fallback':>12}"
    if _native is not None:
        header += f" {'native':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, call in cases:
        fb = timeit(lambda: call(_fallback), args.repeat)
        line = f"{name:<16} {fb * 1e3:>10.2f}ms"
        if _native is not None:
            nat = timeit(lambda: call(_native), args.repeat)
            check_fb, check_nat = call(_fallback), call(_native)
            agree = check_fb == check_nat
            line += f" {nat * 1e3:>10.2f}ms {fb / nat:>8.1f}x"
            if not agree:
                line += "  (MISMATCH!)"
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
