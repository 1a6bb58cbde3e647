"""Compare the compiled interval kernels against the pure-Python fallback.

Two measurements:

* micro: each kernel called directly from both modules on the same random inputs;
* end-to-end: the corpus analyzed in a subprocess per backend, the Python one
  forced with ``MIXEDFLOW_PURE_PYTHON=1``.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N] [--corpus DIR]``.
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import timeit

from mixedflow import _pykernels as py

try:
    from mixedflow import _kernels as cy
except ImportError:
    cy = None

BOUNDS = (py.NEG_INF, -1000, -7, -1, 0, 1, 3, 12, 1000, 2**40, py.POS_INF)


def random_intervals(n: int, seed: int = 0):
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        a, b = sorted((rng.choice(BOUNDS), rng.choice(BOUNDS)))
        c, d = sorted((rng.choice(BOUNDS), rng.choice(BOUNDS)))
        out.append((a, b, c, d))
    return out


def kernel_cases(n: int):
    quads = random_intervals(n)
    thresholds = (py.NEG_INF, -10, 0, 10, 100, py.POS_INF)
    return {
        "itv_add": (lambda k: [k.itv_add(*q) for q in quads]),
        "itv_mul": (lambda k: [k.itv_mul(*q) for q in quads]),
        "itv_join": (lambda k: [k.itv_join(*q) for q in quads]),
        "itv_meet": (lambda k: [k.itv_meet(*q) for q in quads]),
        "itv_leq": (lambda k: [k.itv_leq(*q) for q in quads]),
        "itv_widen": (lambda k: [k.itv_widen(*q) for q in quads]),
        "itv_narrow": (lambda k: [k.itv_narrow(*q) for q in quads]),
        "itv_widen_thresholds": (lambda k: [k.itv_widen_thresholds(*q, thresholds) for q in quads]),
    }


def micro(n: int, repeat: int) -> None:
    print(f"micro: {n} calls per kernel, best of {repeat}")
    print(f"  {'kernel':<22} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for name, fn in kernel_cases(n).items():
        t_py = min(timeit.repeat(lambda: fn(py), number=1, repeat=repeat)) * 1e3
        if cy is None:
            print(f"  {name:<22} {t_py:>10.2f} {'-':>10} {'-':>8}")
            continue
        assert fn(py) == fn(cy), name
        t_cy = min(timeit.repeat(lambda: fn(cy), number=1, repeat=repeat)) * 1e3
        print(f"  {name:<22} {t_py:>10.2f} {t_cy:>10.2f} {t_py / t_cy:>7.2f}x")


END_TO_END = """
import os, sys, time
from mixedflow._backend import BACKEND
from mixedflow.report import AnalysisConfig, run_analysis
corpus, repeat = sys.argv[1], int(sys.argv[2])
files = sorted(os.path.join(corpus, f) for f in os.listdir(corpus) if f.endswith(".mc"))
configs = [AnalysisConfig(rule=r, gc=g, context=c) for r in ("localized", "reluctant")
           for g in (False, True) for c in ("none", "full")]
best = float("inf")
for _ in range(repeat):
    t = time.perf_counter()
    for f in files:
        for c in configs:
            run_analysis(f, c)
    best = min(best, time.perf_counter() - t)
print(BACKEND, best)
"""


def end_to_end(corpus: str, repeat: int) -> None:
    print(f"end-to-end: every .mc file in {corpus} under 8 configurations, best of {repeat}")
    timings = {}
    for pure in ("1", "0"):
        env = dict(os.environ, MIXEDFLOW_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", END_TO_END, corpus, str(repeat)], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        timings[out[0]] = float(out[1])
    for backend, t in timings.items():
        print(f"  {backend:<8} {t * 1e3:>9.1f} ms")
    if len(timings) == 2:
        print(f"  speedup  {timings['python'] / timings['cython']:>9.2f}x")


def main(argv=None) -> int:
    here = os.path.dirname(os.path.abspath(__file__))
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--calls", type=int, default=20000, help="kernel calls per micro measurement")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--corpus", default=os.path.join(os.path.dirname(here), "corpus"))
    args = ap.parse_args(argv)
    micro(args.calls, args.repeat)
    print()
    end_to_end(args.corpus, args.repeat)
    return 0


if __name__ == "__main__":
    sys.exit(main())
