"""Time the compiled and pure-Python kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat N]

Also times the trefoil elimination end to end with each backend.
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import timeit

from qtorus import _pykernels

try:
    from qtorus import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def random_poly(rng: random.Random, n: int) -> dict:
    return {rng.randrange(-400, 400): rng.randint(-9, 9) or 1 for _ in range(n)}


def random_torus(rng: random.Random, n: int, m: int) -> dict:
    return {tuple(rng.randrange(-6, 7) for _ in range(4)): random_poly(rng, m) for _ in range(n)}


def bench(fn, args, repeat: int) -> float:
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def pipeline_time(pure: bool) -> float:
    code = (
        "import time; from qtorus import pipelines as pl; t = time.perf_counter(); "
        "pl.trefoil_pipeline(); pl.hopf_pipeline(); print(time.perf_counter() - t)"
    )
    env = dict(os.environ, QTORUS_PURE="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True)
    return float(out.stdout)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = random.Random(1)
    a, b = random_poly(rng, 300), random_poly(rng, 300)
    ta, tb = random_torus(rng, 40, 20), random_torus(rng, 40, 20)
    cases = [
        ("poly_mul 300x300", "poly_mul", (a, b, 0)),
        ("poly_add 300+300", "poly_add", (a, b, 1)),
        ("twisted_mul 40x40 (20 terms)", "twisted_mul", (ta, tb, 2, 4, 0)),
    ]
    print(f"{'kernel':32} {'python':>10} {'cython':>10} {'speedup':>8}")
    for label, name, fargs in cases:
        tp = bench(getattr(_pykernels, name), fargs, args.repeat)
        if _ckernels is None:
            print(f"{label:32} {tp:10.4f} {'-':>10} {'-':>8}")
            continue
        tc = bench(getattr(_ckernels, name), fargs, args.repeat)
        assert getattr(_ckernels, name)(*fargs) == getattr(_pykernels, name)(*fargs)
        print(f"{label:32} {tp:10.4f} {tc:10.4f} {tp / tc:8.2f}")
    tp = pipeline_time(pure=True)
    line = f"{'trefoil + Hopf pipelines':32} {tp:10.4f}"
    if _ckernels is not None:
        tc = pipeline_time(pure=False)
        line += f" {tc:10.4f} {tp / tc:8.2f}"
    print(line)


if __name__ == "__main__":
    main()
