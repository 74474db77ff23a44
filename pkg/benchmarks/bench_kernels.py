"""Compare the compiled kernels with the pure-Python fallback.

Kernel timings call both modules directly on the same inputs.  End-to-end
timings run a workload in a subprocess per backend, forcing the fallback via
KTCOMPLEX_PURE_PYTHON.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--skip-end-to-end]
"""

import argparse
import os
import random
import subprocess
import sys
import timeit

from ktcomplex import _pykernels
from ktcomplex.algebra import FieldSpec, GradedPoly

try:
    from ktcomplex import _kernels
except ImportError:
    _kernels = None

WORKLOADS = {
    "verify_bf(4)": "from ktcomplex.bf import verify_bf; verify_bf(4)",
    "noether_search bf3 jet 2": (
        "from ktcomplex.bf import build_bf; from ktcomplex.koszul_tate import noether_search; "
        "noether_search(build_bf(3).complex, 2, 0)"),
    "regularity bf3 k=0 exhaustive": (
        "from ktcomplex.bf import build_bf; from ktcomplex.koszul_tate import regularity_probe; "
        "regularity_probe(build_bf(3).complex, 0, 2, 0, exhaustive=True)"),
}


def random_poly(rng, variables, terms=12, length=4):
    p = GradedPoly()
    for _ in range(terms):
        m = GradedPoly.constant(rng.randint(-5, 5) or 1)
        for _ in range(rng.randint(0, length)):
            m = m * GradedPoly.variable(rng.choice(variables))
        p = p + m
    return p


def kernel_cases(seed=0):
    rng = random.Random(seed)
    y, c = FieldSpec("y", 0), FieldSpec("c", 1, order=1)
    variables = [f.var((), jet) for f in (y, c) for jet in [(), (1,), (2,), (1, 1), (1, 2)]]
    p, q = random_poly(rng, variables), random_poly(rng, variables)
    mono = max(p.terms, key=lambda k: len(k[1]))[1]
    rows = [{i: rng.choice((-3, -2, -1, 1, 2, 3)) for i in rng.sample(range(60), 8)} for _ in range(80)]
    return {
        "merge_vars": lambda k: k.merge_vars(mono[: len(mono) // 2], mono[len(mono) // 2:]),
        "mul_terms": lambda k: k.mul_terms(p.terms, q.terms),
        "partial_terms": lambda k: k.partial_terms(p.terms, variables[1], True),
        "reduce_rows": lambda k: _echelon(k, rows),
    }


def _echelon(k, rows):
    pivots = {}
    for row in rows:
        r = k.reduce_row(dict(row), pivots)
        if r:
            pivots[min(r)] = r
    return pivots


def bench_kernels(repeat):
    backends = [("python", _pykernels)] + ([("cython", _kernels)] if _kernels else [])
    print(f"{'kernel':<20}" + "".join(f"{name:>14}" for name, _ in backends) + f"{'speedup':>10}")
    for name, case in kernel_cases().items():
        times = []
        for _, mod in backends:
            number = 200
            times.append(min(timeit.repeat(lambda: case(mod), number=number, repeat=repeat)) / number)
        row = f"{name:<20}" + "".join(f"{t * 1e6:>11.1f} us" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.2f}x"
        print(row)


def bench_end_to_end(repeat):
    print(f"\n{'workload':<32}{'python':>12}{'cython':>12}{'speedup':>10}")
    for name, code in WORKLOADS.items():
        times = []
        for pure in (True, False):
            env = dict(os.environ)
            if pure:
                env["KTCOMPLEX_PURE_PYTHON"] = "1"
            else:
                env.pop("KTCOMPLEX_PURE_PYTHON", None)
            stmt = (f"import time, ktcomplex.kernels as k; t=time.perf_counter(); {code}; "
                    "print(k.BACKEND, time.perf_counter()-t)")
            best = None
            for _ in range(repeat):
                out = subprocess.run([sys.executable, "-c", stmt], env=env, check=True,
                                     capture_output=True, text=True).stdout.split()
                backend, seconds = out[0], float(out[1])
                best = seconds if best is None else min(best, seconds)
            times.append((backend, best))
        (b0, t0), (b1, t1) = times
        note = "" if b1 == "cython" else "  (extension not built)"
        print(f"{name:<32}{t0:>10.3f} s{t1:>10.3f} s{t0 / t1:>9.2f}x{note}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--skip-end-to-end", action="store_true")
    args = parser.parse_args()
    if _kernels is None:
        print("compiled extension not available; only the Python kernels are timed")
    bench_kernels(args.repeat)
    if not args.skip_end_to_end:
        bench_end_to_end(args.repeat)


if __name__ == "__main__":
    main()
