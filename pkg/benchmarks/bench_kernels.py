"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--trunc 5] [--repeat 5]

Both backends are run on identical inputs and their outputs compared.
"""
import argparse
import os
import random
import subprocess
import sys
import time

from fglfans import _pykernels
from fglfans.fgl import fgl_sum, variables
from fglfans.lazard import build_lazard
from fglfans.pps import Domain, compatibility_equations
from fglfans.fan import Fan, resolve

try:
    from fglfans import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def series_inputs(trunc):
    ring = build_lazard(trunc)
    u, v, w = variables(ring, 3)
    f = fgl_sum(fgl_sum(u, v), w)
    return ring, f, f


def elimination_inputs(trunc):
    square = Fan.from_cones(3, [(1, 1, 1), (1, -1, 1), (-1, 1, 1), (-1, -1, 1)], [[0, 1, 2, 3]])
    fine = resolve(square)[-1].source
    eqs, _ = compatibility_equations(Domain(fine), build_lazard(trunc), 1, False)
    return eqs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trunc", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled kernels not built; only the pure-Python backend is available")
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])

    ring, f, g = series_inputs(args.trunc)
    results = {}
    print(f"series product, D={args.trunc}, {len(f.terms)} x {len(g.terms)} terms")
    for name, mod in backends:
        t, out = best_of(lambda: mod.mul_terms(f.terms, f.degree, g.terms, g.degree, ring.bound, ring.table),
                         args.repeat)
        results[name] = out
        print(f"  {name:7s} {t * 1e3:9.2f} ms")
    if len(results) == 2:
        print("  outputs agree:", results["python"] == results["cython"])

    eqs = elimination_inputs(min(args.trunc, 3))
    results = {}
    print(f"unit-pivot elimination, {len(eqs)} sparse rows")
    for name, mod in backends:
        t, out = best_of(lambda: mod.eliminate_unit_pivots([dict(r) for r in eqs]), args.repeat)
        results[name] = out
        print(f"  {name:7s} {t * 1e3:9.2f} ms")
    if len(results) == 2:
        print("  outputs agree:", results["python"] == results["cython"])

    rng = random.Random(0)
    size, count = 2000, 60
    vectors = [tuple(rng.choice((0, 0, 0, 1, -1, 2)) for _ in range(size)) for _ in range(count)]
    coeffs = [rng.randint(-5, 5) for _ in range(count)]
    results = {}
    print(f"integer linear combination, {count} vectors of length {size}")
    for name, mod in backends:
        t, out = best_of(lambda: mod.lincomb(coeffs, vectors, size), args.repeat)
        results[name] = out
        print(f"  {name:7s} {t * 1e3:9.2f} ms")
    if len(results) == 2:
        print("  outputs agree:", results["python"] == results["cython"])

    print("end to end: square cone, both resolution orders, d = 0..2, D = 3")
    script = ("from fglfans.cli import load_fan; from fglfans.lazard import build_lazard; "
              "from fglfans.descent import compute_via_resolution; f = load_fan('square_cone'); "
              "R = build_lazard(3); [compute_via_resolution(f, d, R, s) for s in ('min', 'max') for d in range(3)]")
    for name, env in (("python", {"FGLFANS_PURE_PYTHON": "1"}), ("default", {})):
        t = time.perf_counter()
        subprocess.run([sys.executable, "-c", script], check=True, env={**os.environ, **env})
        print(f"  {name:7s} {time.perf_counter() - t:9.2f} s")


if __name__ == "__main__":
    main()
