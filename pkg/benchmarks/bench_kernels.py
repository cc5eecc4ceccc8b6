"""Time the compiled and pure-Python kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from mkdv_longtime import kernels
from mkdv_longtime.scattering import midpoint_values
from mkdv_longtime.special import airy_ai, airy_ai_prime


def jost_case():
    dx = 0.01
    x = np.arange(-30.0, 30.0 + dx / 2, dx)
    u = 0.3 / np.cosh(x)
    z = np.linspace(-5, 5, 2001)
    return (u, midpoint_values(u), x[0], dx, z)


def painleve_case():
    rho = 0.5
    return (rho * airy_ai(8.0), rho * airy_ai_prime(8.0), 8.0, 1e-3, 20000, 1e-13, 1e-16, 1e3)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernels.available_backends()
    jc, pc = jost_case(), painleve_case()
    results = {}
    for name in sorted(backends):
        tj, (p, q) = best_of(lambda: kernels.jost_sweep(*jc, backend=name), args.repeat)
        # the pure-Python Painleve march is slow; one pass is enough there
        rep = args.repeat if name == "compiled" else 1
        tp, (P, _, _, _) = best_of(lambda: kernels.painleve_march(*pc, backend=name), rep)
        results[name] = (tj, tp, p, P)
        print(f"{name:9s} jost_sweep {tj:8.3f} s   painleve_march {tp:8.3f} s")
    if len(results) == 2:
        c, py = results["compiled"], results["python"]
        print(f"speedup   jost_sweep {py[0] / c[0]:7.1f}x   painleve_march {py[1] / c[1]:7.1f}x")
        print(f"max |diff| jost {np.max(np.abs(c[2] - py[2])):.2e}   painleve {np.max(np.abs(c[3] - py[3])):.2e}")


if __name__ == "__main__":
    main()
