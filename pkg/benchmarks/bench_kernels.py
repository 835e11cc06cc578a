"""Compare the numba and numpy float kernels.

    python benchmarks/bench_kernels.py [--steps 5000] [--points 20000] [--repeat 3]

Times one RK4 trajectory, a batch evaluation of a degree-12 first integral,
and a batch of trajectories, on the shipped planar system.  Both backends
must agree to within a few ulps; the script prints the largest difference.
"""

import argparse
import pathlib
import time

import numpy as np

from firstint import dynlab
from firstint.integralforge import build_first_integral
from firstint.sysfile import parse_system

ROOT = pathlib.Path(__file__).resolve().parents[1]


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=5000)
    ap.add_argument("--points", type=int, default=20000)
    ap.add_argument("--batch", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    sf = parse_system((ROOT / "systems" / "planar.sys").read_text())
    vf = sf.vector_field(12)
    H = build_first_integral(vf, 12).H
    ff = dynlab.FloatField.from_vector_field(vf, radius=1.0)
    x0 = np.array([0.07, 0.07])
    rng = np.random.default_rng(0)
    X = rng.uniform(-0.1, 0.1, size=(args.points, 2))
    X0 = rng.uniform(-0.05, 0.05, size=(args.batch, 2))
    h = 1e-3

    cases = {
        "rk4 trajectory": lambda: dynlab.integrate(ff, x0, args.steps * h, h).states,
        "H at points": lambda: dynlab.eval_series(H, X),
        "rk4 batch": lambda: dynlab.integrate_batch(ff, X0, args.steps * h, h),
    }
    results = {}
    for backend in ("numba", "numpy"):
        dynlab.set_backend(backend)
        for name, fn in cases.items():
            fn()  # compile / warm up
            results[backend, name] = best_of(fn, args.repeat)

    print(f"{'kernel':<16} {'numba s':>10} {'numpy s':>10} {'speedup':>8} {'max |diff|':>11}")
    for name in cases:
        tn, a = results["numba", name]
        tp, b = results["numpy", name]
        print(f"{name:<16} {tn:10.4f} {tp:10.4f} {tp / tn:8.1f} {np.max(np.abs(a - b)):11.2e}")


if __name__ == "__main__":
    main()
