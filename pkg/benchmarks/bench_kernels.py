"""Compare the numba kernels with their pure-numpy / pure-Python counterparts.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each row times one kernel both ways after a warm-up call (so JIT compilation
is excluded) and checks that the two results agree.
"""
import argparse
import json
import timeit

import numpy as np

from lagchen import invariants, profile
from lagchen._accel import HAVE_NUMBA
from lagchen.invariants import CubicTensor, fibonacci_sphere


def _py(f):
    return getattr(f, "py_func", f)


def cases(rng):
    C = CubicTensor.from_raw(rng.normal(size=(3, 3, 3))).comp
    R = invariants.curvature_tensor(C, use_numba=False)
    normals = fibonacci_sphere(invariants.SPHERE_POINTS)
    ode_args = (0.0, 0.0, 0.5, 0.9, 1e-3, profile.LAM_THRESHOLD, profile.B_CAP, profile.MIN_STEP,
                profile.LOCAL_TOL, 20000)
    return [
        ("curvature_tensor", lambda: invariants._curvature_loops(C), lambda: invariants._curvature_numpy(C)),
        ("plane_curvatures[2000]", lambda: invariants._plane_curvatures_loops(R, normals),
         lambda: invariants._plane_curvatures_numpy(R, normals)),
        ("integrate t=0..0.9", lambda: profile._integrate_kernel(*ode_args)[2],
         lambda: _py(profile._integrate_kernel)(*ode_args)[2]),
    ]


def best_of(fn, repeat):
    n, _ = timeit.Timer(fn).autorange()
    return min(timeit.repeat(fn, number=n, repeat=repeat)) / n


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)

    if not HAVE_NUMBA:
        print("numba disabled or missing: both columns run the fallback path")
    rows = []
    for name, fast, slow in cases(np.random.default_rng(0)):
        a, b = np.asarray(fast()), np.asarray(slow())
        diff = float(np.max(np.abs(a - b))) if a.shape == b.shape else float("nan")
        tf, ts = best_of(fast, args.repeat), best_of(slow, args.repeat)
        rows.append({"kernel": name, "numba_s": tf, "fallback_s": ts, "speedup": ts / tf, "max_abs_diff": diff})

    print(f"{'kernel':24s} {'numba':>12s} {'fallback':>12s} {'speedup':>9s} {'max diff':>10s}")
    for r in rows:
        print(f"{r['kernel']:24s} {r['numba_s'] * 1e6:10.1f}us {r['fallback_s'] * 1e6:10.1f}us "
              f"{r['speedup']:8.1f}x {r['max_abs_diff']:10.1e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=1)


if __name__ == "__main__":
    main()
