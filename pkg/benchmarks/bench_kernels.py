"""Time the compiled and numpy kernel backends on the same inputs.

    python benchmarks/bench_kernels.py --sizes 128 256 512 --repeat 5

Reports the best wall time per kernel and backend, the speedup, and the
max absolute difference between the two results.
"""
import argparse
import timeit

import numpy as np

from eocloak.geometry import make_named_shape
from eocloak.kernels import backend_module


def cases(n, n_targets):
    c = make_named_shape("kite", 1.0, n)
    rng = np.random.default_rng(0)
    far = 3.0 * np.column_stack([np.cos(rng.uniform(0, 2 * np.pi, n_targets)),
                                 np.sin(rng.uniform(0, 2 * np.pi, n_targets))])
    dens = np.cos(3 * c.t) * c.weights
    tgt = make_named_shape("flower", 2.0, n)
    return {
        "log_remainder": (c.points, c.speed, c.t),
        "np_adjoint": (c.points, c.normal, c.curvature, c.weights),
        "normal_derivative": (tgt.points, tgt.normal, c.points, c.weights),
        "potential_matrices": (far, c.points, c.weights),
        "potential_apply": (far, c.points, dens),
    }


def _flat(res):
    if isinstance(res, tuple):
        return np.concatenate([np.ravel(r) for r in res])
    return np.ravel(res)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", nargs="+", type=int, default=[128, 256, 512])
    ap.add_argument("--targets", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    try:
        fast = backend_module("cython")
    except ImportError:
        print("compiled extension not built; only the numpy backend is available")
        return 1
    slow = backend_module("python")
    print(f"{'kernel':<20}{'N':>6}{'python ms':>12}{'cython ms':>12}{'speedup':>9}{'max diff':>11}")
    for n in args.sizes:
        for name, inputs in cases(n, args.targets).items():
            f_py, f_cy = getattr(slow, name), getattr(fast, name)
            t_py = min(timeit.repeat(lambda: f_py(*inputs), number=1, repeat=args.repeat))
            t_cy = min(timeit.repeat(lambda: f_cy(*inputs), number=1, repeat=args.repeat))
            diff = float(np.abs(_flat(f_py(*inputs)) - _flat(f_cy(*inputs))).max())
            print(f"{name:<20}{n:>6}{1e3 * t_py:>12.2f}{1e3 * t_cy:>12.2f}{t_py / t_cy:>9.1f}{diff:>11.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
