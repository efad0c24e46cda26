"""Compare the compiled and pure-Python kernels on campaign-sized inputs.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import importlib
import timeit

import numpy as np

from a2gchan import _kernels_py
from a2gchan.geodesy import geodetic_to_ecef_arrays
from a2gchan.patterns import builtin_pattern


def inputs(n: int, rng: np.random.Generator) -> dict:
    pat = builtin_pattern("omni-on-uav")
    xyz = geodetic_to_ecef_arrays(rng.uniform(-80, 80, n), rng.uniform(-180, 180, n), rng.uniform(0, 500, n))
    t = np.arange(n) / 9.0
    return {
        "bilinear_periodic": (pat.azimuth_grid_deg, pat.elevation_grid_deg, pat.gain_dbi,
                              rng.uniform(0, 360, n), rng.uniform(-90, 90, n)),
        "ecef_to_geodetic": (xyz[:, 0], xyz[:, 1], xyz[:, 2]),
        "moving_median": (t, rng.exponential(1.0, n), 0.5),
    }


def cases(n: int):
    # single-point calls dominate geodesy (centroids, waypoints); batches dominate alignment
    for size in (1, n):
        for name, call_args in inputs(size, np.random.default_rng(0)).items():
            yield size, name, call_args


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=5000, help="points per call (a 9 Hz flight of ~9 min)")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    try:
        compiled = importlib.import_module("a2gchan._kernels_c")
    except ImportError:
        print("compiled extension not built; only the Python kernels are available")
        compiled = None

    print(f"{'kernel':<20}{'n':>6}{'python ms':>12}{'cython ms':>12}{'speedup':>10}  max |diff|")
    for n, name, call_args in cases(args.n):
        py = getattr(_kernels_py, name)
        t_py = min(timeit.repeat(lambda: py(*call_args), number=20, repeat=args.repeat)) * 1e3 / 20
        if compiled is None:
            print(f"{name:<20}{n:6d}{t_py:12.3f}")
            continue
        c = getattr(compiled, name)
        t_c = min(timeit.repeat(lambda: c(*call_args), number=20, repeat=args.repeat)) * 1e3 / 20
        diff = max(float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) for a, b in
                   zip(np.atleast_2d(py(*call_args)), np.atleast_2d(c(*call_args))))
        print(f"{name:<20}{n:6d}{t_py:12.4f}{t_c:12.4f}{t_py / t_c:10.1f}  {diff:.1e}")


if __name__ == "__main__":
    main()
