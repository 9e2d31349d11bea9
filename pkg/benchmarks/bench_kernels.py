"""Numba vs numpy timings for the hot kernels.

    python3 benchmarks/bench_kernels.py [--level 4] [--repeat 5]

Both variants are called directly from ``annulab.kernels``, so the env flag
does not matter here.  Each jit kernel is called once before timing to
exclude compilation.  Results of the two paths are compared as well.
"""
import argparse
import time

import numpy as np

from annulab import kernels
from annulab._accel import HAS_NUMBA
from annulab.fem import _areas, midpoints
from annulab.geometry import AnnulusSpec, SpaceForm, conformal_factor
from annulab.mesh import build_annulus_mesh


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        tic = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - tic)
    return best


def max_diff(a, b):
    if isinstance(a, tuple):
        return max(max_diff(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--level", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAS_NUMBA:
        print("numba disabled or missing: the *_jit kernels are plain python, timings will be slow")

    spec = AnnulusSpec(SpaceForm.SPHERICAL, 0.3, 1.0, 0.35)
    mesh = build_annulus_mesh(spec, args.level)
    x = np.ascontiguousarray(mesh.nodes[:, 0])
    y = np.ascontiguousarray(mesh.nodes[:, 1])
    tris = np.ascontiguousarray(mesh.triangles)
    area = _areas(mesh)
    mid = midpoints(mesh)
    w = np.ascontiguousarray(conformal_factor(spec.geom, mid.reshape(-1, 2)).reshape(-1, 3) ** 2)

    cases = [
        ("stiffness_local", kernels.stiffness_local_np, kernels.stiffness_local_jit, (x, y, tris)),
        ("mass_local", kernels.mass_local_np, kernels.mass_local_jit, (area, w)),
        ("load_local", kernels.load_local_np, kernels.load_local_jit, (area, w)),
        ("shoot (10k steps)", kernels.shoot_np, kernels.shoot_jit, (19.0, 0.3, 1.0, 10_000, 1)),
    ]
    print(f"level {args.level}: {mesh.n_nodes} nodes, {mesh.n_triangles} triangles; best of {args.repeat}")
    print(f"{'kernel':<20}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'max |diff|':>13}")
    for name, f_np, f_jit, fargs in cases:
        f_jit(*fargs)  # compile
        t_np = best_of(lambda: f_np(*fargs), args.repeat)
        t_jit = best_of(lambda: f_jit(*fargs), args.repeat)
        diff = max_diff(f_np(*fargs), f_jit(*fargs))
        print(f"{name:<20}{1e3 * t_np:>12.3f}{1e3 * t_jit:>12.3f}{t_np / t_jit:>10.1f}{diff:>13.2e}")


if __name__ == "__main__":
    main()
