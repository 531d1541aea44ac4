"""Time the numba and numpy versions of each hot kernel on identical inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends are called explicitly, so the QRLIMITS_DISABLE_NUMBA flag does
not matter here. The first numba call per kernel (compilation or cache load)
is excluded from the timings.
"""
import argparse
import math
import time

import numpy as np

from qrlimits import _kgraph, _pkernels
from qrlimits._accel import HAVE_NUMBA
from qrlimits.capacity import IN_A, IN_C, CondenserGrid
from qrlimits.metrics import _BallFermi


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def capacity_case(n, cells):
    grid = CondenserGrid.ring(n, 1 / math.e, 1.0, cells)
    offs, pos, cube = _pkernels.simplex_tables(grid.dims)
    free, ptr = _pkernels.colour_order(grid.cls, IN_A)
    corners = _pkernels.cube_corners(grid.dims)
    u0 = (grid.cls == IN_C).astype(float).reshape(-1)

    def run(backend):
        u = u0.copy()
        _pkernels.sweep(u, free, ptr, offs, pos, n, 1.5, backend)
        return _pkernels.energy(u, corners, cube, n, backend)

    return f"capacity sweep+energy n={n} nodes={u0.size}", run


def kgraph_case():
    frame = _BallFermi(np.array([0.1, -0.7]), np.array([0.6, 0.55]))
    m, w = 256, 13
    taus = np.linspace(0, frame.length, m + 1)
    offsets = np.tile(np.linspace(-0.3, 0.3, w), (m + 1, 1))
    nodes = frame.nodes(taus, offsets)

    def run(backend):
        wts = _kgraph.ball_edge_weights(nodes, False, backend)
        return _kgraph.layered_min_path(wts, backend)[0]

    return f"k-graph weights+path layers={m + 1} width={w}", run


def pairwise_case():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(3000, 3))
    pts *= (rng.random(3000) ** (1 / 3) * 0.99 / np.linalg.norm(pts, axis=1))[:, None]

    def run(backend):
        return _kgraph.pairwise_max(pts, 0, backend)

    return "pairwise rho max points=3000 n=3", run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    cases = [capacity_case(2, 128), capacity_case(3, 32), kgraph_case(), pairwise_case()]
    print(f"{'kernel':48s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s}  agree")
    for name, run in cases:
        ref = run("numpy")
        t_np = best_of(lambda: run("numpy"), args.repeat)
        if HAVE_NUMBA:
            got = run("numba")
            t_nb = best_of(lambda: run("numba"), args.repeat)
            agree = math.isclose(ref, got, rel_tol=1e-9, abs_tol=1e-12)
            print(f"{name:48s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f}  {agree}")
        else:
            print(f"{name:48s} {t_np:10.4f} {'n/a':>10s} {'':>8s}  -")


if __name__ == "__main__":
    main()
