"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Both backends are imported directly, so the HODGEBOUND_PURE_PYTHON switch
does not matter here.  Results are checked for agreement before timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hodgebound import _kernels_py, dec
from hodgebound.geometry import Ball
from hodgebound.meshgen import mesh2d, mesh3d_shell, rectangle_loop

try:
    from hodgebound import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--h", type=float, default=0.03)
    args = ap.parse_args()
    if compiled is None:
        raise SystemExit("compiled extension not available; run pip install -e . --no-build-isolation")

    mesh2 = mesh2d([rectangle_loop(0, 0, 1, 1)], args.h)
    mesh3 = mesh3d_shell(1.0, Ball(np.zeros(3), 2.0), 0.25)
    print(f"2D mesh: {mesh2.num(0)} vertices, {mesh2.num(2)} triangles")
    print(f"3D mesh: {mesh3.num(0)} vertices, {mesh3.num(3)} tetrahedra")
    print(f"{'kernel':<22} {'python [s]':>11} {'compiled [s]':>13} {'speedup':>8}")
    for mesh in (mesh2, mesh3):
        g, vol = dec.barycentric_gradients(mesh)
        G = np.ascontiguousarray(np.einsum("eik,ejk->eij", g, g))
        vol = np.ascontiguousarray(vol)
        for k in range(mesh.n + 1):
            a = _kernels_py.whitney_local(G, vol, k, mesh.n)
            b = np.asarray(compiled.whitney_local(G, vol, k, mesh.n))
            assert np.allclose(a, b, rtol=1e-10, atol=1e-14)
            tp = best_of(lambda: _kernels_py.whitney_local(G, vol, k, mesh.n), args.repeat)
            tc = best_of(lambda: compiled.whitney_local(G, vol, k, mesh.n), args.repeat)
            print(f"{f'whitney_local n={mesh.n} k={k}':<22} {tp:11.4f} {tc:13.4f} {tp / tc:8.1f}")
    D = dec.coboundary(mesh2, 0).tocsc()
    D.sort_indices()
    prime = 2**31 - 1
    args_r = (D.shape[0], D.indptr, D.indices, D.data.astype(np.int64), prime)
    assert _kernels_py.rank_mod_p(*args_r) == compiled.rank_mod_p(*args_r)
    tp = best_of(lambda: _kernels_py.rank_mod_p(*args_r), 1)
    tc = best_of(lambda: compiled.rank_mod_p(*args_r), args.repeat)
    print(f"{'rank_mod_p D_0':<22} {tp:11.4f} {tc:13.4f} {tp / tc:8.1f}")


if __name__ == "__main__":
    main()
