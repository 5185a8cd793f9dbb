"""Benchmark the compiled quadrature kernels against the NumPy fallback.

These kernels sit inside every nonlinear residual, tangent and functional
evaluation, so they run thousands of times per multistart solve or sweep.
The benchmark times the three kernels individually and a composite "one
Newton assembly" (gather + load scatter + tangent values) per mesh.

Usage:
    python benchmarks/bench_kernels.py [--repeats 200]
"""

import argparse
import time

import numpy as np

from kirchfem._kernels import _fallback
from kirchfem.fem import assemble, build_interval_mesh, build_rect_mesh

try:
    from kirchfem._kernels import _core
except ImportError:
    _core = None

MESHES = [
    ("interval n=64", lambda: build_interval_mesh(64, 1.0)),
    ("interval n=1024", lambda: build_interval_mesh(1024, 1.0)),
    ("rectangle 32x32", lambda: build_rect_mesh(32, 32, 1.0, 1.0)),
    ("rectangle 128x128", lambda: build_rect_mesh(128, 128, 1.0, 1.0)),
]


def time_fn(fn, repeats):
    best = np.inf
    for _ in range(5):  # five timing blocks, best-of to suppress jitter
        start = time.perf_counter()
        for _ in range(repeats):
            fn()
        best = min(best, (time.perf_counter() - start) / repeats)
    return best


def bench_mesh(name, mesh, repeats):
    ops = assemble(mesh)
    rng = np.random.default_rng(0)
    u_full = rng.standard_normal(mesh.n_nodes)
    fq = rng.standard_normal(ops.qweights.shape)
    conn, phi, wq = ops.conn, ops.phi, ops.qweights
    backends = [("numpy", _fallback)] + ([("compiled", _core)] if _core else [])

    kernels = {
        "gather": lambda impl: impl.interp_at_qp(u_full, conn, phi),
        "load": lambda impl: impl.scatter_load(conn, phi, wq, fq, mesh.n_nodes),
        "tangent": lambda impl: impl.tangent_element_values(phi, wq, fq),
    }
    kernels["assembly"] = lambda impl: (
        kernels["gather"](impl),
        kernels["load"](impl),
        kernels["tangent"](impl),
    )

    print(f"\n{name}  ({mesh.n_elements} elements, {mesh.n_interior} interior nodes)")
    header = f"  {'kernel':10}" + "".join(f"{label:>14}" for label, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for kname, call in kernels.items():
        times = [time_fn(lambda impl=impl: call(impl), repeats) for _, impl in backends]
        row = f"  {kname:10}" + "".join(f"{t * 1e6:>12.1f}us" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.2f}x"
        print(row)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=200, help="calls per timing block")
    args = parser.parse_args()
    if _core is None:
        print("compiled extension not available; timing the NumPy fallback only")
    for name, factory in MESHES:
        bench_mesh(name, factory(), args.repeats)


if __name__ == "__main__":
    main()
