import numpy as np
import pytest

from kirchfem.fem import FeFunction, assemble, build_interval_mesh, build_rect_mesh


@pytest.fixture(scope="session")
def ops_1d_16():
    return assemble(build_interval_mesh(16, 1.0))


@pytest.fixture(scope="session")
def ops_1d_64():
    return assemble(build_interval_mesh(64, 1.0))


@pytest.fixture(scope="session")
def ops_2d_16():
    return assemble(build_rect_mesh(16, 16, 1.0, 1.0))


def random_function(ops, rng, scale=1.0):
    return FeFunction(ops.mesh, scale * rng.standard_normal(ops.mesh.n_interior))


def simpson_oracle(fn, a, b, n=20001):
    """Independent fine-grid Simpson quadrature for test oracles."""
    if n % 2 == 0:
        n += 1
    xs = np.linspace(a, b, n)
    ys = np.asarray(fn(xs), dtype=float)
    h = (b - a) / (n - 1)
    return h / 3.0 * (ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum() + 2.0 * ys[2:-1:2].sum())
