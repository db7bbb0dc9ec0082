import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from src.grids import generate_grid, generate_random_graph  # noqa: E402
from src.laplacian import EdgeList, build_laplacian  # noqa: E402


def dense_laplacian(n, edges):
    """Reference D - W built entry by entry."""
    A = np.zeros((n, n))
    for u, v, w in edges:
        A[u, v] -= w
        A[v, u] -= w
        A[u, u] += w
        A[v, v] += w
    return A


def pseudo_inverse_solution(A, b, labels):
    """Minimum-norm solution per component, i.e. zero component sums."""
    x = np.linalg.pinv(A) @ b
    for c in np.unique(labels):
        mask = labels == c
        x[mask] -= x[mask].mean()
    return x


@pytest.fixture
def triangle():
    return build_laplacian(EdgeList.from_tuples(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)]))


@pytest.fixture
def grid_8x8():
    return generate_grid('fivepoint', 8, 8)


@pytest.fixture
def grid_32x32():
    return generate_grid('fivepoint', 32, 32)


@pytest.fixture
def three_blocks():
    return generate_random_graph('components', 600, seed=3, blocks=3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
