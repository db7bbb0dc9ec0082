import logging
from dataclasses import dataclass

import numpy as np

from src.config import DEFAULT_SEED
from src.errors import LaplacianError, ZeroDiagonalError
from src.laplacian import GraphLaplacian
from src.utils import make_rng, numba_jit_if_available, spawn_rngs, uniform_vector

logger = logging.getLogger(__name__)


@numba_jit_if_available()
def _gs_kernel(indptr, indices, weights, diag, x, b, sweeps):
    n = diag.shape[0]
    for _ in range(sweeps):
        for u in range(n):
            s = b[u]
            for k in range(indptr[u], indptr[u + 1]):
                s += weights[k] * x[indices[k]]
            x[u] = s / diag[u]


def check_diagonal(A: GraphLaplacian) -> None:
    zeros = np.flatnonzero(A.diag == 0.0)
    if zeros.size:
        raise ZeroDiagonalError(zeros[0])


def _check_vectors(A: GraphLaplacian, x: np.ndarray, b: np.ndarray) -> None:
    if not isinstance(x, np.ndarray) or x.dtype != np.float64:
        raise LaplacianError("Iterate must be a float64 numpy array (updated in place)")
    if x.shape != (A.n,) or b.shape != (A.n,):
        raise LaplacianError(f"Vector lengths {x.shape}, {b.shape} do not match n={A.n}")


def gs_sweeps(A: GraphLaplacian, x: np.ndarray, b: np.ndarray, count: int) -> None:
    """Apply `count` Gauss-Seidel sweeps to Ax = b in ascending node order, in place."""
    b = np.ascontiguousarray(b, dtype=np.float64)
    _check_vectors(A, x, b)
    check_diagonal(A)
    if count > 0:
        W = A.W
        _gs_kernel(W.indptr, W.indices, W.data, A.diag, x, b, count)


def gs_sweep(A: GraphLaplacian, x: np.ndarray, b: np.ndarray) -> None:
    gs_sweeps(A, x, b, 1)


def estimate_relaxation_acf(A: GraphLaplacian, sweeps: int = 15, seed: int = DEFAULT_SEED) -> float:
    """Asymptotic convergence factor of GS solve iterations on Ax = 0.

    Each iteration is a sweep followed by subtracting the mean; the factor is
    the norm ratio of the last two iterates.
    """
    n = A.n
    if n <= 2:
        return 0.0
    check_diagonal(A)
    W = A.W
    b = np.zeros(n)
    x = uniform_vector(make_rng(seed), n)
    previous = 0.0
    for _ in range(sweeps):
        previous = float(np.linalg.norm(x))
        _gs_kernel(W.indptr, W.indices, W.data, A.diag, x, b, 1)
        x -= x.mean()
    if previous == 0.0:
        return 0.0
    return float(np.linalg.norm(x) / previous)


@dataclass
class TestVectorSet:
    """K relaxed vectors, stored as the columns of an n x K matrix."""
    __test__ = False

    X: np.ndarray
    nu: int

    @property
    def K(self) -> int:
        return self.X.shape[1]


def initial_test_vectors(n: int, K: int, seed: int) -> np.ndarray:
    """Random [-1, 1] starting columns, one independent stream per column."""
    X = np.empty((n, K))
    for k, rng in enumerate(spawn_rngs(seed, K)):
        X[:, k] = uniform_vector(rng, n)
    return X


def generate_test_vectors(A: GraphLaplacian, K: int, nu: int, seed: int = DEFAULT_SEED) -> TestVectorSet:
    if K < 1 or nu < 0:
        raise LaplacianError(f"Need K >= 1 and nu >= 0, got K={K}, nu={nu}")
    X = initial_test_vectors(A.n, K, seed)
    if nu > 0:
        check_diagonal(A)
        W = A.W
        b = np.zeros(A.n)
        for k in range(K):
            column = np.ascontiguousarray(X[:, k])
            _gs_kernel(W.indptr, W.indices, W.data, A.diag, column, b, nu)
            X[:, k] = column
    return TestVectorSet(X=X, nu=nu)
