import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np
import scipy.io
import scipy.sparse as sp

from src.errors import EdgeListError, LaplacianError, MatrixMarketError
from src.utils import make_rng, uniform_vector

logger = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-10


@dataclass(frozen=True)
class EdgeList:
    """Undirected weighted edges (u, v, w) over nodes 0..n-1."""
    n: int
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    @classmethod
    def from_tuples(cls, n: int, edges: Iterable[Sequence[float]]) -> 'EdgeList':
        rows = list(edges)
        if not rows:
            empty = np.zeros(0, dtype=np.int64)
            return cls(n, empty, empty.copy(), np.zeros(0))
        arr = np.asarray(rows, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise EdgeListError("Edges must be (u, v, w) triples")
        return cls(n, arr[:, 0].astype(np.int64), arr[:, 1].astype(np.int64), arr[:, 2].copy())

    def __len__(self) -> int:
        return len(self.w)

    def as_tuples(self) -> list:
        return [(int(a), int(b), float(c)) for a, b, c in zip(self.u, self.v, self.w)]


@dataclass(frozen=True, eq=False)
class GraphLaplacian:
    """A = D - W for a symmetric weight matrix W with zero diagonal.

    Weights may be negative; a_uv = -w_uv and a_uu = sum_v w_uv, so every
    row of A sums to zero.
    """
    W: sp.csr_matrix
    A: sp.csr_matrix
    diag: np.ndarray = field(repr=False)

    @classmethod
    def from_weights(cls, W) -> 'GraphLaplacian':
        W = sp.csr_matrix(W, dtype=np.float64)
        if W.shape[0] != W.shape[1]:
            raise LaplacianError(f"Weight matrix must be square, got {W.shape}")
        W = W - sp.diags(W.diagonal())
        W = ((W + W.T) * 0.5).tocsr()
        W.eliminate_zeros()
        W.sort_indices()
        diag = np.asarray(W.sum(axis=1)).ravel()
        A = (sp.diags(diag) - W).tocsr()
        A.eliminate_zeros()
        A.sort_indices()
        return cls(W=W, A=A, diag=diag)

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def m(self) -> int:
        return self.W.nnz // 2

    @property
    def degree(self) -> np.ndarray:
        return np.diff(self.W.indptr)

    @property
    def zero_degree_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.degree == 0)

    def edges(self) -> EdgeList:
        upper = sp.triu(self.W, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return EdgeList(self.n, upper.row[order].astype(np.int64), upper.col[order].astype(np.int64),
                        upper.data[order].copy())

    def row_sum_defect(self) -> float:
        """max_u |sum_v a_uv| relative to the largest absolute row sum."""
        if self.n == 0:
            return 0.0
        sums = np.abs(np.asarray(self.A.sum(axis=1)).ravel())
        scale = np.asarray(abs(self.A).sum(axis=1)).ravel().max()
        return float(sums.max() / scale) if scale > 0 else 0.0

    def todense(self) -> np.ndarray:
        return self.A.toarray()


def build_laplacian(edges: EdgeList) -> GraphLaplacian:
    n = int(edges.n)
    if n < 1:
        raise EdgeListError(f"Node count must be positive, got {n}")
    u = np.asarray(edges.u, dtype=np.int64)
    v = np.asarray(edges.v, dtype=np.int64)
    w = np.asarray(edges.w, dtype=np.float64)
    if not (len(u) == len(v) == len(w)):
        raise EdgeListError("Edge arrays have different lengths")

    bad = np.flatnonzero((u < 0) | (u >= n) | (v < 0) | (v >= n))
    if bad.size:
        k = bad[0]
        raise EdgeListError(f"Edge ({u[k]}, {v[k]}) out of range for n={n}")
    loops = np.flatnonzero(u == v)
    if loops.size:
        raise EdgeListError(f"Self-edge at node {u[loops[0]]}")
    zeros = np.flatnonzero(w == 0)
    if zeros.size:
        k = zeros[0]
        raise EdgeListError(f"Zero weight on edge ({u[k]}, {v[k]})")

    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    keys = lo * n + hi
    uniq, counts = np.unique(keys, return_counts=True)
    if np.any(counts > 1):
        key = uniq[np.argmax(counts > 1)]
        raise EdgeListError(f"Duplicate edge ({key // n}, {key % n})")

    upper = sp.coo_matrix((w, (lo, hi)), shape=(n, n))
    return GraphLaplacian.from_weights(upper + upper.T)


def energy(A: GraphLaplacian, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.n,):
        raise LaplacianError(f"Vector length {x.shape} does not match n={A.n}")
    return float(x @ (A.A @ x))


def check_semidefinite(A: GraphLaplacian, trials: int = 8, seed: int = 0) -> bool:
    """Probabilistic semi-definiteness test on random vectors."""
    rng = make_rng(seed)
    scale = float(np.abs(A.diag).max()) if A.n else 0.0
    for trial in range(trials):
        x = uniform_vector(rng, A.n)
        e = energy(A, x)
        if e < -1e-10 * max(scale, 1.0) * float(x @ x):
            logger.warning(f"Negative energy {e:.3e} on random trial {trial}: matrix is not semi-definite")
            return False
    return True


def load_matrix_market(path: Union[str, Path], mode: str = 'adjacency') -> GraphLaplacian:
    """Read a coordinate Matrix Market file as a graph (adjacency) or as a Laplacian."""
    if mode not in ('adjacency', 'laplacian'):
        raise MatrixMarketError(f"Unknown ingestion mode '{mode}'")
    path = Path(path)
    try:
        rows, cols, _, fmt, data_field, symmetry = scipy.io.mminfo(str(path))
    except Exception as e:
        raise MatrixMarketError(f"Cannot parse Matrix Market header of {path}: {e}") from e
    if fmt != 'coordinate':
        raise MatrixMarketError(f"{path}: only coordinate format is supported, got '{fmt}'")
    if data_field not in ('real', 'pattern', 'integer'):
        raise MatrixMarketError(f"{path}: unsupported field '{data_field}'")
    if rows != cols:
        raise MatrixMarketError(f"{path}: matrix is not square ({rows}x{cols})")
    try:
        M = sp.csr_matrix(scipy.io.mmread(str(path)), dtype=np.float64)
    except Exception as e:
        raise MatrixMarketError(f"Cannot read {path}: {e}") from e
    # Duplicate coordinates are summed by the CSR conversion
    M.sum_duplicates()
    logger.info(f"Loaded {path.name}: n={rows}, nnz={M.nnz}, symmetry={symmetry}, mode={mode}")

    if mode == 'adjacency':
        S = ((M + M.T) * 0.5).tocsr()
        S = S - sp.diags(S.diagonal())
        upper = sp.triu(S, k=1).tocoo()
        keep = upper.data != 0
        return build_laplacian(EdgeList(rows, upper.row[keep].astype(np.int64),
                                        upper.col[keep].astype(np.int64), upper.data[keep]))

    scale = float(abs(M).max()) if M.nnz else 0.0
    asym = abs(M - M.T)
    if asym.nnz and asym.max() > 1e-10 * scale:
        raise MatrixMarketError(f"{path}: matrix is not symmetric (max |a_uv - a_vu| = {asym.max():.3e})")
    sums = np.abs(np.asarray(M.sum(axis=1)).ravel())
    row_scale = np.asarray(abs(M).sum(axis=1)).ravel()
    bad = np.flatnonzero(sums > ROW_SUM_TOLERANCE * row_scale)
    if bad.size:
        raise MatrixMarketError(f"{path}: row {bad[0]} does not sum to zero ({sums[bad[0]]:.3e})")
    return GraphLaplacian.from_weights(-(M - sp.diags(M.diagonal())))

