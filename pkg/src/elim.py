"""
Exact elimination of disconnected and low-degree nodes.

Each stage splits the current nodes into Z (degree 0), F (an independent set
of nodes with degree 1..4) and C (the rest) and replaces the system by its
Schur complement on C. Stages are lumped into x = P x_c + Q b and b_c = P^T b.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from src.errors import LaplacianError
from src.laplacian import GraphLaplacian
from src.utils import numba_jit_if_available

logger = logging.getLogger(__name__)

MAX_ELIM_DEGREE = 4
MIN_STAGE_FRACTION = 0.01
PIVOT_TOLERANCE = 0.1

NOT_VISITED = 0
ELIMINATED = 1
NOT_ELIMINATED = 2


@numba_jit_if_available()
def _low_degree_kernel(indptr, indices, max_degree):
    n = indptr.shape[0] - 1
    state = np.zeros(n, dtype=np.int8)
    for u in range(n):
        if state[u] != 0:
            continue
        d = indptr[u + 1] - indptr[u]
        if d >= 1 and d <= max_degree:
            state[u] = 1
            for k in range(indptr[u], indptr[u + 1]):
                state[indices[k]] = 2
    return state


@dataclass(frozen=True, eq=False)
class EliminationStage:
    z_set: np.ndarray
    f_set: np.ndarray
    c_set: np.ndarray
    f_diag: np.ndarray
    f_rows: sp.csr_matrix  # A_FC, columns indexed by position in c_set

    @property
    def n(self) -> int:
        return len(self.z_set) + len(self.f_set) + len(self.c_set)


@dataclass(eq=False)
class ElimTransfer:
    stages: List[EliminationStage]
    P: sp.csr_matrix
    Q: sp.csr_matrix
    c_nodes: np.ndarray
    PT: sp.csr_matrix = field(init=False, repr=False)

    def __post_init__(self):
        self.PT = self.P.T.tocsr()

    @property
    def n_fine(self) -> int:
        return self.P.shape[0]

    @property
    def n_coarse(self) -> int:
        return self.P.shape[1]


def select_low_degree(A: GraphLaplacian, max_degree: int = MAX_ELIM_DEGREE) -> np.ndarray:
    """Independent set of nodes with 1 <= degree <= max_degree, greedy in ascending order."""
    if A.n == 0:
        return np.zeros(0, dtype=np.int64)
    state = _low_degree_kernel(A.W.indptr, A.W.indices, max_degree)
    return np.flatnonzero(state == ELIMINATED)


def _eliminate_stage(A: GraphLaplacian, z: np.ndarray, f: np.ndarray) -> Tuple[EliminationStage, sp.csr_matrix,
                                                                                 sp.csr_matrix, GraphLaplacian]:
    n = A.n
    keep = np.ones(n, dtype=bool)
    keep[z] = False
    keep[f] = False
    c = np.flatnonzero(keep)
    n_c = len(c)

    W = A.W
    W_FC = W[f][:, c].tocsr()
    f_diag = A.diag[f]
    inv_diag = 1.0 / f_diag

    # x_F = D_F^{-1} (b_F + W_FC x_C), x_Z = 0, x_C = x_c
    coo_F = W_FC.tocoo()
    coo_F = sp.coo_matrix((coo_F.data * inv_diag[coo_F.row], (coo_F.row, coo_F.col)), shape=W_FC.shape)
    interp_F = coo_F.tocsr()
    rows = np.concatenate([c, f[coo_F.row]])
    cols = np.concatenate([np.arange(n_c), coo_F.col])
    vals = np.concatenate([np.ones(n_c), coo_F.data])
    P_i = sp.csr_matrix((vals, (rows, cols)), shape=(n, n_c))
    Q_i = sp.csr_matrix((inv_diag, (f, f)), shape=(n, n))

    W_CC = W[c][:, c]
    W_next = W_CC + W_FC.T @ interp_F
    coarse = GraphLaplacian.from_weights(W_next)

    stage = EliminationStage(z_set=z, f_set=f, c_set=c, f_diag=f_diag, f_rows=(-W_FC).tocsr())
    return stage, P_i, Q_i, coarse


def eliminate(A: GraphLaplacian, max_stages: Optional[int] = None,
              max_degree: int = MAX_ELIM_DEGREE) -> Tuple[GraphLaplacian, ElimTransfer, bool]:
    """Eliminate zero-degree and low-degree nodes stage by stage.

    Returns the final Schur complement, the lumped transfer and whether any
    stage ran.
    """
    n = A.n
    P = sp.identity(n, format='csr')
    Q = sp.csr_matrix((n, n))
    c_nodes = np.arange(n)
    stages: List[EliminationStage] = []
    current = A

    while current.n > 1 and (max_stages is None or len(stages) < max_stages):
        z = current.zero_degree_nodes
        f = select_low_degree(current, max_degree)
        # F pivots must not come from cancelling signed weights
        if f.size:
            spread = np.asarray(abs(current.W[f]).sum(axis=1)).ravel()
            f = f[current.diag[f] > PIVOT_TOLERANCE * spread]
        if z.size == 0 and f.size < MIN_STAGE_FRACTION * current.n:
            break
        if z.size == 0 and f.size == 0:
            break
        stage, P_i, Q_i, coarse = _eliminate_stage(current, z, f)
        Q = (Q + P @ Q_i @ P.T).tocsr()
        P = (P @ P_i).tocsr()
        c_nodes = c_nodes[stage.c_set]
        stages.append(stage)
        logger.debug(f"Elimination stage {len(stages)}: |Z|={len(z)}, |F|={len(f)}, n_c={coarse.n}, m_c={coarse.m}")
        current = coarse

    transfer = ElimTransfer(stages=stages, P=P, Q=Q, c_nodes=c_nodes)
    return current, transfer, bool(stages)


def elim_restrict(transfer: ElimTransfer, b: np.ndarray) -> np.ndarray:
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (transfer.n_fine,):
        raise LaplacianError(f"Right-hand side length {b.shape} does not match n={transfer.n_fine}")
    return transfer.PT @ b


def elim_correct(transfer: ElimTransfer, x_c: np.ndarray, b: np.ndarray) -> np.ndarray:
    x_c = np.asarray(x_c, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if x_c.shape != (transfer.n_coarse,) or b.shape != (transfer.n_fine,):
        raise LaplacianError(
            f"Lengths {x_c.shape}, {b.shape} do not match transfer {transfer.n_fine}->{transfer.n_coarse}"
        )
    return transfer.P @ x_c + transfer.Q @ b
