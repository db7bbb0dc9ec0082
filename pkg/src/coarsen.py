import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from src.agg import AggregateAssignment
from src.errors import LaplacianError
from src.laplacian import GraphLaplacian

logger = logging.getLogger(__name__)

DEFAULT_MU = 4.0 / 3.0


@dataclass(eq=False)
class AggTransfer:
    """Caliber-1 interpolation: fine node u takes the value of coarse node seed_of[u]."""
    seed_of: np.ndarray
    n_c: int
    sizes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.sizes = np.bincount(self.seed_of, minlength=self.n_c)

    @classmethod
    def from_assignment(cls, assignment: AggregateAssignment) -> 'AggTransfer':
        status = assignment.status
        roots = assignment.roots()
        index = np.full(len(status), -1, dtype=np.int64)
        index[roots] = np.arange(len(roots))
        seed_of = index.copy()
        associates = np.flatnonzero(status >= 0)
        seed_of[associates] = index[status[associates]]
        if np.any(seed_of < 0):
            raise LaplacianError("Aggregate assignment has an associate of a non-seed")
        return cls(seed_of=seed_of, n_c=len(roots))

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> 'AggTransfer':
        """Aggregates from arbitrary labels, renumbered by first occurrence order of their smallest node."""
        labels = np.asarray(labels)
        _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
        order = np.argsort(first)
        rank = np.empty_like(order)
        rank[order] = np.arange(len(order))
        return cls(seed_of=rank[inverse].astype(np.int64), n_c=len(order))

    @property
    def n_fine(self) -> int:
        return len(self.seed_of)

    @property
    def P(self) -> sp.csr_matrix:
        n = self.n_fine
        return sp.csr_matrix((np.ones(n), (np.arange(n), self.seed_of)), shape=(n, self.n_c))

    def average(self, x: np.ndarray) -> np.ndarray:
        return np.bincount(self.seed_of, weights=x, minlength=self.n_c) / self.sizes


def galerkin_coarsen(A: GraphLaplacian, t: AggTransfer) -> GraphLaplacian:
    """P^T A P; for unit-row-sum P only additions of fine weights are involved."""
    if t.n_fine != A.n:
        raise LaplacianError(f"Transfer size {t.n_fine} does not match n={A.n}")
    P = t.P
    return GraphLaplacian.from_weights(P.T @ A.W @ P)


def optimal_flat_mu(Q: float) -> float:
    if Q < 1.0:
        raise LaplacianError(f"Energy inflation factor must be >= 1, got {Q}")
    return 2.0 * Q / (Q + 1.0)


def agg_restrict(t: AggTransfer, mu: float, r: np.ndarray) -> np.ndarray:
    return mu * np.bincount(t.seed_of, weights=r, minlength=t.n_c)


def agg_correct(t: AggTransfer, x: np.ndarray, e_c: np.ndarray) -> None:
    if e_c.shape != (t.n_c,) or x.shape != (t.n_fine,):
        raise LaplacianError(f"Lengths {x.shape}, {e_c.shape} do not match transfer {t.n_fine}->{t.n_c}")
    x += e_c[t.seed_of]


def _nodal_form(W: sp.csr_matrix, u: int, x: np.ndarray, y: np.ndarray) -> float:
    start, end = W.indptr[u], W.indptr[u + 1]
    v = W.indices[start:end]
    w = W.data[start:end]
    return 0.5 * float(np.sum(w * (x[u] - x[v]) * (y[u] - y[v])))


def _aggregate_forms(A: GraphLaplacian, A_c: GraphLaplacian, t: AggTransfer, vectors, aggregate: int):
    members = np.flatnonzero(t.seed_of == aggregate)
    coarse = [t.average(x) for x in vectors]
    k = len(vectors)
    fine_form = np.zeros((k, k))
    coarse_form = np.zeros((k, k))
    for a in range(k):
        for b in range(k):
            fine_form[a, b] = sum(_nodal_form(A.W, u, vectors[a], vectors[b]) for u in members)
            coarse_form[a, b] = _nodal_form(A_c.W, aggregate, coarse[a], coarse[b])
    return coarse_form, fine_form


def local_energy_inflation(A: GraphLaplacian, t: AggTransfer, x: np.ndarray, aggregate: int) -> float:
    """Coarse nodal energy of the averaged x at one aggregate over the fine energies of its nodes."""
    A_c = galerkin_coarsen(A, t)
    coarse_form, fine_form = _aggregate_forms(A, A_c, t, [np.asarray(x, dtype=np.float64)], aggregate)
    if fine_form[0, 0] == 0.0:
        raise LaplacianError(f"Fine energy of aggregate {aggregate} vanishes")
    return float(coarse_form[0, 0] / fine_form[0, 0])


def worst_inflation(A: GraphLaplacian, t: AggTransfer, vectors: Sequence[np.ndarray], aggregate: int) -> float:
    """Largest inflation over the span of linearly independent vectors."""
    A_c = galerkin_coarsen(A, t)
    vectors = [np.asarray(x, dtype=np.float64) for x in vectors]
    coarse_form, fine_form = _aggregate_forms(A, A_c, t, vectors, aggregate)
    return float(scipy.linalg.eigh(coarse_form, fine_form, eigvals_only=True)[-1])
