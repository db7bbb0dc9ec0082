"""
Affinity-based aggregation.

Status encoding: UNDECIDED (-1), SEED (-2), or s >= 0 for an associate of seed s.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Tuple, Union

import numpy as np

from src.laplacian import GraphLaplacian
from src.relax import TestVectorSet
from src.utils import numba_jit_if_available

logger = logging.getLogger(__name__)

UNDECIDED = -1
SEED = -2
NOT_FOUND = -1

ENERGY_RATIO_MAX = 2.5
DELTA_START = 0.9
DELTA_DECAY = 0.6
MAX_AGG_STAGES = 2
SEED_DEGREE_FACTOR = 8.0
FIT_TOLERANCE = 1e-14
MAX_ESCALATIONS = 3
RATIO_ESCALATION = 2.0


@numba_jit_if_available()
def _affinity_kernel(indptr, indices, X):
    n = X.shape[0]
    K = X.shape[1]
    norms = np.zeros(n)
    for u in range(n):
        s = 0.0
        for k in range(K):
            s += X[u, k] * X[u, k]
        norms[u] = s
    values = np.zeros(indices.shape[0])
    max_affinity = np.zeros(n)
    for u in range(n):
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            if norms[u] == 0.0 or norms[v] == 0.0:
                continue
            dot = 0.0
            for k in range(K):
                dot += X[u, k] * X[v, k]
            c = dot * dot / (norms[u] * norms[v])
            values[p] = c
            if c > max_affinity[u]:
                max_affinity[u] = c
    return values, max_affinity


@numba_jit_if_available()
def _nodal_terms(indptr, indices, weights, X, u, B, C):
    # E_u(x; y) = (a_uu y / 2 - B) y + C with B = sum w x_v, C = sum w x_v^2 / 2
    K = X.shape[1]
    for k in range(K):
        B[k] = 0.0
        C[k] = 0.0
    for p in range(indptr[u], indptr[u + 1]):
        v = indices[p]
        w = weights[p]
        for k in range(K):
            xv = X[v, k]
            B[k] += w * xv
            C[k] += 0.5 * w * xv * xv


@numba_jit_if_available()
def _max_energy_ratio(a, X, t, B, C, tolerance):
    K = X.shape[1]
    q = 0.0
    for k in range(K):
        y = X[t, k]
        e_t = (0.5 * a * y - B[k]) * y + C[k]
        fitted = B[k] / a
        e_fit = (0.5 * a * fitted - B[k]) * fitted + C[k]
        if e_fit <= tolerance * abs(e_t):
            continue
        r = e_t / e_fit
        if r > q:
            q = r
    return q


@numba_jit_if_available()
def _best_seed(indptr, indices, weights, diag, X, affinity, max_affinity, status, agg_size,
               u, delta, ratio_max, tolerance, B, C):
    a = diag[u]
    if a <= 0.0:
        return -1
    _nodal_terms(indptr, indices, weights, X, u, B, C)
    best = -1
    best_size = 0
    for p in range(indptr[u], indptr[u + 1]):
        t = indices[p]
        c = affinity[p]
        bound = max_affinity[u]
        if max_affinity[t] > bound:
            bound = max_affinity[t]
        if c <= 0.0 or c < delta * bound:
            continue
        if status[t] != -1 and status[t] != -2:
            continue
        if _max_energy_ratio(a, X, t, B, C, tolerance) > ratio_max:
            continue
        if best < 0 or agg_size[t] < best_size or (agg_size[t] == best_size and t < best):
            best = t
            best_size = agg_size[t]
    return best


@numba_jit_if_available()
def _stage_kernel(indptr, indices, weights, diag, X, affinity, max_affinity, status, agg_size,
                  delta, ratio_max, tolerance, n_c):
    n = diag.shape[0]
    K = X.shape[1]
    B = np.zeros(K)
    C = np.zeros(K)
    for u in range(n):
        # Nodes that became seeds or associates earlier in this sweep are skipped
        if status[u] != -1:
            continue
        s = _best_seed(indptr, indices, weights, diag, X, affinity, max_affinity, status, agg_size,
                       u, delta, ratio_max, tolerance, B, C)
        if s < 0:
            continue
        status[s] = -2
        status[u] = s
        n_c -= 1
        for k in range(K):
            X[u, k] = X[s, k]
        agg_size[s] += 1
        agg_size[u] = agg_size[s]
    return n_c


@dataclass(eq=False)
class AffinityMap:
    """Affinities aligned with the CSR structure of the weight matrix."""
    indptr: np.ndarray
    indices: np.ndarray
    values: np.ndarray
    max_affinity: np.ndarray

    def get(self, u: int, v: int) -> float:
        start, end = self.indptr[u], self.indptr[u + 1]
        hit = np.flatnonzero(self.indices[start:end] == v)
        return float(self.values[start + hit[0]]) if hit.size else 0.0


@dataclass(eq=False)
class AggregateAssignment:
    status: np.ndarray
    agg_size: np.ndarray
    n_c: int
    alpha: float = 1.0
    delta: float = 0.0
    ratio_cap: float = ENERGY_RATIO_MAX
    history: List[Tuple[float, float]] = field(default_factory=list)

    @classmethod
    def initial(cls, n: int) -> 'AggregateAssignment':
        return cls(status=np.full(n, UNDECIDED, dtype=np.int64), agg_size=np.ones(n, dtype=np.int64), n_c=n)

    @property
    def n(self) -> int:
        return len(self.status)

    def copy(self) -> 'AggregateAssignment':
        return AggregateAssignment(self.status.copy(), self.agg_size.copy(), self.n_c, self.alpha, self.delta,
                                   self.ratio_cap, list(self.history))

    def roots(self) -> np.ndarray:
        """Seeds and still-undecided nodes, i.e. the future coarse nodes, ascending."""
        return np.flatnonzero(self.status < 0)

    def is_legal(self) -> bool:
        associates = np.flatnonzero(self.status >= 0)
        if associates.size == 0:
            return self.n_c == self.n
        targets = self.status[associates]
        return bool(np.all(self.status[targets] == SEED)) and self.n_c == int(np.count_nonzero(self.status < 0))


def _matrix(X: Union[np.ndarray, TestVectorSet]) -> np.ndarray:
    return X.X if isinstance(X, TestVectorSet) else X


def affinity(x_u: np.ndarray, x_v: np.ndarray) -> float:
    """Affinity of two TV rows: squared cosine of the angle between them."""
    nu, nv = float(x_u @ x_u), float(x_v @ x_v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    d = float(x_u @ x_v)
    return d * d / (nu * nv)


def compute_affinities(A: GraphLaplacian, X: Union[np.ndarray, TestVectorSet]) -> AffinityMap:
    W = A.W
    values, max_affinity = _affinity_kernel(W.indptr, W.indices, np.ascontiguousarray(_matrix(X), dtype=np.float64))
    return AffinityMap(indptr=W.indptr, indices=W.indices, values=values, max_affinity=max_affinity)


def energy_ratios(A: GraphLaplacian, X: Union[np.ndarray, TestVectorSet], u: int, t: int) -> np.ndarray:
    """Per-TV ratio E_u(x; x_t) / E_u(x; fitted x_u); NaN where the fitted energy vanishes."""
    X = np.ascontiguousarray(_matrix(X), dtype=np.float64)
    W = A.W
    K = X.shape[1]
    B = np.zeros(K)
    C = np.zeros(K)
    _nodal_terms(W.indptr, W.indices, W.data, X, u, B, C)
    a = A.diag[u]
    y = X[t]
    e_t = (0.5 * a * y - B) * y + C
    fitted = B / a
    e_fit = (0.5 * a * fitted - B) * fitted + C
    out = np.full(K, np.nan)
    ok = e_fit > FIT_TOLERANCE * np.abs(e_t)
    out[ok] = e_t[ok] / e_fit[ok]
    return out


def best_seed(A: GraphLaplacian, X: Union[np.ndarray, TestVectorSet], assignment: AggregateAssignment,
              affinities: AffinityMap, u: int, delta: float,
              energy_ratio_max: float = ENERGY_RATIO_MAX) -> int:
    """Seed for undecided node u, or NOT_FOUND."""
    X = _matrix(X)
    W = A.W
    K = X.shape[1]
    return int(_best_seed(W.indptr, W.indices, W.data, A.diag, X, affinities.values, affinities.max_affinity,
                          assignment.status, assignment.agg_size, u, delta, energy_ratio_max, FIT_TOLERANCE,
                          np.zeros(K), np.zeros(K)))


def aggregation_stage(assignment: AggregateAssignment, A: GraphLaplacian, affinities: AffinityMap,
                      X: Union[np.ndarray, TestVectorSet], delta: float,
                      energy_ratio_max: float = ENERGY_RATIO_MAX) -> None:
    """One sweep over undecided nodes; updates the assignment and the TV rows of new associates in place."""
    X = _matrix(X)
    W = A.W
    assignment.n_c = int(_stage_kernel(W.indptr, W.indices, W.data, A.diag, X, affinities.values,
                                       affinities.max_affinity, assignment.status, assignment.agg_size,
                                       delta, energy_ratio_max, FIT_TOLERANCE, assignment.n_c))


def _stage_schedule(max_stages: int, delta: float, delta_decay: float, energy_ratio_max: float,
                    max_escalations: int, ratio_escalation: float) -> List[Tuple[float, float]]:
    """(delta, ratio cap) per stage: the guarded stages, then escalations that keep the last delta.

    The last escalation drops the ratio cap, i.e. falls back to affinity-only aggregation.
    """
    schedule = [(delta * delta_decay ** stage, energy_ratio_max) for stage in range(max_stages)]
    last_delta = schedule[-1][0] if schedule else delta
    for j in range(1, max_escalations + 1):
        cap = np.inf if j == max_escalations else energy_ratio_max * ratio_escalation ** j
        schedule.append((last_delta, cap))
    return schedule


def aggregate(A: GraphLaplacian, X: Union[np.ndarray, TestVectorSet], alpha_max: float,
              seed_degree_factor: float = SEED_DEGREE_FACTOR, max_stages: int = MAX_AGG_STAGES,
              delta: float = DELTA_START, delta_decay: float = DELTA_DECAY,
              energy_ratio_max: float = ENERGY_RATIO_MAX, max_escalations: int = MAX_ESCALATIONS,
              ratio_escalation: float = RATIO_ESCALATION) -> AggregateAssignment:
    """Multi-stage aggregation; returns the stage snapshot whose coarsening ratio scores best.

    Stage i uses delta * delta_decay**i and the energy-ratio cap. Stages continue
    while the ratio n_c / n stays at or above alpha_max; once the guarded stages
    are exhausted, up to max_escalations further stages raise the cap by
    ratio_escalation each, the last one without a cap. The score of a snapshot
    is 1 - alpha when alpha <= alpha_max and 1 + alpha otherwise.
    """
    n = A.n
    X = np.array(_matrix(X), dtype=np.float64, order='C')
    assignment = AggregateAssignment.initial(n)
    if n == 0:
        return assignment

    degree = A.degree
    positive = degree[degree > 0]
    if positive.size:
        hubs = degree >= seed_degree_factor * np.median(positive)
        assignment.status[hubs] = SEED

    affinities = compute_affinities(A, X)
    best, best_score = assignment.copy(), np.inf
    schedule = _stage_schedule(max_stages, delta, delta_decay, energy_ratio_max, max_escalations, ratio_escalation)
    for stage, (stage_delta, cap) in enumerate(schedule):
        aggregation_stage(assignment, A, affinities, X, stage_delta, cap)
        alpha = assignment.n_c / n
        assignment.history.append((stage_delta, alpha))
        score = 1.0 - alpha if alpha <= alpha_max else 1.0 + alpha
        logger.debug(f"Aggregation stage {stage + 1}: delta={stage_delta:.3f}, ratio cap={cap:.3g}, alpha={alpha:.3f}")
        if score < best_score:
            best, best_score = assignment.copy(), score
            best.alpha, best.delta, best.ratio_cap = alpha, stage_delta, cap
        if alpha < alpha_max:
            break
    if best.ratio_cap > energy_ratio_max:
        logger.debug(f"Aggregation at n={n} needed ratio cap {best.ratio_cap:.3g} to reach alpha={best.alpha:.3f}")
    best.history = list(assignment.history)
    return best
