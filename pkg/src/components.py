import logging
from typing import List, Tuple

import numpy as np

from src.laplacian import GraphLaplacian
from src.utils import numba_jit_if_available

logger = logging.getLogger(__name__)


@numba_jit_if_available()
def _dfs_labels(indptr, indices, n):
    labels = np.full(n, -1, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    count = 0
    for root in range(n):
        if labels[root] >= 0:
            continue
        labels[root] = count
        top = 0
        stack[0] = root
        while top >= 0:
            u = stack[top]
            top -= 1
            for p in range(indptr[u], indptr[u + 1]):
                v = indices[p]
                if labels[v] < 0:
                    labels[v] = count
                    top += 1
                    stack[top] = v
        count += 1
    return labels, count


def connected_components(A: GraphLaplacian) -> Tuple[np.ndarray, int]:
    """Component label per node, by an iterative depth-first search.

    Labels are numbered in ascending order of the smallest node of each component.
    """
    labels, count = _dfs_labels(A.W.indptr, A.W.indices, A.n)
    return labels, int(count)


def canonical_labels(labels: np.ndarray) -> Tuple[np.ndarray, int]:
    """Renumber labels by the smallest node carrying each label."""
    if labels.size == 0:
        return labels.astype(np.int64), 0
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return rank[inverse].astype(np.int64), len(order)


def _interpolate_elim(labels: np.ndarray, stages: List, next_label: int) -> Tuple[np.ndarray, int]:
    for stage in reversed(stages):
        fine = np.full(stage.n, -1, dtype=np.int64)
        fine[stage.c_set] = labels
        # Nodes disconnected at this stage form new components
        fine[stage.z_set] = np.arange(next_label, next_label + len(stage.z_set))
        next_label += len(stage.z_set)
        if len(stage.f_set):
            rows = stage.f_rows
            first_neighbor = rows.indices[rows.indptr[:-1]]
            fine[stage.f_set] = labels[first_neighbor]
        labels = fine
    return labels, next_label


def assemble_components(levels: List) -> Tuple[np.ndarray, int, np.ndarray]:
    """Components of the finest graph from the coarsest graph's components.

    Returns finest labels, component count and the coarsest level's labels.
    """
    coarsest, count = connected_components(levels[-1].A)
    labels = coarsest
    next_label = count
    for level in reversed(levels[1:]):
        if level.kind == 'agg':
            labels = labels[level.transfer.seed_of]
        else:
            labels, next_label = _interpolate_elim(labels, level.transfer.stages, next_label)
    labels, total = canonical_labels(labels)
    logger.debug(f"Assembled {total} components from {count} coarsest components")
    return labels, total, coarsest
