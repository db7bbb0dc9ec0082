"""
Synthetic graph generators: grid stencils (some with negative weights) and random graphs.

Grid node (i, j), 0 <= i < n1, 0 <= j < n2, has index i + n1 * j. Stencils are
given as directed legs (di, dj, w) with w the edge weight, i.e. a_uv = -w.
"""

import logging
import math
from typing import Callable, Dict, List, Tuple

import networkx as nx
import numpy as np
import scipy.sparse as sp

from src.errors import GridSpecError
from src.laplacian import EdgeList, GraphLaplacian, build_laplacian
from src.utils import make_rng

logger = logging.getLogger(__name__)

Leg = Tuple[int, int, float]

ANISO_ANGLE = -math.pi / 4
ANISO_EPSILON = 1e-4
STRETCH_ASPECT = 10.0


def _assemble(n1: int, n2: int, legs: List[Leg], boundary: str) -> GraphLaplacian:
    """Accumulate directed legs into a weight matrix and symmetrize.

    boundary: 'truncate' drops legs leaving the grid (Neumann), 'periodic' wraps
    them, 'fold' moves them onto the nearest boundary node and drops legs that
    land on the node itself.
    """
    n = n1 * n2
    i, j = np.meshgrid(np.arange(n1), np.arange(n2), indexing='ij')
    i = i.ravel()
    j = j.ravel()
    src = i + n1 * j
    rows, cols, vals = [], [], []
    for di, dj, w in legs:
        ti, tj = i + di, j + dj
        if boundary == 'truncate':
            mask = (ti >= 0) & (ti < n1) & (tj >= 0) & (tj < n2)
        elif boundary == 'periodic':
            ti, tj = ti % n1, tj % n2
            mask = np.ones(n, dtype=bool)
        elif boundary == 'fold':
            ti, tj = np.clip(ti, 0, n1 - 1), np.clip(tj, 0, n2 - 1)
            mask = (ti + n1 * tj) != src
        else:
            raise GridSpecError(f"Unknown boundary treatment '{boundary}'")
        rows.append(src[mask])
        cols.append((ti + n1 * tj)[mask])
        vals.append(np.full(int(mask.sum()), w))
    W = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return GraphLaplacian.from_weights(W)


def _five_point_legs() -> List[Leg]:
    return [(1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0)]


def _anisotropic_coefficients(alpha: float, eps: float) -> Tuple[float, float, float]:
    """Coefficients of a U_xx + b U_xy + c U_yy for the rotated anisotropic operator."""
    a = math.cos(alpha) ** 2 + eps * math.sin(alpha) ** 2
    b = (1.0 - eps) * math.sin(2.0 * alpha)
    c = eps * math.cos(alpha) ** 2 + math.sin(alpha) ** 2
    return a, b, c


def five_point(n1: int, n2: int) -> GraphLaplacian:
    return _assemble(n1, n2, _five_point_legs(), 'truncate')


def path_graph(n1: int, n2: int = 1) -> GraphLaplacian:
    if n2 != 1:
        raise GridSpecError(f"Path graph is one-dimensional, got n2={n2}")
    return _assemble(n1, 1, [(1, 0, 1.0), (-1, 0, 1.0)], 'truncate')


def aniso_rot_agnostic(n1: int, n2: int, alpha: float = ANISO_ANGLE, eps: float = ANISO_EPSILON) -> GraphLaplacian:
    a, b, c = _anisotropic_coefficients(alpha, eps)
    legs = [(1, 0, a), (-1, 0, a), (0, 1, c), (0, -1, c),
            (1, 1, b / 4), (-1, -1, b / 4), (-1, 1, -b / 4), (1, -1, -b / 4)]
    return _assemble(n1, n2, legs, 'truncate')


def aniso_rot_misaligned(n1: int, n2: int, alpha: float = ANISO_ANGLE, eps: float = ANISO_EPSILON) -> GraphLaplacian:
    # Cross term taken along the northeast/southwest diagonal only
    a, b, c = _anisotropic_coefficients(alpha, eps)
    legs = [(1, 0, a - b / 2), (-1, 0, a - b / 2), (0, 1, c - b / 2), (0, -1, c - b / 2),
            (1, 1, b / 2), (-1, -1, b / 2)]
    return _assemble(n1, n2, legs, 'truncate')


def stretched_fe(n1: int, n2: int, aspect: float = STRETCH_ASPECT) -> GraphLaplacian:
    """Bilinear elements with h_x / h_y = aspect, periodic, scaled so the vertical weight tends to 4."""
    q = 1.0 / aspect ** 2
    wx, wy, wd = 4.0 * q - 2.0, 4.0 - 2.0 * q, 1.0 + q
    legs = [(1, 0, wx), (-1, 0, wx), (0, 1, wy), (0, -1, wy),
            (1, 1, wd), (-1, -1, wd), (-1, 1, wd), (1, -1, wd)]
    return _assemble(n1, n2, legs, 'periodic')


def fourth_order(n1: int, n2: int) -> GraphLaplacian:
    legs = [(1, 0, 16.0), (-1, 0, 16.0), (0, 1, 16.0), (0, -1, 16.0),
            (2, 0, -1.0), (-2, 0, -1.0), (0, 2, -1.0), (0, -2, -1.0)]
    return _assemble(n1, n2, legs, 'fold')


def biharmonic(n1: int, n2: int) -> GraphLaplacian:
    # Square of the Neumann 5-point operator: interior stencil (20, -8, 2, 1)
    L = five_point(n1, n2).A
    B = (L @ L).tocsr()
    return GraphLaplacian.from_weights(-(B - sp.diags(B.diagonal())))


GRID_KINDS: Dict[str, Tuple[Callable[..., GraphLaplacian], int]] = {
    'fivepoint': (five_point, 2),
    'grid2d': (five_point, 2),
    'path': (path_graph, 2),
    'anisorot-agnostic': (aniso_rot_agnostic, 2),
    'anisorot-misaligned': (aniso_rot_misaligned, 2),
    'stretched-fe': (stretched_fe, 3),
    'fourth-order': (fourth_order, 3),
    'biharmonic': (biharmonic, 3),
}


def generate_grid(kind: str, n1: int, n2: int = 1, **params) -> GraphLaplacian:
    """Laplacian of a named stencil on an n1 x n2 grid.

    Args:
        kind: one of GRID_KINDS
        n1, n2: grid dimensions ('path' requires n2 == 1)
        params: stencil parameters (alpha, eps for the anisotropic kinds; aspect for stretched-fe)

    Raises:
        GridSpecError: unknown kind or grid smaller than the stencil allows
    """
    key = kind.lower().replace('_', '-')
    if key not in GRID_KINDS:
        raise GridSpecError(f"Unknown grid kind '{kind}', expected one of {sorted(GRID_KINDS)}")
    builder, min_size = GRID_KINDS[key]
    if n1 < min_size or (key != 'path' and n2 < min_size):
        raise GridSpecError(f"Grid {n1}x{n2} is too small for '{key}' (minimum {min_size} per dimension)")
    A = builder(n1, n2, **params)
    logger.debug(f"Generated {key} {n1}x{n2}: n={A.n}, m={A.m}")
    return A


RANDOM_KINDS = ('erdos', 'connected', 'powerlaw', 'components')


def _connect(G: nx.Graph, rng: np.random.Generator) -> None:
    comps = [sorted(c) for c in nx.connected_components(G)]
    comps.sort(key=lambda c: c[0])
    for left, right in zip(comps[:-1], comps[1:]):
        G.add_edge(int(rng.choice(left)), int(rng.choice(right)))


def generate_random_graph(kind: str, n: int, seed: int = 0, average_degree: float = 4.0,
                          weighted: bool = False, blocks: int = 3) -> GraphLaplacian:
    """Random graph Laplacian.

    'erdos': G(n, m) with m = average_degree * n / 2, possibly disconnected;
    'connected': the same, with components linked into one;
    'powerlaw': preferential attachment;
    'components': `blocks` disjoint connected random blocks.
    Weights are 1, or uniform in [0.5, 2] when weighted.
    """
    if kind not in RANDOM_KINDS:
        raise GridSpecError(f"Unknown random graph kind '{kind}', expected one of {RANDOM_KINDS}")
    if n < 2:
        raise GridSpecError(f"Random graph needs at least 2 nodes, got {n}")
    rng = make_rng(seed)
    edge_budget = min(int(round(average_degree * n / 2)), n * (n - 1) // 2)

    if kind == 'powerlaw':
        G = nx.barabasi_albert_graph(n, max(1, min(n - 1, int(average_degree // 2))), seed=seed)
    elif kind == 'components':
        if blocks < 1 or blocks > n // 2:
            raise GridSpecError(f"Cannot split {n} nodes into {blocks} blocks of size >= 2")
        sizes = np.full(blocks, n // blocks)
        sizes[: n % blocks] += 1
        G = nx.Graph()
        offset = 0
        for k, size in enumerate(sizes):
            size = int(size)
            block = nx.gnm_random_graph(size, min(int(round(average_degree * size / 2)), size * (size - 1) // 2),
                                        seed=seed + k + 1)
            _connect(block, rng)
            G.add_edges_from((a + offset, b + offset) for a, b in block.edges())
            offset += size
        G.add_nodes_from(range(n))
    else:
        G = nx.gnm_random_graph(n, edge_budget, seed=seed)
        if kind == 'connected':
            _connect(G, rng)

    pairs = sorted((min(a, b), max(a, b)) for a, b in G.edges())
    u = np.array([p[0] for p in pairs], dtype=np.int64)
    v = np.array([p[1] for p in pairs], dtype=np.int64)
    w = rng.uniform(0.5, 2.0, size=len(pairs)) if weighted else np.ones(len(pairs))
    return build_laplacian(EdgeList(n, u, v, w))


def generate_two_suns(satellites: int = 20) -> GraphLaplacian:
    """Two high-degree hubs joined by an edge, each with its own satellites.

    Hub 0 owns nodes 1..satellites; hub satellites+1 owns the rest.
    """
    k = satellites
    second = k + 1
    edges = [(0, s, 1.0) for s in range(1, k + 1)]
    edges += [(second, s, 1.0) for s in range(second + 1, second + k + 1)]
    edges.append((0, second, 1.0))
    return build_laplacian(EdgeList.from_tuples(2 * k + 2, edges))
