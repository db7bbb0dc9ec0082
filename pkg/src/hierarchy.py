"""
Setup phase: builds the multilevel hierarchy level by level.

At each level: measure the relaxation speed (stop if relaxation alone is fast),
eliminate low-degree nodes, then aggregate and coarsen. Afterwards cycle
parameters are assigned and the connected components are assembled from the
coarsest graph.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from src.agg import aggregate
from src.coarsen import AggTransfer, galerkin_coarsen
from src.components import assemble_components
from src.config import SetupOptions
from src.elim import ElimTransfer, eliminate
from src.errors import SingularCoarsestError
from src.laplacian import GraphLaplacian
from src.relax import estimate_relaxation_acf, generate_test_vectors

logger = logging.getLogger(__name__)

FINEST = 'finest'
ELIM = 'elim'
AGG = 'agg'

DIRECT = 'direct'
RELAX = 'relax'


@dataclass(eq=False)
class Level:
    kind: str
    A: GraphLaplacian
    transfer: Optional[Union[ElimTransfer, AggTransfer]] = None
    gamma: float = 1.0
    nu_pre: int = 0
    nu_post: int = 0
    K: int = 0
    setup_time: float = 0.0


def augmented_matrix(A: GraphLaplacian, labels: np.ndarray, count: int) -> np.ndarray:
    """[[A, U], [U^T, 0]] with U the 0/1 component indicator matrix."""
    n = A.n
    M = np.zeros((n + count, n + count))
    M[:n, :n] = A.A.toarray()
    M[np.arange(n), n + labels] = 1.0
    M[n + labels, np.arange(n)] = 1.0
    return M


def factor_augmented(A: GraphLaplacian, labels: np.ndarray, count: int) -> Tuple[np.ndarray, np.ndarray]:
    M = augmented_matrix(A, labels, count)
    lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.size and pivots.min() <= 1e-13 * max(pivots.max(), 1.0):
        raise SingularCoarsestError(
            f"Augmented coarsest system of size {M.shape[0]} is singular (components inconsistent with the operator)"
        )
    return lu, piv


@dataclass(eq=False)
class Hierarchy:
    levels: List[Level]
    components: np.ndarray
    n_components: int
    coarsest_labels: np.ndarray
    coarsest_components: int
    coarsest_solver: str = DIRECT
    coarsest_lu: Optional[Tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False)
    setup_time: float = 0.0
    options: SetupOptions = field(default_factory=SetupOptions)

    @property
    def finest(self) -> GraphLaplacian:
        return self.levels[0].A

    @property
    def num_levels(self) -> int:
        return len(self.levels)

    @property
    def zero_modes(self) -> sp.csr_matrix:
        n = self.finest.n
        return sp.csr_matrix((np.ones(n), (np.arange(n), self.components)), shape=(n, self.n_components))

    def edge_complexity(self) -> float:
        m1 = self.finest.m
        total = sum(level.A.m for level in self.levels)
        return total / m1 if m1 else 1.0

    def level_table(self) -> List[dict]:
        rows = []
        for index, level in enumerate(self.levels):
            n, m = level.A.n, level.A.m
            rows.append({
                'level': index + 1,
                'kind': level.kind,
                'n': n,
                'm': m,
                'mean_degree': round(2.0 * m / n, 3) if n else 0.0,
                'gamma': round(level.gamma, 4),
                'nu_pre': level.nu_pre,
                'nu_post': level.nu_post,
                'K': level.K,
                'setup_time': round(level.setup_time, 6),
            })
        return rows


def assign_cycle_params(levels: List[Level], gamma: float, guard: float, rule: str = 'corrected') -> None:
    """Cycle index and sweep counts per level, in place."""
    if not levels:
        return
    m1 = levels[0].A.m
    for index in range(len(levels) - 1):
        level, nxt = levels[index], levels[index + 1]
        if nxt.kind == ELIM:
            level.gamma, level.nu_pre, level.nu_post = 1.0, 0, 0
            continue
        m_l, m_next = level.A.m, nxt.A.m
        if m_l > 0.1 * m1:
            g = gamma
        elif rule == 'printed':
            g = min(2.0, guard * m_next / m_l) if m_l else 1.0
        else:
            g = min(2.0, guard * m_l / m_next) if m_next else 2.0
        level.gamma = max(1.0, g)
        level.nu_pre, level.nu_post = 1, 2
    coarsest = levels[-1]
    coarsest.gamma, coarsest.nu_pre, coarsest.nu_post = 0.0, 0, 0


def build_hierarchy(A: GraphLaplacian, options: Optional[SetupOptions] = None) -> Hierarchy:
    opts = options or SetupOptions()
    started = time.perf_counter()
    levels = [Level(kind=FINEST, A=A)]
    coarsest_solver = DIRECT
    agg_levels = 0
    current = A

    while current.n > 1 and len(levels) < opts.max_levels:
        level_started = time.perf_counter()
        level_seed = opts.seed + 1000 * len(levels)

        if current.zero_degree_nodes.size == 0:
            rho = estimate_relaxation_acf(current, opts.acf_sweeps, seed=level_seed)
            logger.debug(f"Level {len(levels)}: relaxation ACF {rho:.3f}")
            if rho <= opts.relax_acf_threshold:
                coarsest_solver = RELAX
                break

        reduced, elim_transfer, eliminated = eliminate(current)
        if eliminated:
            levels.append(Level(kind=ELIM, A=reduced, transfer=elim_transfer,
                                setup_time=time.perf_counter() - level_started))
            logger.info(f"Level {len(levels)} (elim): n={reduced.n}, m={reduced.m}")
            current = reduced
            level_started = time.perf_counter()
        if current.n <= opts.coarsest_size or current.n <= 1 or len(levels) >= opts.max_levels:
            break

        K = opts.tv_count + agg_levels
        tvs = generate_test_vectors(current, K, opts.tv_sweeps, seed=level_seed + 1)
        assignment = aggregate(current, tvs, opts.alpha_max, seed_degree_factor=opts.seed_degree_factor,
                               max_stages=opts.max_agg_stages, energy_ratio_max=opts.energy_ratio_max,
                               max_escalations=opts.max_escalations, ratio_escalation=opts.ratio_escalation)
        if assignment.n_c == current.n:
            logger.warning(f"Aggregation made no progress at n={current.n}; solving this level directly")
            break
        transfer = AggTransfer.from_assignment(assignment)
        coarse = galerkin_coarsen(current, transfer)
        levels[-1].K = K
        levels.append(Level(kind=AGG, A=coarse, transfer=transfer, setup_time=time.perf_counter() - level_started))
        agg_levels += 1
        logger.info(f"Level {len(levels)} (agg): n={coarse.n}, m={coarse.m}, alpha={assignment.alpha:.3f}")
        current = coarse

    assign_cycle_params(levels, opts.gamma, opts.guard, opts.cycle_index_rule)
    components, count, coarsest_labels = assemble_components(levels)
    coarsest_count = int(coarsest_labels.max()) + 1 if coarsest_labels.size else 0
    lu = None
    if coarsest_solver == DIRECT and current.n > 0:
        lu = factor_augmented(current, coarsest_labels, coarsest_count)

    h = Hierarchy(levels=levels, components=components, n_components=count, coarsest_labels=coarsest_labels,
                  coarsest_components=coarsest_count, coarsest_solver=coarsest_solver, coarsest_lu=lu,
                  setup_time=time.perf_counter() - started, options=opts)
    logger.info(f"Setup finished in {h.setup_time:.3f} s: {h.num_levels} levels, {count} components, "
                f"edge complexity {h.edge_complexity():.2f}, coarsest solver {coarsest_solver}")
    return h
