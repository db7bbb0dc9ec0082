"""
Solve phase: fractional-index multilevel cycles.

Transitions to an Elim level are exact (restrict, recurse, reconstruct); to an
Agg level they are relaxation-based corrections with a flat energy correction
mu on the restricted residual, optionally followed by iterant recombination.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from src.coarsen import agg_correct, agg_restrict
from src.config import SolveOptions
from src.elim import elim_correct, elim_restrict
from src.errors import IncompatibleRhsError, LaplacianError
from src.hierarchy import ELIM, RELAX, Hierarchy, augmented_matrix
from src.laplacian import GraphLaplacian
from src.relax import gs_sweeps
from src.utils import make_rng, uniform_vector

logger = logging.getLogger(__name__)

COMPATIBILITY_TOLERANCE = 1e-8
RANK_TOLERANCE = 1e-12
COARSEST_RELAX_REDUCTION = 0.1
COARSEST_RELAX_MAX_SWEEPS = 50
TAIL_CYCLES = 5
CREDIT_START = 0.5
DIVERGENCE_FACTOR = 1e6


def time_per_edge_per_figure(t: float, m: int, r0: float, rp: float) -> float:
    """Seconds per edge per decimal digit of residual reduction: t / (m log10(r0 / rp))."""
    if m <= 0 or r0 <= 0 or rp <= 0 or rp >= r0:
        return math.nan
    return t / (m * math.log10(r0 / rp))


@dataclass
class SolveReport:
    residual_history: List[float]
    cycles: int
    converged: bool
    solve_time: float = 0.0
    setup_time: float = 0.0
    work_units: float = 0.0
    m: int = 0
    correction: str = 'flat'
    recombinations: int = 0
    diverged: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def acf(self) -> float:
        p = self.cycles
        if p == 0 or self.residual_history[0] == 0:
            return 0.0
        return (self.residual_history[-1] / self.residual_history[0]) ** (1.0 / p)

    @property
    def tail_acf(self) -> float:
        p = self.cycles
        if p <= TAIL_CYCLES:
            return self.acf
        start = self.residual_history[-1 - TAIL_CYCLES]
        if start == 0:
            return 0.0
        return (self.residual_history[-1] / start) ** (1.0 / TAIL_CYCLES)

    @property
    def work_per_cycle(self) -> float:
        return self.work_units / self.cycles if self.cycles else 0.0

    @property
    def t_setup_per_edge(self) -> float:
        return self.setup_time / self.m if self.m else math.nan

    @property
    def t_solve_per_edge_per_figure(self) -> float:
        return time_per_edge_per_figure(self.solve_time, self.m, self.residual_history[0], self.residual_history[-1])

    def as_dict(self) -> dict:
        return {
            'cycles': self.cycles,
            'converged': self.converged,
            'diverged': self.diverged,
            'acf': self.acf,
            'tail_acf': self.tail_acf,
            'solve_time': self.solve_time,
            'setup_time': self.setup_time,
            't_setup_per_edge': self.t_setup_per_edge,
            't_solve_per_edge_per_figure': self.t_solve_per_edge_per_figure,
            'work_units': self.work_units,
            'work_per_cycle': self.work_per_cycle,
            'recombinations': self.recombinations,
            'residual_history': list(self.residual_history),
        }


def orthogonalize_zero_modes(x: np.ndarray, labels: np.ndarray, alpha: np.ndarray) -> None:
    """Shift x on each component so that its sum there equals alpha (in place)."""
    count = len(alpha)
    sizes = np.bincount(labels, minlength=count)
    sums = np.bincount(labels, weights=x, minlength=count)
    x += ((alpha - sums) / np.maximum(sizes, 1))[labels]


def recombine(A: GraphLaplacian, b: np.ndarray, x: np.ndarray, saved: Sequence[np.ndarray]) -> np.ndarray:
    """x + sum_i a_i (x_i - x) with a minimizing the residual norm; x itself if that fails."""
    r = b - A.A @ x
    D = np.column_stack([s - x for s in saved])
    AD = A.A @ D
    G = AD.T @ AD
    scale = float(np.max(np.diag(G))) if G.size else 0.0
    if scale <= 0.0:
        return x.copy()
    keep = np.diag(G) > RANK_TOLERANCE * scale
    G = G[np.ix_(keep, keep)]
    if np.linalg.cond(G) > 1.0 / RANK_TOLERANCE:
        return x.copy()
    coef = np.linalg.solve(G, AD[:, keep].T @ r)
    y = x + D[:, keep] @ coef
    if np.linalg.norm(b - A.A @ y) > np.linalg.norm(r):
        return x.copy()
    return y


def coarsest_solve(A: GraphLaplacian, labels: np.ndarray, b: np.ndarray,
                   lu: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> np.ndarray:
    """Direct solve of the augmented system [[A, U], [U^T, 0]] [x; xi] = [b; 0]; xi is dropped."""
    n = A.n
    if n == 0:
        return np.zeros(0)
    count = int(labels.max()) + 1
    if lu is None:
        lu = scipy.linalg.lu_factor(augmented_matrix(A, labels, count), check_finite=False)
    rhs = np.concatenate([b, np.zeros(count)])
    return scipy.linalg.lu_solve(lu, rhs, check_finite=False)[:n]


class Cycle:
    """Per-solve cycle state over a shared hierarchy."""

    def __init__(self, h: Hierarchy, options: SolveOptions):
        self.h = h
        self.options = options
        self.adaptive = options.correction == 'adaptive'
        self.credit = np.full(h.num_levels, CREDIT_START)
        self.visits = np.zeros(h.num_levels, dtype=np.int64)
        self.work = 0.0
        self.recombinations = 0
        self._n1 = max(h.finest.n, 1)
        self._coarsest_zero = np.zeros(h.coarsest_components)

    def visit(self, l: int, x: np.ndarray, b: np.ndarray, saved: Optional[List[np.ndarray]] = None) -> None:
        self.visits[l] += 1
        if l == self.h.num_levels - 1:
            self._coarsest(x, b)
        else:
            self.level_cycle(l, x, b, saved)

    def _relax(self, l: int, x: np.ndarray, b: np.ndarray, sweeps: int) -> None:
        if sweeps:
            A = self.h.levels[l].A
            gs_sweeps(A, x, b, sweeps)
            self.work += sweeps * A.n / self._n1

    def _coarsest(self, x: np.ndarray, b: np.ndarray) -> None:
        h = self.h
        A = h.levels[-1].A
        if h.coarsest_solver == RELAX:
            target = COARSEST_RELAX_REDUCTION * np.linalg.norm(b - A.A @ x)
            for _ in range(COARSEST_RELAX_MAX_SWEEPS):
                self._relax(len(h.levels) - 1, x, b, 1)
                orthogonalize_zero_modes(x, h.coarsest_labels, self._coarsest_zero)
                if np.linalg.norm(b - A.A @ x) <= target:
                    break
        else:
            x[:] = coarsest_solve(A, h.coarsest_labels, b, h.coarsest_lu)

    def cycle(self, l: int, x: np.ndarray, b: np.ndarray) -> None:
        """One top-level cycle entered at level l; the credit accumulators restart from CREDIT_START."""
        self.credit[:] = CREDIT_START
        self.visit(l, x, b)

    def level_cycle(self, l: int, x: np.ndarray, b: np.ndarray, saved: Optional[List[np.ndarray]] = None) -> None:
        """One sub-cycle at level l.

        The coarse problem is restricted once and then gets k sub-cycles, k from
        the credit of level l. In adaptive mode the coarse iterants saved after
        each sub-cycle's pre-relaxation are recombined with the final one before
        the correction. `saved` collects this level's own pre-relaxed iterant.
        """
        levels = self.h.levels
        level, nxt = levels[l], levels[l + 1]
        if nxt.kind == ELIM:
            t = nxt.transfer
            b_c = elim_restrict(t, b)
            x_c = x[t.c_nodes]
            coarse_saved = None if saved is None else []
            self.visit(l + 1, x_c, b_c, coarse_saved)
            x[:] = elim_correct(t, x_c, b)
            if saved is not None:
                saved.extend(elim_correct(t, s, b) for s in coarse_saved)
            return

        A = level.A
        t = nxt.transfer
        self._relax(l, x, b, level.nu_pre)
        if saved is not None:
            saved.append(x.copy())
        b_c = agg_restrict(t, self.options.mu, b - A.A @ x)
        x_c = np.zeros(t.n_c)
        self.credit[l] += level.gamma
        k = int(math.floor(self.credit[l] + 1e-12))
        self.credit[l] -= k
        coarse_saved = [] if self.adaptive else None
        for _ in range(k):
            self.visit(l + 1, x_c, b_c, coarse_saved)
        if coarse_saved:
            x_c[:] = recombine(nxt.A, b_c, x_c, coarse_saved[-self.options.theta_max:])
            self.recombinations += 1
        agg_correct(t, x, x_c)
        self._relax(l, x, b, level.nu_post)


def check_compatibility(h: Hierarchy, b: np.ndarray) -> None:
    sums = np.bincount(h.components, weights=b, minlength=h.n_components)
    scale = float(np.linalg.norm(b))
    bad = np.flatnonzero(np.abs(sums) > COMPATIBILITY_TOLERANCE * max(scale, np.finfo(float).tiny))
    if bad.size:
        raise IncompatibleRhsError(bad[0], sums[bad[0]])


def solve(h: Hierarchy, b: np.ndarray, alpha: Optional[np.ndarray] = None,
          options: Optional[SolveOptions] = None) -> Tuple[np.ndarray, SolveReport]:
    """Solve Ax = b subject to U^T x = alpha, U the component indicator vectors."""
    opts = options or SolveOptions()
    A = h.finest
    n = A.n
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (n,):
        raise LaplacianError(f"Right-hand side length {b.shape} does not match n={n}")
    alpha = np.zeros(h.n_components) if alpha is None else np.asarray(alpha, dtype=np.float64)
    if alpha.shape != (h.n_components,):
        raise LaplacianError(f"Expected {h.n_components} component means, got {alpha.shape}")
    check_compatibility(h, b)
    started = time.perf_counter()

    if not np.any(b):
        x = np.zeros(n)
        orthogonalize_zero_modes(x, h.components, alpha)
        report = SolveReport(residual_history=[0.0], cycles=0, converged=True, setup_time=h.setup_time,
                             m=A.m, correction=opts.correction, solve_time=time.perf_counter() - started)
        return x, report

    x = uniform_vector(make_rng(opts.seed), n)
    orthogonalize_zero_modes(x, h.components, alpha)
    r0 = float(np.linalg.norm(b - A.A @ x))
    history = [r0]
    cycle = Cycle(h, opts)

    top = 0
    top_b, top_x = b, x
    if h.num_levels > 1 and h.levels[1].kind == ELIM:
        top = 1
        elim = h.levels[1].transfer
        top_b = elim_restrict(elim, b)
        top_x = x[elim.c_nodes]

    residual = r0
    cycles = 0
    diverged = False
    while cycles < opts.max_cycles and residual > opts.tolerance * r0:
        cycle.cycle(top, top_x, top_b)
        if top == 1:
            x = elim_correct(elim, top_x, b)
            orthogonalize_zero_modes(x, h.components, alpha)
            top_x = x[elim.c_nodes]
        else:
            orthogonalize_zero_modes(x, h.components, alpha)
        cycles += 1
        residual = float(np.linalg.norm(b - A.A @ x))
        history.append(residual)
        logger.debug(f"Cycle {cycles}: residual {residual:.3e}")
        if not math.isfinite(residual) or residual > DIVERGENCE_FACTOR * r0:
            diverged = True
            logger.warning(f"Solve diverged at cycle {cycles}: residual {residual:.3e}, initial {r0:.3e}")
            break

    report = SolveReport(residual_history=history, cycles=cycles, converged=residual <= opts.tolerance * r0,
                         solve_time=time.perf_counter() - started, setup_time=h.setup_time,
                         work_units=cycle.work, m=A.m, correction=opts.correction,
                         recombinations=cycle.recombinations, diverged=diverged)
    logger.info(f"Solve ({opts.correction}): {cycles} cycles, ACF {report.acf:.3f}, converged={report.converged}")
    return x, report
