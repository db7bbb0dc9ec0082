import math
import os
import time
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import orjson
import pandas as pd
from pydantic import BaseModel

from logger import setup_logger
from src.config import BenchmarkConfig
from src.cycle import solve
from src.errors import GridSpecError, LaplacianError
from src.grids import GRID_KINDS, RANDOM_KINDS, generate_grid, generate_random_graph
from src.hierarchy import Hierarchy, build_hierarchy
from src.laplacian import GraphLaplacian, load_matrix_market
from src.utils import make_rng, parse_grid_size

logger = setup_logger(__name__)

CSV_COLUMNS = ['name', 'n', 'm', 'M', 'L', 'acf_flat', 'acf_adaptive', 't_setup', 't_solve', 't_total', 'gain']
METRICS_FILE = 'metrics.csv'
SOLVE_FIGURES = 10


class MetricsRecord(BaseModel):
    name: str
    n: int = 0
    m: int = 0
    M: int = 0
    L: int = 0
    acf_flat: float = math.nan
    acf_adaptive: float = math.nan
    t_setup: float = math.nan
    t_solve: float = math.nan
    t_total: float = math.nan
    gain: float = math.nan
    error: Optional[str] = None

    def csv_row(self) -> dict:
        return {column: getattr(self, column) for column in CSV_COLUMNS}


def total_time_per_edge(t_setup: float, t_solve: float) -> float:
    return t_setup + SOLVE_FIGURES * t_solve


def load_input(source: str, mode: str = 'adjacency') -> GraphLaplacian:
    """Matrix Market path or generator spec 'gen:<kind>:<size>'."""
    if not source.startswith('gen:'):
        return load_matrix_market(source, mode)
    parts = source.split(':')
    if len(parts) != 3:
        raise GridSpecError(f"Bad generator spec '{source}', expected gen:<kind>:<size>")
    _, kind, size = parts
    if kind in RANDOM_KINDS:
        n, _ = parse_grid_size(size)
        return generate_random_graph(kind, n)
    if kind in GRID_KINDS:
        n1, n2 = parse_grid_size(size)
        return generate_grid(kind, n1, n2)
    raise GridSpecError(f"Unknown generator '{kind}'")


def make_st_rhs(A: GraphLaplacian, components: np.ndarray, seed: Optional[int] = None) -> np.ndarray:
    """b_s = 1, b_t = -1 for two nodes of the largest component.

    s and t are its lowest and highest nodes; with a seed they are drawn at random instead.
    """
    sizes = np.bincount(components)
    if sizes.size == 0 or sizes.max() < 2:
        raise LaplacianError("All components are singletons, cannot place a source and a sink")
    nodes = np.flatnonzero(components == int(np.argmax(sizes)))
    if seed is None:
        s, t = nodes[0], nodes[-1]
    else:
        s, t = make_rng(seed).choice(nodes, size=2, replace=False)
    b = np.zeros(A.n)
    b[s] = 1.0
    b[t] = -1.0
    return b


def save_record(record: MetricsRecord, output: str, details: Optional[dict] = None) -> Tuple[Path, Path]:
    out_dir = Path(output)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / f"{record.name}.json"
    payload = record.model_dump()
    payload['details'] = details or {}
    json_path.write_bytes(orjson.dumps(payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY))

    csv_path = out_dir / METRICS_FILE
    pd.DataFrame([record.csv_row()], columns=CSV_COLUMNS).to_csv(
        csv_path, mode='a', header=not csv_path.exists(), index=False
    )
    logger.info(f"Saved {json_path} and appended to {csv_path}")
    return json_path, csv_path


def setup_case(cfg: BenchmarkConfig) -> Tuple[GraphLaplacian, Hierarchy]:
    A = load_input(cfg.input, cfg.mode)
    logger.info(f"[{cfg.name}] n={A.n}, m={A.m}")
    return A, build_hierarchy(A, cfg.setup_options())


def run_benchmark(cfg: BenchmarkConfig, save: bool = True) -> MetricsRecord:
    """Setup once, solve with the flat and the adaptive correction, record the metrics."""
    record = MetricsRecord(name=cfg.name)
    details: dict = {'config': cfg.model_dump()}
    try:
        A, h = setup_case(cfg)
        record.n, record.m, record.M, record.L = A.n, A.m, h.n_components, h.num_levels
        details['levels'] = h.level_table()
        details['edge_complexity'] = h.edge_complexity()
        record.t_setup = h.setup_time / A.m if A.m else math.nan

        b = make_st_rhs(A, h.components)
        reports = {}
        for correction in ('flat', 'adaptive'):
            _, report = solve(h, b, options=cfg.solve_options(correction))
            reports[correction] = report
            details[correction] = report.as_dict()

        flat, adaptive = reports['flat'], reports['adaptive']
        record.acf_flat, record.acf_adaptive = flat.acf, adaptive.acf
        record.t_solve = reports[cfg.correction].t_solve_per_edge_per_figure
        record.t_total = total_time_per_edge(record.t_setup, record.t_solve)
        record.gain = flat.t_solve_per_edge_per_figure / adaptive.t_solve_per_edge_per_figure

        diverged = [c for c, r in reports.items() if r.diverged]
        failed = [c for c, r in reports.items() if not r.converged and not r.diverged]
        if diverged:
            record.error = f"Diverged: {', '.join(diverged)}"
            logger.warning(f"[{cfg.name}] {record.error}")
        elif failed:
            record.error = f"No convergence within {cfg.max_cycles} cycles: {', '.join(failed)}"
            logger.warning(f"[{cfg.name}] {record.error}")
        logger.info(f"[{cfg.name}] L={record.L}, ACF flat={record.acf_flat:.3f}, "
                    f"adaptive={record.acf_adaptive:.3f}, t_total={record.t_total:.3e}")
    except Exception as e:
        logger.exception(f"[{cfg.name}] Benchmark failed: {e}")
        record.error = f"{type(e).__name__}: {e}"

    if save:
        save_record(record, cfg.output, details)
    return record


def records_table(records: List[MetricsRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.csv_row() | {'error': r.error} for r in records])


if __name__ == '__main__':
    start = time.time()
    try:
        rec = run_benchmark(BenchmarkConfig(input=os.environ.get('LAMG_INPUT', 'gen:fivepoint:128x128')))
        print(rec.model_dump())
        print(f"Done in {time.time() - start:.1f}s")
    except Exception as e:
        logger.error(f"Main execution failed: {e}")
        print(f"Error: {e}")
