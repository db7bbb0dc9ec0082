"""
Обработчик для вывода таблицы уровней иерархии
"""

import orjson

from main import setup_case
from src.config import BenchmarkConfig
from .base_processor import BaseProcessor


class HierarchyProcessor(BaseProcessor):
    """Строит иерархию и сохраняет таблицу уровней в JSON"""

    def __init__(self, config: BenchmarkConfig, checkpoint_name: str = 'summary.csv'):
        super().__init__(config.output, checkpoint_name)
        self.config = config

    def _process(self):
        A, h = setup_case(self.config)
        table = {
            'name': self.config.name,
            'n': A.n,
            'm': A.m,
            'components': h.n_components,
            'coarsest_solver': h.coarsest_solver,
            'setup_time': h.setup_time,
            'edge_complexity': h.edge_complexity(),
            'levels': h.level_table(),
        }
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self.output_dir / f"{self.config.name}.levels.json"
        path.write_bytes(orjson.dumps(table, option=orjson.OPT_INDENT_2))
        self.logger.info(f"Таблица уровней ({h.num_levels}) сохранена в {path}")
        yield table
