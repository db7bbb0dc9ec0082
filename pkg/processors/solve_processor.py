"""
Обработчик одного случая: загрузка графа, построение иерархии, два решения
"""

from main import run_benchmark
from src.config import BenchmarkConfig
from .base_processor import BaseProcessor


class SolveProcessor(BaseProcessor):
    """Процессор для одного графа или генератора"""

    def __init__(self, config: BenchmarkConfig, checkpoint_name: str = 'summary.csv'):
        super().__init__(config.output, checkpoint_name)
        self.config = config

    def _process(self):
        """Запуск бенчмарка для одного случая"""
        self.logger.info(f"Случай {self.config.name}: вход {self.config.input}")
        record = run_benchmark(self.config)
        self.records.append(record)
        if record.error:
            self.logger.warning(f"Случай {record.name} завершился с ошибкой: {record.error}")
        yield record
