"""
Обработчик набора случаев из YAML-файла
"""

from pathlib import Path

import yaml
from tqdm import tqdm

from main import run_benchmark
from src.config import SuiteCase
from src.errors import ConfigError
from .base_processor import BaseProcessor


def load_suite(path):
    """Чтение YAML-файла набора: defaults, output и список cases"""
    with open(path, 'r', encoding='utf-8') as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict) or not data.get('cases'):
        raise ConfigError(f"Файл набора {path} не содержит списка cases")
    cases = [SuiteCase(**case) for case in data['cases']]
    return cases, data.get('defaults') or {}, data.get('output')


class SuiteProcessor(BaseProcessor):
    """Процессор для набора графов с сохранением сводки после каждого случая"""

    def __init__(self, suite_path, output_dir=None, checkpoint_name='summary.csv'):
        self.suite_path = Path(suite_path)
        self.cases, self.defaults, suite_output = load_suite(self.suite_path)
        super().__init__(output_dir or suite_output or 'results', checkpoint_name)

    def _process(self):
        """Последовательный запуск всех случаев набора"""
        total = len(self.cases)
        self.logger.info(f"Набор {self.suite_path.name}: {total} случаев")

        for idx, case in enumerate(tqdm(self.cases, desc='Бенчмарк'), start=1):
            if self.stop_event.is_set():
                break
            try:
                config = case.to_config(str(self.output_dir), self.defaults)
            except Exception as e:
                self.logger.exception(f"Некорректный случай {idx}/{total} ({case.input}): {e}")
                continue

            self.logger.info(f"Случай {idx}/{total}: {config.name}")
            record = run_benchmark(config)
            self.records.append(record)
            if record.error:
                self.logger.warning(f"Случай {record.name}: {record.error}")

            # Чекпоинт после каждого случая
            self.save_checkpoint(idx, total)
            yield record
