"""
Базовый класс процессора, определяющий общий интерфейс для всех задач бенчмарка
"""

import threading
import time
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Iterator, List

from logger import setup_logger
from main import METRICS_FILE, MetricsRecord, records_table


class BaseProcessor(ABC):
    """Базовый абстрактный класс для всех процессоров"""

    def __init__(self, output_dir: str = 'results', checkpoint_name: str = 'summary.csv'):
        self.output_dir = Path(output_dir)
        self.checkpoint_name = checkpoint_name
        self.logger = setup_logger(self.__class__.__name__)
        self.stop_event = threading.Event()
        self.records: List[MetricsRecord] = []

        # Метки времени для отслеживания прогресса
        self.start_time = None
        self.end_time = None

    @property
    def checkpoint_path(self) -> Path:
        return self.output_dir / self.checkpoint_name

    @property
    def metrics_path(self) -> Path:
        return self.output_dir / METRICS_FILE

    def cancel(self):
        """Отменить обработку"""
        self.stop_event.set()
        self.logger.info("Обработка остановлена пользователем")
        return "Обработка остановлена пользователем"

    def save_checkpoint(self, idx=None, total=None):
        """Сохранить сводную таблицу уже посчитанных случаев"""
        if not self.records:
            return False
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
            records_table(self.records).to_csv(self.checkpoint_path, index=False)
            if idx and total:
                self.logger.info(f"Сохранен промежуточный результат {idx}/{total} в {self.checkpoint_path}")
            else:
                self.logger.info(f"Сохранен промежуточный результат в {self.checkpoint_path}")
            return True
        except Exception as e:
            self.logger.error(f"Ошибка при записи в файл {self.checkpoint_path}: {e}")
            return False

    def process(self) -> Iterator:
        """
        Запуск задачи. Основной метод, общий для всех подклассов.

        Returns:
            generator: Генератор, возвращающий результаты по мере готовности
        """
        self.stop_event.clear()
        self.start_time = time.time()
        self.logger.info(f"Начало обработки, результаты в {self.output_dir}")

        try:
            for result in self._process():
                yield result
                if self.stop_event.is_set():
                    self.logger.info("Обработка остановлена пользователем")
                    break
            self.end_time = time.time()
            self.logger.info(f"Обработка завершена за {self.end_time - self.start_time:.1f} сек.")
        except Exception as e:
            self.end_time = time.time()
            elapsed = self.end_time - self.start_time
            self.logger.exception(f"Критическая ошибка при обработке за {elapsed:.1f} сек: {e}")
            if self.save_checkpoint():
                self.logger.info(f"Промежуточный результат сохранен в {self.checkpoint_path}")
            raise

    @abstractmethod
    def _process(self) -> Iterator:
        """
        Реализация конкретной задачи

        Returns:
            generator: результаты по одному на случай
        """
        pass
