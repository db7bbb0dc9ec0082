"""
Фабрика для создания процессоров различных задач
"""

from pathlib import Path

from logger import setup_logger
from src.config import BenchmarkConfig
from .hierarchy_processor import HierarchyProcessor
from .solve_processor import SolveProcessor
from .suite_processor import SuiteProcessor

logger = setup_logger('processor_factory')

SUITE_SUFFIXES = ('.yaml', '.yml')


def create_processor(target, output_dir=None, hierarchy_only=False, **overrides):
    """
    Фабричный метод для создания подходящего процессора

    Args:
        target: YAML-файл набора, путь к Matrix Market или спецификация генератора gen:...
        output_dir: Каталог результатов
        hierarchy_only: Только построить иерархию и вывести таблицу уровней
        overrides: Параметры BenchmarkConfig (gamma, guard, correction, ...)

    Returns:
        Подходящий процессор для данной задачи
    """
    target = str(target)
    if Path(target).suffix.lower() in SUITE_SUFFIXES:
        logger.info(f"Creating SuiteProcessor for {target}")
        return SuiteProcessor(target, output_dir)

    params = {k: v for k, v in overrides.items() if v is not None}
    if output_dir:
        params['output'] = output_dir
    config = BenchmarkConfig(input=target, **params)
    if hierarchy_only:
        logger.info(f"Creating HierarchyProcessor for {target}")
        return HierarchyProcessor(config)
    logger.info(f"Creating SolveProcessor for {target}")
    return SolveProcessor(config)
