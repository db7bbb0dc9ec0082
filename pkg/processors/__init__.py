"""
Модуль обработчиков задач бенчмарка LAMG
"""

from .base_processor import BaseProcessor
from .solve_processor import SolveProcessor
from .suite_processor import SuiteProcessor
from .hierarchy_processor import HierarchyProcessor

__all__ = [
    'BaseProcessor',
    'SolveProcessor',
    'SuiteProcessor',
    'HierarchyProcessor'
]
