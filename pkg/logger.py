import logging
from pathlib import Path
from typing import Optional

# Application loggers live under one namespace; solver modules log as `src.<module>`
NAMESPACE = 'lamg'
SOLVER_PACKAGE = 'src'

LOG_FORMAT = '%(asctime)s %(levelname)-7s %(name)s | %(message)s'
DATE_FORMAT = '%H:%M:%S'


def _has_file_handler(logger: logging.Logger, path: Path) -> bool:
    return any(isinstance(h, logging.FileHandler) and Path(h.baseFilename) == path for h in logger.handlers)


def _attach_handlers(logger: logging.Logger, log_file: Optional[str], fmt: logging.Formatter) -> None:
    if not any(type(h) is logging.StreamHandler for h in logger.handlers):
        ch = logging.StreamHandler()
        ch.setFormatter(fmt)
        logger.addHandler(ch)
    if log_file:
        path = Path(log_file).resolve()
        if not _has_file_handler(logger, path):
            fh = logging.FileHandler(path, encoding='utf-8')
            fh.setFormatter(fmt)
            logger.addHandler(fh)
    logger.propagate = False


def setup_logger(name: str, log_file: Optional[str] = None, level: int = logging.INFO) -> logging.Logger:
    """Logger `lamg.<name>`; the namespace root and the solver package share its handlers.

    Calling it again (one call per processor instance) adds no duplicate handlers.
    """
    qualified = name if name == NAMESPACE or name.startswith(NAMESPACE + '.') else f'{NAMESPACE}.{name}'
    fmt = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
    for root_name in (NAMESPACE, SOLVER_PACKAGE):
        root = logging.getLogger(root_name)
        _attach_handlers(root, log_file, fmt)
        if root.level == logging.NOTSET or root.level > level:
            root.setLevel(level)

    logger = logging.getLogger(qualified)
    logger.setLevel(level)
    return logger
