import re
from typing import Tuple

import numpy as np


def numba_jit_if_available():
    try:
        from numba import jit
        return jit
    except ImportError:
        return lambda f: f


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def spawn_rngs(seed: int, count: int) -> list:
    """One independent generator per stream, reproducible from a single seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def uniform_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, size=n)


def parse_grid_size(text: str) -> Tuple[int, int]:
    """'512x512' -> (512, 512); '1000' -> (1000, 1)."""
    match = re.fullmatch(r"\s*(\d+)\s*(?:[xX]\s*(\d+))?\s*", text)
    if not match:
        raise ValueError(f"Bad size '{text}', expected N or N1xN2")
    n1 = int(match.group(1))
    n2 = int(match.group(2)) if match.group(2) else 1
    return n1, n2


def slugify(text: str) -> str:
    return re.sub(r'[^A-Za-z0-9_.-]+', '_', text).strip('_') or 'graph'
