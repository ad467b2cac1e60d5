"""Order-preserving fan-out used by the saturation and enumeration loops."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, TypeVar

__all__ = ["ordered_map"]

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """Apply ``fn`` to every item and return results in input order.

    ``fn`` must be a module-level function when ``workers > 1`` so that it pickles.
    """
    batch = list(items)
    if workers <= 1 or len(batch) <= 1:
        return [fn(item) for item in batch]
    logging.debug("Fanning out %d tasks over %d workers", len(batch), workers)
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, batch))
