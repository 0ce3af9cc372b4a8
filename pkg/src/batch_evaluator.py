"""Evaluate a scalar function over a grid, optionally on worker threads."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.errors import ParameterError
from src.params import Curve

logger = logging.getLogger(__name__)


def linspace_grid(lo: float, hi: float, points: int) -> Tuple[float, ...]:
    """
    Equispaced grid from lo to hi inclusive.

    Example:
        >>> linspace_grid(0.0, 1.0, 3)
        (0.0, 0.5, 1.0)
    """
    if points < 1:
        raise ParameterError(f"points must be >= 1, got {points}")
    if points > 1 and not hi > lo:
        raise ParameterError(f"grid needs x_max > x_min, got [{lo}, {hi}]")
    return tuple(float(x) for x in np.linspace(lo, hi, points))


def evaluate_curve(
    func: Callable[[float], float],
    grid: Sequence[float],
    threads: int = 1,
    meta: Optional[Mapping[str, str]] = None,
) -> Curve:
    """
    Evaluate func at every grid point and wrap the values in a Curve.

    Args:
        func: Scalar function of the abscissa
        grid: Strictly increasing abscissae
        threads: Worker count; one task per point, values kept in grid order
        meta: Metadata copied onto the curve

    Returns:
        Curve over the grid

    Raises:
        Whatever func raises at the first failing point
    """
    if threads < 1:
        raise ParameterError(f"threads must be >= 1, got {threads}")
    points = [float(x) for x in grid]
    logger.debug("evaluating %d grid points on %d threads", len(points), threads)
    if threads == 1 or len(points) < 2:
        values = [func(x) for x in points]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(func, points))
    return Curve(tuple(points), tuple(values), dict(meta or {}))
