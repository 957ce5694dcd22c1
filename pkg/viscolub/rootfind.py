"""Batch scalar root finding for increasing functions.

Every routine works element-wise on numpy arrays: ``fun`` receives an array of abscissae and
returns values of the same shape, so one call drives a whole batch of independent problems.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
from loguru import logger

from viscolub.errors import NoConvergence


if TYPE_CHECKING:
    from collections.abc import Callable

    from numpy.typing import ArrayLike, NDArray

__all__ = ["expand_bracket", "safeguarded_newton"]

_EPS = float(np.finfo(float).eps)
_GROWTH = 2.0


def expand_bracket(
    fun: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    center: ArrayLike,
    radius: ArrayLike,
    *,
    max_doublings: int = 200,
) -> tuple[NDArray[np.float64], NDArray[np.float64]] | None:
    """Grow ``[center - B, center + B]`` geometrically until ``fun`` changes sign on it.

    ``fun`` must be increasing. Returns ``(lower, upper)`` with ``fun(lower) <= 0 <= fun(upper)``
    element-wise, or None when some element never brackets within ``max_doublings``.
    """
    center = np.asarray(center, dtype=float)
    radius = np.broadcast_to(np.asarray(radius, dtype=float), center.shape).copy()
    radius = np.where(radius > 0, radius, np.maximum(1.0, np.abs(center)) * _EPS * 16)

    for doubling in range(max_doublings + 1):
        lower, upper = center - radius, center + radius
        ok = (fun(lower) <= 0) & (fun(upper) >= 0)
        if np.all(ok):
            if doubling:
                logger.debug(f"Bracket found after {doubling} doublings")
            return lower, upper
        radius = np.where(ok, radius, radius * _GROWTH)
        if not np.all(np.isfinite(radius)):
            break

    return None


def safeguarded_newton(
    fun: Callable[[NDArray[np.float64]], tuple[NDArray[np.float64], NDArray[np.float64]]],
    start: ArrayLike,
    lower: ArrayLike,
    upper: ArrayLike,
    *,
    ftol: ArrayLike,
    max_iter: int = 100,
    what: str = "root",
) -> NDArray[np.float64]:
    """Newton iteration kept inside a shrinking bracket, bisecting whenever a step leaves it.

    ``fun`` returns ``(value, slope)`` of an increasing function; ``lower``/``upper`` must
    bracket the root. Converged elements are frozen; the loop stops once every element has
    ``|value| <= ftol`` or a bracket narrower than a few ulps.
    """
    x = np.asarray(start, dtype=float)
    lo = np.broadcast_to(np.asarray(lower, dtype=float), x.shape).copy()
    hi = np.broadcast_to(np.asarray(upper, dtype=float), x.shape).copy()
    x = np.clip(x, lo, hi)
    ftol = np.asarray(ftol, dtype=float)

    for iteration in range(max_iter):
        value, slope = fun(x)
        lo = np.where(value < 0, x, lo)
        hi = np.where(value > 0, x, hi)
        done = (np.abs(value) <= ftol) | (hi - lo <= 4 * _EPS * np.maximum(1.0, np.abs(x)))
        if np.all(done):
            logger.trace(f"{what}: converged in {iteration} Newton iterations")
            return x

        with np.errstate(divide="ignore", invalid="ignore"):
            step = x - value / slope
        outside = ~np.isfinite(step) | (step <= lo) | (step >= hi)
        x = np.where(done, x, np.where(outside, 0.5 * (lo + hi), step))

    worst = float(np.max(np.abs(fun(x)[0])))
    raise NoConvergence(f"{what}: no convergence after {max_iter} iterations (worst residual {worst:.3e})")
