"""Scan-then-golden-section minimization of one-dimensional objectives."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2


def golden_section(f, a, b, tol):
    """Golden-section search for a minimum of ``f`` on [a, b].

    Returns (x, f(x), iterations) with the final interval no wider than
    ``tol``.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x), 0

    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)
    for _ in range(n - 1):
        if yc < yd:
            b, d, yd = d, c, yc
            h *= INV_PHI
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= INV_PHI
            d = a + INV_PHI * h
            yd = f(d)
    if yc < yd:
        return c, yc, n
    return d, yd, n


@dataclass(frozen=True)
class Minimum:
    x: float
    fx: float
    bracket: tuple[float, float]
    iterations: int
    evaluations: int
    at_boundary: bool


def minimize_on_grid(f, grid, rtol=1e-5):
    """Evaluate ``f`` on ``grid``, then polish the best point by golden section.

    The polish runs between the neighbours of the best grid point.  A
    minimum sitting on the first or last grid point is flagged.
    """
    grid = np.asarray(grid, dtype=float)
    vals = np.array([f(x) for x in grid])
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    tol = rtol * max(abs(lo), abs(hi), 1e-300)
    x, fx, it = golden_section(f, lo, hi, tol)
    if vals[i] <= fx:
        x, fx = float(grid[i]), float(vals[i])
    return Minimum(
        x=float(x),
        fx=float(fx),
        bracket=(float(lo), float(hi)),
        iterations=it,
        evaluations=len(grid) + it + 1,
        at_boundary=(i == 0 or i == len(grid) - 1),
    )


def nonnegative_grid(upper, n=40, floor=1e-4):
    """0 followed by ``n`` log-spaced points in [floor * upper, upper]."""
    return np.concatenate(([0.0], upper * np.geomspace(floor, 1.0, n)))
