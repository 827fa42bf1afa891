"""Cniper points: where Dirac contamination makes the classical IC lose.

For the classical IC ``psi_h = I^-1 L`` and the minmax risk ``tr A`` at radius
``r``, the cniper region is ``{a : r^2 |psi_h(a)|^2 > tr A - tr I^-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .expectation import SUP_GRID
from .families import ParametricFamily
from .ic import CONTAMINATION, SolverConfig, neighborhood, safe_inverse, solve_contamination_ic

POINTS = "points"
WHOLE_SUPPORT = "whole-support"
EMPTY = "empty"


@dataclass(frozen=True)
class CniperReport:
    theta: tuple
    r: float
    lower_point: float | None
    upper_point: float | None
    region: tuple = field(default_factory=tuple)
    prob_ideal: float = 0.0
    tr_A: float = 0.0
    tr_I_inv: float = 0.0
    status: str = POINTS


def _excess(family, theta, r, inv, gap):
    def g(a):
        lam = family.scores(theta, np.atleast_1d(np.asarray(a, dtype=float)))
        return r * r * np.sum((lam @ inv.T) ** 2, axis=-1) - gap

    return g


def _outer_point(g, x0, direction, limit, scale):
    """Largest excursion from ``x0`` until ``g > 0``; ``None`` if ``limit`` reached."""
    step = scale
    prev = x0
    while True:
        x = x0 + direction * step
        if direction < 0 and x <= limit:
            x = limit
        if direction > 0 and x >= limit:
            x = limit
        if g(x)[0] > 0:
            lo, hi = sorted((prev, x))
            return brentq(lambda v: g(v)[0], lo, hi, xtol=1e-12, rtol=1e-14, maxiter=500)
        if x == limit or step > 1e12 * scale:
            return None
        prev = x
        step *= 2.0


def cniper_points(family: ParametricFamily, theta, r: float, nb: str = CONTAMINATION,
                  config: SolverConfig | None = None) -> CniperReport:
    """Boundary points of the cniper region and its ideal-model probability.

    Lattice models are handled on the continuous extension of the scores.
    """
    if neighborhood(nb) != CONTAMINATION:
        raise ValueError("cniper points are defined for contamination neighborhoods only")
    if r <= 0:
        raise ValueError("cniper points need r > 0")
    theta = family.check(theta)
    _, report = solve_contamination_ic(family, theta, r, config)
    inv = safe_inverse(family.fisher(theta), "Fisher information")
    tr_inv = float(np.trace(inv))
    gap = report.tr_A - tr_inv
    g = _excess(family, theta, r, inv, gap)

    sup = family.support
    lo_q = float(family.quantile(theta, 1e-12))
    hi_q = float(family.quantile(theta, 1.0 - 1e-12))
    if sup.is_lattice:
        lo_q = max(lo_q, sup.lower)
    grid = np.linspace(max(lo_q, sup.lower), hi_q, SUP_GRID)
    grid = grid[(grid > sup.lower) | (sup.is_lattice & (grid >= sup.lower))]
    vals = g(grid)
    i_min = int(np.argmin(vals))
    scale = max(float(grid[-1] - grid[0]) / SUP_GRID, 1e-12)

    if vals[i_min] > 0:
        status = WHOLE_SUPPORT
        lower = upper = None
    else:
        # left side: scan the grid, then extend toward the support boundary
        left = np.nonzero(vals[:i_min] > 0)[0]
        if left.size:
            j = left[-1]
            lower = brentq(lambda v: g(v)[0], grid[j], grid[j + 1], xtol=1e-12, rtol=1e-14)
        else:
            limit = sup.lower if math.isfinite(sup.lower) else -math.inf
            lower = _lower_from(g, float(grid[0]), limit, scale)
        right = np.nonzero(vals[i_min:] > 0)[0]
        if right.size:
            j = i_min + right[0]
            upper = brentq(lambda v: g(v)[0], grid[j - 1], grid[j], xtol=1e-12, rtol=1e-14)
        else:
            limit = sup.upper if math.isfinite(sup.upper) else math.inf
            upper = _outer_point(g, float(grid[-1]), +1, limit, scale)
        status = POINTS if (lower is not None or upper is not None) else EMPTY

    region, prob = _region(family, theta, lower, upper, status)
    return CniperReport(
        theta=tuple(theta.tolist()), r=float(r), lower_point=lower, upper_point=upper,
        region=region, prob_ideal=prob, tr_A=report.tr_A, tr_I_inv=tr_inv, status=status,
    )


def _lower_from(g, x0, limit, scale):
    if math.isfinite(limit):
        edge = float(np.nextafter(limit, x0))
        return _outer_point(g, x0, -1, edge, scale)
    return _outer_point(g, x0, -1, limit, scale)


def _region(family, theta, lower, upper, status):
    sup = family.support
    lo_end, hi_end = sup.lower, sup.upper
    if status == WHOLE_SUPPORT:
        return ((lo_end, hi_end),), 1.0
    if status == EMPTY:
        return (), 0.0
    parts = []
    prob = 0.0
    if lower is not None:
        parts.append((lo_end, lower))
        x = math.floor(lower) if sup.is_lattice else lower
        prob += float(family.cdf(theta, x))
    if upper is not None:
        parts.append((upper, hi_end))
        x = math.ceil(upper) - 1 if sup.is_lattice else upper
        prob += 1.0 - float(family.cdf(theta, x))
    return tuple(parts), prob
