"""Relative MSE, least favorable radius and the radius-minmax IC."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NoCrossing
from .ic import CONTAMINATION, SolverConfig, neighborhood, solve_ic

DEFAULT_TOL = 1e-4


@dataclass(frozen=True)
class RadiusInterval:
    r_lo: float
    r_up: float

    def __post_init__(self):
        if not (0.0 <= self.r_lo < self.r_up < math.inf):
            raise ValueError(f"need 0 <= r_lo < r_up < inf, got [{self.r_lo}, {self.r_up}]")

    @classmethod
    def from_sizes(cls, eps_lo: float, eps_up: float, n: int) -> "RadiusInterval":
        """Radii ``sqrt(n) * eps`` for contamination sizes ``eps``."""
        root = math.sqrt(n)
        return cls(root * eps_lo, root * eps_up)


class _Search:
    """Per-search cache of solved ICs keyed by exact radius."""

    def __init__(self, family, theta, nb, config):
        self.family = family
        self.theta = theta
        self.nb = neighborhood(nb)
        self.config = config
        self.cache: dict[float, tuple] = {}

    def solve(self, r: float):
        r = float(r)
        if r not in self.cache:
            self.cache[r] = solve_ic(self.family, self.theta, r, self.nb, self.config, self._warm(r))
        return self.cache[r]

    def _warm(self, r):
        # multipliers of the nearest solved positive radius
        near = [s for s in self.cache if s > 0]
        if self.nb != CONTAMINATION or not near:
            return None
        ic = self.cache[min(near, key=lambda s: abs(s - r))][0]
        return ic.A, ic.z, ic.b

    def max_risk(self, r: float) -> float:
        return self.solve(r)[1].mse

    def rel_mse(self, s: float, r: float) -> float:
        _, rep_s = self.solve(s)
        # E|psi_s|^2 + r^2 omega(psi_s)^2 over the minmax risk at r
        w = rep_s.bias_bound
        if r == 0:
            num = rep_s.variance
        elif math.isinf(w):
            return math.inf
        else:
            num = rep_s.variance + r * r * w * w
        return num / self.max_risk(r)


def rel_mse(family, theta, s: float, r: float, nb: str = CONTAMINATION,
            config: SolverConfig | None = None) -> float:
    """``MSE(psi*_s, r) / MSE(psi*_r, r)``."""
    return _Search(family, family.check(theta), nb, config).rel_mse(s, r)


def _least_favorable(search: _Search, interval: RadiusInterval, tol: float) -> float:
    lo, up = interval.r_lo, interval.r_up
    if up - lo < tol:
        return 0.5 * (lo + up)

    def g(s):
        return search.rel_mse(s, lo) - search.rel_mse(s, up)

    a, b = lo, up
    ga, gb = g(a), g(b)
    if not (ga < 0 < gb):
        raise NoCrossing(
            "relative MSE difference does not change sign on the radius interval",
            endpoint_values=(ga, gb),
        )
    for _ in range(200):
        mid = 0.5 * (a + b)
        gm = g(mid)
        if abs(gm) < tol or (b - a) < 1e-12 * max(1.0, b):
            return mid
        if gm < 0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def least_favorable_radius(family, theta, interval: RadiusInterval, nb: str = CONTAMINATION,
                           tol: float = DEFAULT_TOL, config: SolverConfig | None = None) -> float:
    """Radius ``r0`` equalizing the relative MSE at both interval endpoints.

    Bisection on ``g(s) = relMSE(s, r_lo) - relMSE(s, r_up)``, which is
    negative at ``r_lo`` and positive at ``r_up``.
    """
    search = _Search(family, family.check(theta), nb, config)
    return _least_favorable(search, interval, tol)


def rmx_ic(family, theta, interval: RadiusInterval, nb: str = CONTAMINATION,
           tol: float = DEFAULT_TOL, config: SolverConfig | None = None):
    """Radius-minmax IC: returns ``(ic, report, r0)``."""
    search = _Search(family, family.check(theta), nb, config)
    r0 = _least_favorable(search, interval, tol)
    ic, report = search.solve(r0)
    return ic, report, r0


def rmx_inefficiency(family, theta, interval: RadiusInterval, r0: float, nb: str = CONTAMINATION,
                     config: SolverConfig | None = None) -> tuple[float, float]:
    """Relative MSE of ``psi*_{r0}`` at ``r_lo`` and ``r_up``."""
    search = _Search(family, family.check(theta), nb, config)
    return search.rel_mse(r0, interval.r_lo), search.rel_mse(r0, interval.r_up)
