"""One-step construction and the full estimation pipeline."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import InvalidStart, OutOfSupport
from .families import ParametricFamily
from .ic import CONTAMINATION, InfluenceCurve, SolverConfig, neighborhood, solve_ic
from .rmx import DEFAULT_TOL, RadiusInterval, rmx_ic
from .start import start_estimate


@dataclass
class EstimationReport:
    family: str
    param_names: tuple
    start_method: str
    start: np.ndarray
    neighborhood: str
    r_lo: float | None
    r_up: float | None
    r0: float
    final: np.ndarray
    A: np.ndarray
    a: np.ndarray
    b: float
    c: float | None
    variance: float
    mse: float
    tr_A: float | None
    residuals: dict
    n: int
    eps: tuple | None = None
    theta_shift: float = 0.0
    approximate: bool = False
    ic_values: np.ndarray | None = field(default=None, repr=False)
    ic: InfluenceCurve | None = field(default=None, repr=False)

    @property
    def shift(self) -> np.ndarray:
        return self.final - self.start


def ic_extension_eval(ic: InfluenceCurve, x) -> np.ndarray:
    """Evaluate the IC formula at real ``x`` in the closure of the support.

    For lattice models this extends the IC off the lattice; clipping keeps
    ``|psi(x)| <= b`` everywhere.
    """
    x = np.asarray(x, dtype=float)
    sup = ic.family.support
    if np.any((x < sup.lower) | (x > sup.upper)) or not np.all(np.isfinite(x)):
        raise OutOfSupport(f"points outside [{sup.lower}, {sup.upper}]")
    return ic.eval(x)


def _mean_ic(ic: InfluenceCurve, data: Dataset) -> tuple[np.ndarray, np.ndarray]:
    vals = ic_extension_eval(ic, data.values)
    # fixed summation order: sorted distinct values
    return np.tensordot(data.weights, vals, axes=(0, 0)), vals


def one_step(family: ParametricFamily, theta_start, data: Dataset, spec, nb: str = CONTAMINATION,
             config: SolverConfig | None = None, steps: int = 1, keep_ic_values: bool = False,
             start_method: str = "given", tol: float = DEFAULT_TOL) -> EstimationReport:
    """``S_n = theta + mean(psi*_theta(x_i))`` for a fixed radius or an rmx interval.

    ``spec`` is a radius (float) or a :class:`RadiusInterval`.  ``steps > 1``
    iterates the construction (not used by the reproduction pipeline).
    """
    nb = neighborhood(nb)
    start = np.atleast_1d(np.asarray(theta_start, dtype=float))
    if not family.param_domain(start):
        raise InvalidStart(f"start {start.tolist()} outside the parameter domain of {family.name}")
    theta = start
    for _ in range(max(1, int(steps))):
        if isinstance(spec, RadiusInterval):
            ic, rep, r0 = rmx_ic(family, theta, spec, nb, tol, config)
            r_lo, r_up = spec.r_lo, spec.r_up
        else:
            r0 = float(spec)
            ic, rep = solve_ic(family, theta, r0, nb, config)
            r_lo = r_up = None
        correction, vals = _mean_ic(ic, data)
        final = theta + correction
        theta_used, theta = theta, final
    return EstimationReport(
        family=family.name,
        param_names=family.param_names,
        start_method=start_method,
        start=start,
        neighborhood=nb,
        r_lo=r_lo,
        r_up=r_up,
        r0=r0,
        final=final,
        A=ic.A,
        a=ic.a,
        b=ic.b,
        c=ic.c,
        variance=rep.variance,
        mse=rep.mse,
        tr_A=rep.tr_A,
        residuals=dict(rep.residuals),
        n=data.n,
        theta_shift=ic.theta_shift,
        approximate=rep.approximate,
        ic_values=vals if keep_ic_values else None,
        ic=ic if theta_used is start else None,
    )


def roptest_pipeline(family: ParametricFamily, data: Dataset, eps_lo: float, eps_up: float,
                     nb: str = CONTAMINATION, start_method: str = "cvm",
                     config: SolverConfig | None = None, start=None) -> EstimationReport:
    """Radius-minmax one-step estimate for contamination sizes in ``[eps_lo, eps_up]``.

    Radii are ``sqrt(n) * eps``.  ``start`` overrides the starting estimator.
    """
    if not (0.0 <= eps_lo < eps_up <= 0.5):
        raise ValueError(f"need 0 <= eps_lo < eps_up <= 0.5, got [{eps_lo}, {eps_up}]")
    interval = RadiusInterval.from_sizes(eps_lo, eps_up, data.n)
    theta0 = start_estimate(start_method, family, data) if start is None else np.asarray(start)
    report = one_step(family, theta0, data, interval, nb, config, start_method=start_method)
    report.eps = (eps_lo, eps_up)
    return report


def shift_within_bound(report: EstimationReport, slack: float = 1e-9) -> bool:
    return float(np.linalg.norm(report.shift)) <= report.b + slack if math.isfinite(report.b) else True
