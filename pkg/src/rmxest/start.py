"""Starting estimators: Cramer-von Mises minimum distance, median/MAD, MLE."""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import special
from scipy.optimize import minimize

from .data import Dataset
from .errors import DegenerateScale, InvalidData, OptimizerFailure
from .families import ParametricFamily

# Phi^{-1}(3/4): MAD standardization for consistency at the normal model
MAD_CONSTANT = float(special.ndtri(0.75))

_NM_OPTIONS = {"xatol": 1e-10, "fatol": 1e-16, "maxiter": 20_000, "maxfev": 40_000}
_MLE_OPTIONS = {"xatol": 1e-10, "fatol": 1e-13, "maxiter": 20_000, "maxfev": 40_000}


def weighted_median(values, counts) -> float:
    """Median of the sample with ``counts[i]`` copies of ``values[i]``.

    Even sample sizes average the central pair.
    """
    order = np.argsort(values, kind="stable")
    v = np.asarray(values, dtype=float)[order]
    cum = np.cumsum(np.asarray(counts, dtype=float)[order])
    n = cum[-1]
    lo = v[np.searchsorted(cum, math.floor((n - 1) / 2) + 1)]
    hi = v[np.searchsorted(cum, math.ceil((n - 1) / 2) + 1)]
    return float(0.5 * (lo + hi))


def median_mad(data: Dataset) -> tuple[float, float]:
    """Sample median and MAD standardized by ``Phi^{-1}(0.75)``."""
    med = weighted_median(data.values, data.counts)
    mad = weighted_median(np.abs(data.values - med), data.counts)
    if mad == 0:
        raise DegenerateScale("MAD is zero: more than half of the sample is tied")
    return med, mad / MAD_CONSTANT


def _check_support(family: ParametricFamily, data: Dataset):
    if not np.all(family.support.contains(data.values)):
        raise InvalidData(f"observations outside the support of the {family.name} model")
    if family.name == "gamma" and np.any(data.values <= 0):
        raise InvalidData("gamma observations must be positive")


def mle(family: ParametricFamily, data: Dataset) -> np.ndarray:
    """Comparison estimates: Poisson mean, normal (mean, sd with n - 1), Gamma MLE."""
    _check_support(family, data)
    name = family.name
    if name == "poisson":
        return np.array([data.mean()])
    if name == "normal-loc-scale":
        mean = data.mean()
        var = float(np.dot(data.counts, (data.values - mean) ** 2)) / (data.n - 1)
        if var == 0:
            raise DegenerateScale("sample standard deviation is zero")
        return np.array([mean, math.sqrt(var)])
    start = _moment_start(family, data)
    # mean log-likelihood keeps fatol meaningful for large n
    return _minimize(
        family, lambda th: -float(np.dot(data.weights, family.log_density(th, data.values))), start,
        _MLE_OPTIONS,
    )


def _moment_start(family: ParametricFamily, data: Dataset) -> np.ndarray:
    mean = data.mean()
    var = float(np.dot(data.weights, (data.values - mean) ** 2))
    if family.name == "gamma":
        var = var if var > 0 else mean * mean
        return np.array([var / mean, mean * mean / var])
    if family.name == "normal-loc-scale":
        return np.array([mean, math.sqrt(var) if var > 0 else 1.0])
    if family.name == "poisson":
        return np.array([max(mean, 1e-3)])
    raise OptimizerFailure(f"no moment start for {family.name}")


def _transform(family):
    pos = np.array(family.positive or (False,) * family.dim_param)

    def to_free(th):
        th = np.asarray(th, dtype=float)
        return np.where(pos, np.log(np.where(pos, th, 1.0)), th)

    def to_theta(u):
        u = np.asarray(u, dtype=float)
        return np.where(pos, np.exp(np.where(pos, u, 0.0)), u)

    return pos, to_free, to_theta


def _minimize(family, objective, start, options=None):
    _, to_free, to_theta = _transform(family)

    def obj(u):
        th = to_theta(u)
        if not family.param_domain(th):
            return math.inf
        val = objective(th)
        return val if math.isfinite(val) else math.inf

    res = minimize(obj, to_free(start), method="Nelder-Mead", options=options or _NM_OPTIONS)
    theta = to_theta(res.x)
    if not (res.success and math.isfinite(res.fun)):
        raise OptimizerFailure(f"Nelder-Mead failed: {res.message}", best=theta)
    return theta


# ---------------------------------------------------------------------------
# Cramer-von Mises minimum distance
# ---------------------------------------------------------------------------


def cvm_distance(family: ParametricFamily, theta, data: Dataset) -> float:
    """``int (F_n - F_theta)^2 dF_theta`` computed exactly.

    Continuous models: the integral equals ``int_0^1 (G_n(u) - u)^2 du`` with
    ``G_n`` the empirical CDF of ``u_i = F_theta(x_i)``, a sum of cubic terms
    over the order statistics.  Lattice models: summation over the support.
    """
    theta = family.check(theta)
    w = data.weights
    if family.support.is_lattice:
        lo, hi = family.lattice_range(theta, 1e-14)
        hi = max(hi, int(np.max(data.values)))
        x = np.arange(lo, hi + 1, dtype=float)
        fn = np.cumsum(np.bincount((data.values - lo).astype(int), weights=w, minlength=x.size))[: x.size]
        return float(np.sum((fn - family.cdf(theta, x)) ** 2 * family.density(theta, x)))
    u = np.clip(np.asarray(family.cdf(theta, data.values), dtype=float), 0.0, 1.0)
    t = np.concatenate([[0.0], u, [1.0]])
    level = np.concatenate([[0.0], np.cumsum(w)])
    level[-1] = 1.0
    return float(np.sum(((t[1:] - level) ** 3 - (t[:-1] - level) ** 3) / 3.0))


def _restart_grid(family, center, data):
    pos = np.array(family.positive or (False,) * family.dim_param)
    iqr = data.quantile_sorted(0.75) - data.quantile_sorted(0.25)
    spread = iqr / 1.349 if iqr > 0 else 1.0
    axes = []
    for i, c in enumerate(center):
        if pos[i]:
            axes.append(c * 10.0 ** np.linspace(-1.0, 1.0, 5))
        else:
            axes.append(c + spread * np.linspace(-2.0, 2.0, 5))
    return [np.array(p) for p in itertools.product(*axes)]


def cvm_estimate(family: ParametricFamily, data: Dataset, options=None) -> np.ndarray:
    """Cramer-von Mises minimum-distance estimate.

    Nelder-Mead from the MLE (moment estimate if the MLE is unavailable); when
    a point of the 5x5 restart grid beats the first run, restart from it.
    """
    _check_support(family, data)
    try:
        start = mle(family, data)
    except (DegenerateScale, OptimizerFailure):
        start = _moment_start(family, data)
    if not family.param_domain(start):
        start = np.where(np.array(family.positive or (False,) * family.dim_param), 1.0, start)

    def objective(th):
        return cvm_distance(family, th, data)

    best = None
    try:
        best = _minimize(family, objective, start, options)
    except OptimizerFailure as exc:
        best = exc.best
    best_val = objective(best) if family.param_domain(best) else math.inf
    grid = [g for g in _restart_grid(family, start, data) if family.param_domain(g)]
    grid_vals = [objective(g) for g in grid]
    start_val = objective(start)
    ref = min(grid_vals + [start_val])
    if best_val > ref:
        seed = grid[int(np.argmin(grid_vals))] if min(grid_vals) <= start_val else start
        try:
            cand = _minimize(family, objective, seed, options)
        except OptimizerFailure as exc:
            cand = exc.best
        if family.param_domain(cand) and objective(cand) < best_val:
            best, best_val = cand, objective(cand)
    if not math.isfinite(best_val) or best_val > ref:
        raise OptimizerFailure("CvM minimization did not improve on its starting points", best=best)
    return best


START_METHODS = {
    "cvm": cvm_estimate,
    "mle": mle,
    "median-mad": lambda family, data: np.array(median_mad(data)),
}


def start_estimate(method: str, family: ParametricFamily, data: Dataset) -> np.ndarray:
    if method == "median-mad" and family.name != "normal-loc-scale":
        raise ValueError("median-mad start is only available for the normal location-scale model")
    try:
        fn = START_METHODS[method]
    except KeyError:
        raise ValueError(f"unknown start method {method!r}; choose from {sorted(START_METHODS)}") from None
    return np.asarray(fn(family, data), dtype=float)
