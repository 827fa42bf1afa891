"""Smooth parametric families: densities, scores, Fisher information.

All families are immutable; evaluations are pure functions of ``(theta, x)``.
Observation arrays of shape ``(m,)`` give scores of shape ``(m, k)``; a scalar
observation gives a ``(k,)`` vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special, stats
from scipy.integrate import quad

from .errors import DegenerateParametrization, InvalidParameter

CONTINUOUS = "continuous"
LATTICE = "lattice"


@dataclass(frozen=True)
class Support:
    """Support descriptor with quadrature hints.

    ``kind`` is ``"continuous"`` (an interval) or ``"lattice"`` (``lower``,
    ``lower + 1``, ...).  The closed interval ``[lower, upper]`` doubles as
    the domain on which score formulas may be evaluated off the lattice.
    """

    kind: str
    lower: float = -math.inf
    upper: float = math.inf

    @property
    def is_lattice(self) -> bool:
        return self.kind == LATTICE

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lower) & (x <= self.upper)
        if self.is_lattice:
            inside &= np.equal(np.floor(x), x)
        return inside


def as_theta(theta) -> np.ndarray:
    return np.atleast_1d(np.asarray(theta, dtype=float))


class ParametricFamily:
    """Base class for an L2-differentiable family ``{P_theta}``.

    Subclasses implement ``_in_domain``, ``density``, ``scores``, ``fisher``,
    ``cdf`` and ``quantile``.  ``log_density`` defaults to ``log(density)``.
    """

    name: str = "family"
    dim_param: int = 1
    param_names: tuple[str, ...] = ()
    support: Support = Support(CONTINUOUS)
    # scores unbounded on the support: classical ICs have infinite bias
    scores_bounded: bool = False
    location_scale: bool = False
    # parameters constrained to (0, inf); optimizers work on their logs
    positive: tuple[bool, ...] = ()

    # --- parameter handling -------------------------------------------------
    def param_domain(self, theta) -> bool:
        theta = as_theta(theta)
        if theta.shape != (self.dim_param,) or not np.all(np.isfinite(theta)):
            return False
        return bool(self._in_domain(theta))

    def _in_domain(self, theta: np.ndarray) -> bool:
        return True

    def check(self, theta) -> np.ndarray:
        theta = as_theta(theta)
        if not self.param_domain(theta):
            raise InvalidParameter(
                f"{self.name}: invalid parameter {theta.tolist()} for "
                f"({', '.join(self.param_names)})"
            )
        return theta

    # --- model functions ----------------------------------------------------
    def density(self, theta, x):
        raise NotImplementedError

    def log_density(self, theta, x):
        with np.errstate(divide="ignore"):
            return np.log(self.density(theta, x))

    def scores(self, theta, x):
        raise NotImplementedError

    def fisher(self, theta) -> np.ndarray:
        raise NotImplementedError

    def cdf(self, theta, x):
        raise NotImplementedError

    def quantile(self, theta, p):
        raise NotImplementedError

    # --- quadrature hints ---------------------------------------------------
    def quad_range(self, theta, eps: float) -> tuple[float, float]:
        """Effective integration range ``[q(eps), q(1 - eps)]``."""
        lo = float(self.quantile(theta, eps))
        hi = float(self.quantile(theta, 1.0 - eps))
        return lo, hi

    def lattice_range(self, theta, tail: float) -> tuple[int, int]:
        """Summation range ``lower..hi`` with omitted upper mass below ``tail``."""
        raise NotImplementedError

    def sample(self, theta, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw from ``P_theta`` (inverse-CDF fallback)."""
        return np.asarray(self.quantile(theta, rng.uniform(size=size)), dtype=float)

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


def _stack_scores(*cols):
    return np.stack(np.broadcast_arrays(*cols), axis=-1)


@dataclass(frozen=True, repr=False)
class NormalLocationScale(ParametricFamily):
    """Normal location and scale, ``theta = (mu, sigma)``."""

    name: str = "normal-loc-scale"
    dim_param: int = 2
    param_names: tuple[str, ...] = ("mean", "sd")
    support: Support = Support(CONTINUOUS)
    location_scale: bool = True
    positive: tuple[bool, ...] = (False, True)

    def _in_domain(self, theta):
        return theta[1] > 0

    def density(self, theta, x):
        mu, sigma = self.check(theta)
        z = (np.asarray(x, dtype=float) - mu) / sigma
        return np.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi))

    def log_density(self, theta, x):
        mu, sigma = self.check(theta)
        z = (np.asarray(x, dtype=float) - mu) / sigma
        return -0.5 * z * z - math.log(sigma) - 0.5 * math.log(2.0 * math.pi)

    def scores(self, theta, x):
        mu, sigma = self.check(theta)
        d = np.asarray(x, dtype=float) - mu
        return _stack_scores(d / sigma**2, (d * d - sigma**2) / sigma**3)

    def fisher(self, theta):
        _, sigma = self.check(theta)
        return np.diag([1.0, 2.0]) / sigma**2

    def cdf(self, theta, x):
        mu, sigma = self.check(theta)
        return special.ndtr((np.asarray(x, dtype=float) - mu) / sigma)

    def quantile(self, theta, p):
        mu, sigma = self.check(theta)
        return mu + sigma * special.ndtri(np.asarray(p, dtype=float))

    def sample(self, theta, rng, size):
        mu, sigma = self.check(theta)
        return rng.normal(mu, sigma, size)

    # location-scale structure: theta -> (0, 1) standard member
    def standard_theta(self) -> np.ndarray:
        return np.array([0.0, 1.0])

    def standardize(self, theta, x):
        mu, sigma = self.check(theta)
        return (np.asarray(x, dtype=float) - mu) / sigma

    def scale(self, theta) -> float:
        return float(self.check(theta)[1])


@dataclass(frozen=True, repr=False)
class GammaScaleShape(ParametricFamily):
    """Gamma family with ``theta = (scale sigma, shape alpha)``."""

    name: str = "gamma"
    dim_param: int = 2
    param_names: tuple[str, ...] = ("scale", "shape")
    support: Support = Support(CONTINUOUS, 0.0, math.inf)
    positive: tuple[bool, ...] = (True, True)

    def _in_domain(self, theta):
        return theta[0] > 0 and theta[1] > 0

    def log_density(self, theta, x):
        sigma, alpha = self.check(theta)
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (
                (alpha - 1.0) * np.log(x)
                - x / sigma
                - alpha * math.log(sigma)
                - special.gammaln(alpha)
            )
        return np.where(x > 0, out, -np.inf)

    def density(self, theta, x):
        return np.exp(self.log_density(theta, x))

    def scores(self, theta, x):
        sigma, alpha = self.check(theta)
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return _stack_scores(
                x / sigma**2 - alpha / sigma,
                np.log(x / sigma) - special.digamma(alpha),
            )

    def fisher(self, theta):
        sigma, alpha = self.check(theta)
        return np.array(
            [[alpha / sigma**2, 1.0 / sigma], [1.0 / sigma, special.polygamma(1, alpha)]]
        )

    def cdf(self, theta, x):
        sigma, alpha = self.check(theta)
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return special.gammainc(alpha, x / sigma)

    def quantile(self, theta, p):
        sigma, alpha = self.check(theta)
        return sigma * special.gammaincinv(alpha, np.asarray(p, dtype=float))

    def sample(self, theta, rng, size):
        sigma, alpha = self.check(theta)
        return rng.gamma(alpha, sigma, size)


@dataclass(frozen=True, repr=False)
class PoissonFamily(ParametricFamily):
    """Poisson family with mean ``theta``; support is the lattice 0, 1, 2, ..."""

    name: str = "poisson"
    dim_param: int = 1
    param_names: tuple[str, ...] = ("lambda",)
    support: Support = Support(LATTICE, 0.0, math.inf)
    positive: tuple[bool, ...] = (True,)

    def _in_domain(self, theta):
        return theta[0] > 0

    def log_density(self, theta, x):
        (lam,) = self.check(theta)
        x = np.asarray(x, dtype=float)
        with np.errstate(invalid="ignore"):
            out = x * math.log(lam) - lam - special.gammaln(x + 1.0)
        return np.where(self.support.contains(x), out, -np.inf)

    def density(self, theta, x):
        return np.exp(self.log_density(theta, x))

    def scores(self, theta, x):
        (lam,) = self.check(theta)
        x = np.asarray(x, dtype=float)
        return (x / lam - 1.0)[..., None]

    def fisher(self, theta):
        (lam,) = self.check(theta)
        return np.array([[1.0 / lam]])

    def cdf(self, theta, x):
        (lam,) = self.check(theta)
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, special.pdtr(np.floor(np.maximum(x, 0.0)), lam))

    def quantile(self, theta, p):
        (lam,) = self.check(theta)
        return stats.poisson.ppf(np.asarray(p, dtype=float), lam)

    def sample(self, theta, rng, size):
        (lam,) = self.check(theta)
        return rng.poisson(lam, size).astype(float)

    def lattice_range(self, theta, tail):
        (lam,) = self.check(theta)
        hi = int(stats.poisson.isf(tail, lam)) + 1
        while special.pdtrc(hi, lam) >= tail:
            hi += 1
        return 0, hi


# ---------------------------------------------------------------------------
# exponential families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentialFamilySpec:
    """``p_theta(x) = exp(zeta(theta)' T(x) - beta(theta)) h(x)``.

    ``statistic`` maps an ``(m,)`` array to ``(m, k)``; ``carrier`` to ``(m,)``.
    ``cdf``/``quantile`` are optional; without them the CDF is integrated
    numerically and inverted by bisection.
    """

    zeta: Callable
    jacobian_zeta: Callable
    statistic: Callable
    carrier: Callable
    log_normalizer: Callable
    support: Support
    param_names: tuple[str, ...]
    param_domain: Callable = lambda theta: True
    cdf: Callable | None = None
    quantile: Callable | None = None
    name: str = "exponential-family"


@dataclass(frozen=True, repr=False)
class ExponentialFamily(ParametricFamily):
    """Family built from an :class:`ExponentialFamilySpec`.

    Scores are ``J'(T - E T)`` and Fisher information ``J' Cov(T) J`` with the
    moments of ``T`` computed by the expectation engine.
    """

    spec: ExponentialFamilySpec = None
    name: str = "exponential-family"
    dim_param: int = 1
    param_names: tuple[str, ...] = ()
    support: Support = Support(CONTINUOUS)

    def _in_domain(self, theta):
        return bool(self.spec.param_domain(theta))

    def jacobian(self, theta) -> np.ndarray:
        theta = self.check(theta)
        jac = np.atleast_2d(np.asarray(self.spec.jacobian_zeta(theta), dtype=float))
        if jac.shape != (self.dim_param, self.dim_param):
            raise DegenerateParametrization(f"Jacobian has shape {jac.shape}")
        if not np.all(np.isfinite(jac)) or np.linalg.cond(jac) > 1e12:
            raise DegenerateParametrization(
                f"singular Jacobian of the natural parameter at {theta.tolist()}"
            )
        return jac

    def _statistic(self, x):
        x = np.asarray(x, dtype=float)
        t = np.asarray(self.spec.statistic(np.atleast_1d(x)), dtype=float)
        t = t.reshape(np.atleast_1d(x).shape + (self.dim_param,))
        return t.reshape(x.shape + (self.dim_param,))

    def log_density(self, theta, x):
        theta = self.check(theta)
        x = np.asarray(x, dtype=float)
        zeta = np.atleast_1d(np.asarray(self.spec.zeta(theta), dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            h = np.asarray(self.spec.carrier(x), dtype=float)
            out = self._statistic(x) @ zeta - float(self.spec.log_normalizer(theta)) + np.log(h)
        return np.where(self.support.contains(x) & (h > 0), out, -np.inf)

    def density(self, theta, x):
        return np.exp(self.log_density(theta, x))

    def statistic_moments(self, theta) -> tuple[np.ndarray, np.ndarray]:
        return _exp_moments(self, tuple(self.check(theta).tolist()))

    def scores(self, theta, x):
        jac = self.jacobian(theta)
        mean, _ = self.statistic_moments(theta)
        return (self._statistic(x) - mean) @ jac

    def fisher(self, theta):
        jac = self.jacobian(theta)
        _, cov = self.statistic_moments(theta)
        out = jac.T @ cov @ jac
        return 0.5 * (out + out.T)

    def cdf(self, theta, x):
        if self.spec.cdf is not None:
            return self.spec.cdf(self.check(theta), x)
        return np.vectorize(lambda v: _numeric_cdf(self, tuple(self.check(theta)), float(v)))(x)

    def quantile(self, theta, p):
        if self.spec.quantile is not None:
            return self.spec.quantile(self.check(theta), p)
        theta = tuple(self.check(theta).tolist())
        return np.vectorize(lambda q: _bisect_quantile(self, theta, float(q)))(p)

    def lattice_range(self, theta, tail):
        lo = int(self.support.lower)
        hi = lo
        while 1.0 - float(self.cdf(theta, hi)) >= tail:
            hi = lo + max(2 * (hi - lo), 16)
        return lo, hi


@lru_cache(maxsize=4096)
def _exp_moments(family: ExponentialFamily, theta: tuple):
    from .expectation import expect

    t_mean = np.atleast_1d(expect(family, theta, family._statistic))
    second = np.atleast_2d(
        expect(family, theta, lambda x: _outer_rows(family._statistic(x)))
    )
    cov = second - np.outer(t_mean, t_mean)
    return t_mean, 0.5 * (cov + cov.T)


def _outer_rows(t):
    return t[:, :, None] * t[:, None, :]


def _numeric_cdf(family: ExponentialFamily, theta: tuple, x: float) -> float:
    theta = np.asarray(theta)
    sup = family.support
    if sup.is_lattice:
        if x < sup.lower:
            return 0.0
        pts = np.arange(sup.lower, math.floor(x) + 1)
        return float(min(1.0, np.sum(family.density(theta, pts))))
    if x <= sup.lower:
        return 0.0
    val, _ = quad(lambda v: float(family.density(theta, v)), sup.lower, x, limit=200, epsabs=1e-14)
    return float(min(1.0, max(0.0, val)))


def _bisect_quantile(family: ExponentialFamily, theta: tuple, p: float) -> float:
    if family.support.is_lattice:
        x = family.support.lower
        while _numeric_cdf(family, theta, x) < p:
            x += 1
        return float(x)
    lo = family.support.lower if math.isfinite(family.support.lower) else -1.0
    hi = family.support.upper if math.isfinite(family.support.upper) else 1.0
    while not math.isfinite(family.support.lower) and _numeric_cdf(family, theta, lo) > p:
        lo = 2.0 * lo - 1.0
    while not math.isfinite(family.support.upper) and _numeric_cdf(family, theta, hi) < p:
        hi = 2.0 * hi + 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = _numeric_cdf(family, theta, mid)
        if abs(fm - p) < 1e-12 or hi - lo < 1e-14 * max(1.0, abs(mid)):
            return mid
        if fm < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def family_from_exponential(spec: ExponentialFamilySpec) -> ExponentialFamily:
    """Build a :class:`ParametricFamily` from an exponential-family spec."""
    return ExponentialFamily(
        spec=spec,
        name=spec.name,
        dim_param=len(spec.param_names),
        param_names=tuple(spec.param_names),
        support=spec.support,
    )


def make_normal_loc_scale() -> NormalLocationScale:
    return NormalLocationScale()


def make_gamma() -> GammaScaleShape:
    return GammaScaleShape()


def make_poisson() -> PoissonFamily:
    return PoissonFamily()


FAMILIES: dict[str, Callable[[], ParametricFamily]] = {
    "normal-loc-scale": make_normal_loc_scale,
    "gamma": make_gamma,
    "poisson": make_poisson,
}


def get_family(name: str) -> ParametricFamily:
    try:
        return FAMILIES[name]()
    except KeyError:
        raise InvalidParameter(f"unknown model {name!r}; choose from {sorted(FAMILIES)}") from None


@dataclass(frozen=True)
class SelfCheck:
    """Numeric verification of score centering, Fisher identity and mass."""

    mean_score: float
    cov_residual: float
    mass_residual: float

    def max_residual(self) -> float:
        return max(self.mean_score, self.cov_residual, self.mass_residual)


def self_check(family: ParametricFamily, theta, config=None) -> SelfCheck:
    """Report ``|E L|``, ``max|Cov L - I| / max|I|`` and ``|int p - 1|``."""
    from .expectation import expect, total_mass

    theta = family.check(theta)
    mean = np.atleast_1d(expect(family, theta, lambda x: family.scores(theta, x), config))
    second = np.atleast_2d(
        expect(family, theta, lambda x: _outer_rows(family.scores(theta, x)), config)
    )
    info = family.fisher(theta)
    cov_res = float(np.max(np.abs(second - info)) / np.max(np.abs(info)))
    mass = total_mass(family, theta, config)
    return SelfCheck(
        mean_score=float(np.linalg.norm(mean)),
        cov_residual=cov_res,
        mass_residual=abs(mass - 1.0),
    )


def normal_spec() -> ExponentialFamilySpec:
    """Normal location-scale written as an exponential family."""

    def zeta(th):
        mu, s = th
        return np.array([mu / s**2, -0.5 / s**2])

    def jac(th):
        mu, s = th
        return np.array([[1.0 / s**2, -2.0 * mu / s**3], [0.0, 1.0 / s**3]])

    return ExponentialFamilySpec(
        zeta=zeta,
        jacobian_zeta=jac,
        statistic=lambda x: np.stack([x, x * x], axis=-1),
        carrier=lambda x: np.full(np.shape(x), 1.0 / math.sqrt(2.0 * math.pi)),
        log_normalizer=lambda th: th[0] ** 2 / (2.0 * th[1] ** 2) + math.log(th[1]),
        support=Support(CONTINUOUS),
        param_names=("mean", "sd"),
        param_domain=lambda th: th[1] > 0,
        cdf=lambda th, x: special.ndtr((np.asarray(x) - th[0]) / th[1]),
        quantile=lambda th, p: th[0] + th[1] * special.ndtri(np.asarray(p)),
        name="normal-expfam",
    )


def gamma_spec() -> ExponentialFamilySpec:
    """Gamma (scale, shape) with ``zeta = (-1/sigma, alpha)``, ``T = (x, log x)``."""

    def jac(th):
        s, _ = th
        return np.array([[1.0 / s**2, 0.0], [0.0, 1.0]])

    def carrier(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(x > 0, 1.0 / np.where(x > 0, x, 1.0), 0.0)

    def statistic(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.stack([x, np.log(x)], axis=-1)

    return ExponentialFamilySpec(
        zeta=lambda th: np.array([-1.0 / th[0], th[1]]),
        jacobian_zeta=jac,
        statistic=statistic,
        carrier=carrier,
        log_normalizer=lambda th: th[1] * math.log(th[0]) + special.gammaln(th[1]),
        support=Support(CONTINUOUS, 0.0, math.inf),
        param_names=("scale", "shape"),
        param_domain=lambda th: th[0] > 0 and th[1] > 0,
        cdf=lambda th, x: special.gammainc(th[1], np.maximum(np.asarray(x, dtype=float), 0) / th[0]),
        quantile=lambda th, p: th[0] * special.gammaincinv(th[1], np.asarray(p)),
        name="gamma-expfam",
    )


def poisson_spec() -> ExponentialFamilySpec:
    """Poisson with natural parameter ``log theta`` and ``T(x) = x``."""

    def carrier(x):
        x = np.asarray(x, dtype=float)
        return np.exp(-special.gammaln(np.maximum(x, 0.0) + 1.0))

    return ExponentialFamilySpec(
        zeta=lambda th: np.array([math.log(th[0])]),
        jacobian_zeta=lambda th: np.array([[1.0 / th[0]]]),
        statistic=lambda x: np.asarray(x, dtype=float)[..., None],
        carrier=carrier,
        log_normalizer=lambda th: th[0],
        support=Support(LATTICE, 0.0, math.inf),
        param_names=("lambda",),
        param_domain=lambda th: th[0] > 0,
        cdf=lambda th, x: special.pdtr(np.floor(np.maximum(np.asarray(x, dtype=float), 0)), th[0]),
        quantile=lambda th, p: stats.poisson.ppf(p, th[0]),
        name="poisson-expfam",
    )
