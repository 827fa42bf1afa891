import math

import numpy as np
import pytest

from rmxest.errors import DegenerateParametrization, InvalidParameter
from rmxest.expectation import expect
from rmxest.families import (
    ExponentialFamilySpec,
    Support,
    family_from_exponential,
    gamma_spec,
    get_family,
    normal_spec,
    poisson_spec,
    self_check,
)

EULER = 0.5772156649015329


def _digamma_series(x, terms=200_000):
    # psi(x) = -gamma + sum_{n>=0} (1/(n+1) - 1/(n+x)), tail corrected to O(1/N^2)
    n = np.arange(terms, dtype=float)
    s = np.sum(1.0 / (n + 1.0) - 1.0 / (n + x))
    return -EULER + s + (x - 1.0) / terms


def test_digamma_oracles(gamma):
    # series oracle at 1, recurrence psi(x+1) = psi(x) + 1/x at 3
    assert _digamma_series(1.0) == pytest.approx(-EULER, abs=1e-12)
    psi3 = -EULER + 1.0 + 0.5
    assert abs(_digamma_series(3.0) - psi3) < 1e-9
    s = gamma.scores((1.0, 1.0), np.array([1.0]))[0]
    assert s == pytest.approx([0.0, EULER], abs=1e-12)
    s = gamma.scores((2.0, 3.0), np.array([6.0]))[0]
    assert s == pytest.approx([0.0, math.log(3.0) - psi3], abs=1e-12)
    assert s[1] == pytest.approx(0.17583, abs=1e-5)


def test_normal_scores_and_fisher(normal):
    assert normal.scores((0.0, 1.0), np.array([0.0, 1.0])) == pytest.approx(np.array([[0, -1], [1, 0]]))
    info = expect(normal, (0.0, 1.0), lambda x: np.einsum("mi,mj->mij", *(normal.scores((0.0, 1.0), x),) * 2))
    assert info == pytest.approx(np.diag([1.0, 2.0]), abs=1e-8)
    assert normal.fisher((0.0, 1.0)) == pytest.approx(np.diag([1.0, 2.0]))


def test_gamma_fisher_oracle(gamma):
    th = (1.0, 1.0)
    info = expect(gamma, th, lambda x: np.einsum("mi,mj->mij", gamma.scores(th, x), gamma.scores(th, x)))
    assert info == pytest.approx(gamma.fisher(th), abs=1e-7)
    assert gamma.fisher(th) == pytest.approx(np.array([[1, 1], [1, math.pi**2 / 6]]), abs=1e-12)


def test_poisson_scores_and_fisher(poisson):
    assert poisson.scores(1.0, np.array([1.0]))[0, 0] == 0.0
    assert poisson.scores(3.9, np.array([0.0]))[0, 0] == -1.0
    x = np.arange(0, 200, dtype=float)
    p = np.exp(x * math.log(4.0) - 4.0 - np.array([math.lgamma(v + 1) for v in x]))
    assert float(np.sum(p * (x / 4.0 - 1.0) ** 2)) == pytest.approx(0.25, abs=1e-12)
    assert poisson.fisher(4.0)[0, 0] == pytest.approx(0.25)


@pytest.mark.parametrize("name,theta", [
    ("normal-loc-scale", (0.0, 0.0)), ("normal-loc-scale", (0.0, -1.0)),
    ("gamma", (0.0, 1.0)), ("gamma", (1.0, -2.0)), ("poisson", (0.0,)), ("poisson", (-1.0,)),
])
def test_invalid_parameters(name, theta):
    with pytest.raises(InvalidParameter):
        get_family(name).scores(theta, np.array([1.0]))


def test_gamma_support(gamma):
    from rmxest.data import Dataset
    from rmxest.errors import InvalidData
    from rmxest.start import mle

    assert gamma.density((1.0, 2.0), np.array([-1.0, 0.0])) == pytest.approx([0.0, 0.0])
    with pytest.raises(InvalidData):
        mle(gamma, Dataset.from_observations([0.0, 1.0, 2.0]))


def test_expfam_poisson_matches(poisson):
    fam = family_from_exponential(poisson_spec())
    x = np.arange(0, 51, dtype=float)
    for lam in (0.5, 3.9, 12.0):
        assert np.max(np.abs(fam.scores((lam,), x) - poisson.scores(lam, x))) < 1e-9
        assert fam.fisher((lam,)) == pytest.approx(poisson.fisher(lam), rel=1e-9)


def test_expfam_normal_matches(normal):
    fam = family_from_exponential(normal_spec())
    th = (3.2, 0.7)
    x = np.linspace(-1.0, 7.0, 101)
    assert np.max(np.abs(fam.scores(th, x) - normal.scores(th, x))) < 1e-9


def test_expfam_gamma_matches(gamma):
    fam = family_from_exponential(gamma_spec())
    for th in ((5.0, 1.9), (1.0, 1.0), (0.5, 4.0)):
        assert np.max(np.abs(fam.fisher(th) - gamma.fisher(th))) < 1e-6
        x = np.linspace(0.1, 20.0, 50)
        assert np.max(np.abs(fam.scores(th, x) - gamma.scores(th, x))) < 1e-7


def test_expfam_singular_jacobian():
    spec = ExponentialFamilySpec(
        zeta=lambda th: np.array([0.0 * th[0]]),
        jacobian_zeta=lambda th: np.array([[0.0]]),
        statistic=lambda x: np.asarray(x, float)[..., None],
        carrier=lambda x: np.exp(-0.5 * np.asarray(x) ** 2) / math.sqrt(2 * math.pi),
        log_normalizer=lambda th: 0.0,
        support=Support("continuous"),
        param_names=("t",),
    )
    with pytest.raises(DegenerateParametrization):
        family_from_exponential(spec).scores((1.0,), np.array([0.0]))


def test_expfam_numeric_cdf_and_quantile(normal_location):
    spec = normal_location.spec
    bare = ExponentialFamilySpec(**{**spec.__dict__, "cdf": None, "quantile": None})
    fam = family_from_exponential(bare)
    assert float(fam.cdf((0.5,), 1.5)) == pytest.approx(0.8413447460685429, abs=1e-9)
    assert float(fam.quantile((0.5,), 0.975)) == pytest.approx(0.5 + 1.959963984540054, abs=1e-7)


@pytest.mark.parametrize("name,theta,tol", [
    ("normal-loc-scale", (0.0, 1.0), 1e-7),
    ("poisson", (3.9,), 1e-9),
    ("gamma", (5.0, 1.9), 1e-6),
])
def test_self_check(name, theta, tol):
    rep = self_check(get_family(name), theta)
    assert rep.mean_score < tol and rep.cov_residual < tol and rep.mass_residual < tol


THETA_GRID = {
    "normal-loc-scale": [(0.0, 1.0), (3.2, 0.7), (-5.0, 2.0), (100.0, 0.01), (1.0, 30.0)],
    "gamma": [(5.0, 1.9), (1.0, 1.0), (0.3, 0.6), (2.0, 10.0), (10.0, 3.0)],
    "poisson": [(0.2,), (1.0,), (3.9,), (20.0,), (150.0,)],
}


@pytest.mark.parametrize("name", sorted(THETA_GRID))
def test_score_invariants_on_grid(name):
    fam = get_family(name)
    for th in THETA_GRID[name]:
        rep = self_check(fam, th)
        assert rep.mean_score < 1e-7 * max(1.0, np.sqrt(np.max(np.abs(fam.fisher(th)))))
        assert rep.cov_residual < 1e-5


def test_normal_location_scale_law(normal):
    th = np.array([3.2, 0.7])
    x = np.linspace(0.0, 7.0, 41)
    u = (x - th[0]) / th[1]
    assert np.max(np.abs(normal.scores(th, x) - normal.scores((0.0, 1.0), u) / th[1])) < 1e-10
    assert np.max(np.abs(normal.fisher(th) - normal.fisher((0.0, 1.0)) / th[1] ** 2)) < 1e-10


@pytest.mark.parametrize("name,theta", [("normal-loc-scale", (3.2, 0.7)), ("gamma", (5.0, 1.9)),
                                        ("poisson", (3.9,))])
def test_quantile_inverts_cdf(name, theta):
    fam = get_family(name)
    p = np.array([1e-6, 0.1, 0.5, 0.9, 1 - 1e-6])
    q = fam.quantile(theta, p)
    if fam.support.is_lattice:
        assert np.all(fam.cdf(theta, q) >= p) and np.all(fam.cdf(theta, q - 1) < p)
    else:
        assert fam.cdf(theta, q) == pytest.approx(p, rel=1e-9)


@pytest.mark.parametrize("name,theta", [("normal-loc-scale", (3.2, 0.7)), ("gamma", (5.0, 1.9)),
                                        ("poisson", (3.9,))])
def test_samplers_match_mean(name, theta):
    fam = get_family(name)
    x = fam.sample(theta, np.random.default_rng(0), 200_000)
    mean = expect(fam, theta, lambda v: v)
    sd = math.sqrt(expect(fam, theta, lambda v: (v - mean) ** 2))
    assert abs(x.mean() - mean) < 4 * sd / math.sqrt(x.size)
