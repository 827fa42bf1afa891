"""Hypothesis property tests across modules."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from rmxest.data import Dataset, digest
from rmxest.expectation import expect
from rmxest.families import make_gamma, make_normal_loc_scale, make_poisson
from rmxest.ic import contamination_residuals, solve_contamination_ic, solve_ic
from rmxest.onestep import one_step, shift_within_bound
from rmxest.start import cvm_distance, median_mad

NORMAL = make_normal_loc_scale()
GAMMA = make_gamma()
POISSON = make_poisson()

samples = st.lists(st.floats(-50, 50, allow_nan=False, allow_subnormal=False), min_size=5, max_size=40)


def _spread(xs):
    ds = Dataset.from_observations(xs)
    med = np.median(ds.observations())
    return np.median(np.abs(ds.observations() - med)) > 1e-6


@given(samples, st.floats(-100, 100), st.floats(0.1, 10))
def test_median_mad_equivariance(xs, shift, scale):
    if not _spread(xs):
        return
    ds = Dataset.from_observations(xs)
    med, mad = median_mad(ds)
    m2, s2 = median_mad(Dataset.from_observations(np.asarray(xs) * scale + shift))
    assert math.isclose(m2, med * scale + shift, rel_tol=1e-9, abs_tol=1e-9)
    assert math.isclose(s2, mad * scale, rel_tol=1e-9, abs_tol=1e-9)


@given(samples, st.randoms(use_true_random=False))
def test_dataset_permutation_invariance(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    a, b = Dataset.from_observations(xs), Dataset.from_observations(ys)
    assert digest(a) == digest(b)
    if _spread(xs):
        assert cvm_distance(NORMAL, (0.0, 5.0), a) == cvm_distance(NORMAL, (0.0, 5.0), b)


@given(st.floats(0.3, 30.0), st.floats(-3, 3), st.floats(-3, 3))
def test_expectation_linearity_poisson(lam, c1, c2):
    f = lambda x: np.sin(x)
    g = lambda x: np.sqrt(x)
    lhs = expect(POISSON, lam, lambda x: c1 * f(x) + c2 * g(x))
    rhs = c1 * expect(POISSON, lam, f) + c2 * expect(POISSON, lam, g)
    assert abs(lhs - rhs) <= 1e-10 * (1 + abs(c1) + abs(c2))


@given(st.floats(0.5, 20.0), st.floats(0.3, 8.0))
def test_expectation_linearity_gamma(scale, shape):
    f = lambda x: np.log(x)
    g = lambda x: x
    lhs = expect(GAMMA, (scale, shape), lambda x: 2 * f(x) - g(x))
    rhs = 2 * expect(GAMMA, (scale, shape), f) - expect(GAMMA, (scale, shape), g)
    assert abs(lhs - rhs) <= 1e-8 * (1 + scale * shape)
    # first moment identity
    assert math.isclose(expect(GAMMA, (scale, shape), g), scale * shape, rel_tol=1e-8)


@settings(max_examples=15)
@given(st.floats(0.5, 20.0), st.floats(0.05, 2.0))
def test_poisson_solver_properties(lam, r):
    ic, rep = solve_contamination_ic(POISSON, lam, r)
    res = contamination_residuals(ic)
    assert max(res.values()) < 1e-8
    tr_inv = lam  # inverse Fisher information
    assert rep.tr_A >= tr_inv * (1 - 1e-9)
    assert math.isclose(rep.mse, rep.tr_A, rel_tol=1e-6)
    assert abs(float(ic.a[0])) <= r * r * ic.b * (1 + 1e-9)


@settings(max_examples=10)
@given(st.floats(0.5, 10.0), st.floats(0.5, 6.0), st.floats(0.1, 1.5))
def test_gamma_solver_properties(scale, shape, r):
    ic, rep = solve_contamination_ic(GAMMA, (scale, shape), r)
    assert max(contamination_residuals(ic).values()) < 1e-8
    assert math.isclose(rep.mse, rep.tr_A, rel_tol=1e-6)
    k = expect(GAMMA, (scale, shape), lambda x: np.einsum("mi,mj->mij", ic.eval(x), GAMMA.scores((scale, shape), x)),
               breakpoints=ic.kinks())
    assert np.max(np.abs(np.reshape(k, (2, 2)) - np.eye(2))) < 1e-6


@settings(max_examples=20)
@given(st.floats(-10, 10), st.floats(0.05, 20), st.floats(0.05, 3.0), st.floats(-4, 4))
def test_normal_ic_equivariance(mu, sigma, r, u):
    ic0, _ = solve_ic(NORMAL, (0.0, 1.0), r)
    ic, _ = solve_ic(NORMAL, (mu, sigma), r)
    lhs = ic.eval(np.array([mu + sigma * u]))[0]
    rhs = sigma * ic0.eval(np.array([u]))[0]
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9 * sigma)


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1), st.integers(10, 80), st.floats(0.0, 0.3), st.floats(-100, 100))
def test_one_step_shift_bound(seed, n, frac, outlier):
    rng = np.random.default_rng(seed)
    x = rng.normal(3.2, 0.7, n)
    x[: int(frac * n)] = outlier
    rep = one_step(NORMAL, (3.2, 0.7), Dataset.from_observations(x), 0.5)
    assert shift_within_bound(rep)
    assert np.all(np.isfinite(rep.final))


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1), st.integers(2, 200), st.integers(0, 500))
def test_poisson_one_step_shift_bound(seed, n, outlier):
    x = np.random.default_rng(seed).poisson(3.9, n).astype(float)
    x[0] = outlier
    rep = one_step(POISSON, (3.9,), Dataset.from_observations(x), 1.0, nb="v")
    assert shift_within_bound(rep)
