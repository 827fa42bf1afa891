import math

import numpy as np
import pytest
from hypothesis import settings
from scipy import special

from rmxest.families import (
    ExponentialFamilySpec,
    Support,
    family_from_exponential,
    make_gamma,
    make_normal_loc_scale,
    make_poisson,
)

settings.register_profile("rmx", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("rmx")


@pytest.fixture(scope="session")
def normal():
    return make_normal_loc_scale()


@pytest.fixture(scope="session")
def gamma():
    return make_gamma()


@pytest.fixture(scope="session")
def poisson():
    return make_poisson()


def normal_location_spec():
    """N(theta, 1) as a one-parameter exponential family (location only)."""
    return ExponentialFamilySpec(
        zeta=lambda th: np.array([th[0]]),
        jacobian_zeta=lambda th: np.array([[1.0]]),
        statistic=lambda x: np.asarray(x, dtype=float)[..., None],
        carrier=lambda x: np.exp(-0.5 * np.asarray(x, dtype=float) ** 2) / math.sqrt(2 * math.pi),
        log_normalizer=lambda th: 0.5 * th[0] ** 2,
        support=Support("continuous"),
        param_names=("mean",),
        cdf=lambda th, x: special.ndtr(np.asarray(x) - th[0]),
        quantile=lambda th, p: th[0] + special.ndtri(np.asarray(p)),
        name="normal-location",
    )


@pytest.fixture(scope="session")
def normal_location():
    return family_from_exponential(normal_location_spec())
