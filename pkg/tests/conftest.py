import os

import numpy as np
import pytest
from hypothesis import settings

from madstrap.distributions import make_model, robust_params

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def normal_std():
    m = make_model("normal")
    return m, robust_params(m)


@pytest.fixture(scope="session")
def laplace_std():
    m = make_model("laplace")
    return m, robust_params(m)


@pytest.fixture(scope="session")
def expon_std():
    m = make_model("exponential")
    return m, robust_params(m)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
