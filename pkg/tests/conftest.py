import numpy as np
import pytest

from jmmd import Family, irls_fit
from jmmd.datasets import injection_molding_dataset


@pytest.fixture(scope="session")
def molding():
    return injection_molding_dataset()


@pytest.fixture(scope="session")
def molding_data(molding):
    return molding["dataset"]


@pytest.fixture(scope="session")
def warm_kernels():
    """Compile/load the jit kernels once so timed tests measure math."""
    rng = np.random.default_rng(0)
    X = np.column_stack([np.ones(12), rng.normal(size=12)])
    irls_fit(X, rng.normal(size=12) ** 2 + 0.1, Family.gamma_dispersion())
    irls_fit(X, rng.normal(size=12), Family.normal_type())
    return True
