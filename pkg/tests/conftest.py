import numpy as np
import pytest

from smilekernel.model import QnvModel


@pytest.fixture(scope="session")
def symmetric_model() -> QnvModel:
    """(1, 0, -1): roots at -1 and 1, the workhorse fixture."""
    return QnvModel(1.0, 0.0, -1.0, 0.0)


@pytest.fixture(scope="session")
def shifted_model() -> QnvModel:
    """(2, -6, 4): roots at 1 and 2, kappa = 1, midpoint 1.5."""
    return QnvModel(2.0, -6.0, 4.0, 0.0)


@pytest.fixture(scope="session")
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)
