import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import subgreen as sg


@pytest.fixture(scope="session")
def base_params():
    """The canonical parameter set used throughout the reference runs."""
    return sg.FracParams(alpha=0.8, beta=0.5, gamma=0.3, delta=0.5)


@pytest.fixture(scope="session")
def domain():
    return sg.DomainSpec(a=math.pi, T=2.0)


@pytest.fixture(scope="session")
def ctl():
    return sg.SeriesControl()


@pytest.fixture(scope="session")
def beta_sweep():
    return (0.1, 0.5, 0.9)


def params_for(beta: float) -> sg.FracParams:
    return sg.FracParams(alpha=0.8, beta=beta, gamma=0.3, delta=0.5)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
