import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import gnopt
from gnopt.problems import HardFamilySpec, hard_family_problem


@pytest.fixture(scope="session")
def quadratic5():
    return gnopt.quadratic_problem(5, seed=0, cond=10.0)


@pytest.fixture(scope="session")
def logistic_oracle():
    return gnopt.logistic_problem(gnopt.synthetic_logistic(100, 10, seed=42))


@pytest.fixture(scope="session")
def hard5():
    return hard_family_problem(HardFamilySpec(p=3, n=5, m=5))


@pytest.fixture(scope="session")
def hard10():
    return hard_family_problem(HardFamilySpec(p=3, n=10, m=10))


@pytest.fixture(scope="session")
def ot_instance():
    return gnopt.random_transport_instance(10, 0.5, seed=7)


@pytest.fixture(scope="session")
def ot_oracle(ot_instance):
    return gnopt.ot_dual_problem(ot_instance)


@pytest.fixture(scope="session")
def logistic_ref(logistic_oracle):
    """High-accuracy reference solve of the synthetic logistic problem."""
    x0 = np.zeros(logistic_oracle.dim)
    z, run = gnopt.minimize_gradnorm_from_radius(logistic_oracle, x0, 20.0, 1e-8, p=3)
    return z, float(logistic_oracle.value(z))


@pytest.fixture(scope="session")
def ot_ref(ot_oracle):
    """Long high-accuracy radius-mode reference for the transport dual."""
    x0 = np.zeros(ot_oracle.dim)
    z, run = gnopt.minimize_gradnorm_from_radius(ot_oracle, x0, 10.0, 1e-9, p=3)
    return z, run
