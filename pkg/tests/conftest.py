import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from raidd.casestudy import REFERENCE_CONTROLLER, canonical_bank, uuv_matrices
from raidd.config import load_default_config
from raidd.graphs import build_eigenvalue_pool
from raidd.pipeline import synthesize
from raidd.synthesis import PerturbationBox, build_plant_family

settings.register_profile("default", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def uuv():
    return uuv_matrices()


@pytest.fixture(scope="session")
def uuv_pool():
    return build_eigenvalue_pool(canonical_bank())


@pytest.fixture(scope="session")
def uuv_family(uuv, uuv_pool):
    A, B, C = uuv
    return build_plant_family(A, B, C, uuv_pool)


@pytest.fixture(scope="session")
def uuv_box():
    lo, hi = np.zeros((3, 3)), np.zeros((3, 3))
    lo[2, 1], hi[2, 1] = -0.075, 0.075
    return PerturbationBox(lo, hi, np.zeros((3, 1)), np.zeros((3, 1)), 21)


@pytest.fixture(scope="session")
def shipped_config():
    return load_default_config()


@pytest.fixture(scope="session")
def synthesis_outcome(shipped_config):
    return synthesize(shipped_config)


@pytest.fixture(scope="session")
def uuv_controller(synthesis_outcome):
    return synthesis_outcome.controller


@pytest.fixture(scope="session")
def reference_controller():
    return REFERENCE_CONTROLLER


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
