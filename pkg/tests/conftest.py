import os

import pytest
from hypothesis import HealthCheck, settings

from besselspdc import CrystalConfig, PumpBeam, derived_indices

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def bbo():
    return CrystalConfig()


@pytest.fixture(scope="session")
def ind(bbo):
    return derived_indices(bbo, 406.8)


@pytest.fixture(scope="session")
def pump():
    return PumpBeam()
