import random

import pytest
from hypothesis import HealthCheck, settings

from egas.absdom import sign_lattice, sign_square
from egas.ats import figure1_system, figure2_system

settings.register_profile(
    "repo",
    derandomize=True,
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return random.Random(0)


@pytest.fixture
def sign():
    lat = sign_lattice()
    return lat, sign_square(lat)


@pytest.fixture
def fig1():
    return figure1_system()


@pytest.fixture
def fig2():
    return figure2_system()
