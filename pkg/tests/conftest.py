import os
import random

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mtc.mtorus import MappingClassPresentation
from mtc.problem import parse, shipped

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

TORUS = "once_punctured_torus_LR"
SPHERE = "five_punctured_sphere_s1s2s3inv"


@pytest.fixture(scope="session")
def torus_problem():
    return parse(shipped(TORUS))


@pytest.fixture(scope="session")
def sphere_problem():
    return parse(shipped(SPHERE))


@pytest.fixture(scope="session")
def torus(torus_problem) -> MappingClassPresentation:
    return torus_problem.presentation


@pytest.fixture(scope="session")
def sphere(sphere_problem) -> MappingClassPresentation:
    return sphere_problem.presentation


@pytest.fixture(scope="session", params=[TORUS, SPHERE])
def presentation(request):
    return parse(shipped(request.param)).presentation


@pytest.fixture
def rng():
    return random.Random(20261015)


@pytest.fixture
def nprng():
    return np.random.default_rng(20261015)


def random_complex(rng, n, lo=0.3, hi=2.5):
    """Generic complex values (away from 0, -1 and the real axis)."""
    out = []
    for _ in range(n):
        r = rng.uniform(lo, hi)
        a = rng.uniform(0.2, 2.9) * rng.choice((-1, 1))
        out.append(complex(r * np.cos(a), r * np.sin(a)))
    return out
