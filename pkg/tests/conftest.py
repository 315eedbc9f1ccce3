import numpy as np
import pytest

from edgegap.geometry import PolygonDomain
from edgegap.operators import QuadratureSpec
from edgegap.potentials import Perturbation, step_potential


def rect(x0, x1, y0, y1) -> PolygonDomain:
    return PolygonDomain([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])


class Bundle:
    """Attribute bag quacking like a loaded scenario."""

    def __init__(self, **kw):
        self.b = 1.0
        self.a_momentum = 0.0
        self.envelope_delta = 0.1
        self.precision_bits = 512
        self.quad = QuadratureSpec()
        self.__dict__.update(kw)


@pytest.fixture(scope="session")
def step01():
    return step_potential(0.0, 1.0, 0.0)


@pytest.fixture(scope="session")
def coarse_scenario(step01):
    """Amplitude-25 bump on a half-unit box straddling the edge."""
    return Bundle(w=step01,
                  v=Perturbation(support=rect(-0.25, 0.4, -0.5, 0.5),
                                 amplitude=25.0))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260822)
