import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from axiflow.geometry import BoundarySpec, Curve

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_open_curve(rng, J, jitter=0.15):
    """Perturbed half circle from the north pole to the south pole (axis at both ends)."""
    theta = np.linspace(0.5 * np.pi, -0.5 * np.pi, J + 1)
    radius = 1.0 + jitter * rng.uniform(-1, 1, J + 1)
    nodes = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    theta_int = theta[1:-1] + 0.2 * (np.pi / J) * rng.uniform(-1, 1, J - 1)
    nodes[1:-1] = np.column_stack([radius[1:-1] * np.cos(theta_int),
                                   radius[1:-1] * np.sin(theta_int)])
    nodes[[0, -1], 0] = 0.0
    return Curve(nodes)


def random_closed_curve(rng, J, jitter=0.1):
    theta = 0.5 * np.pi - 2 * np.pi * np.arange(J) / J
    radius = 0.3 * (1.0 + jitter * rng.uniform(-1, 1, J))
    nodes = np.column_stack([1.0 + radius * np.cos(theta), radius * np.sin(theta)])
    return Curve(nodes, closed=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def axis_both():
    return BoundarySpec.axis_both()


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
