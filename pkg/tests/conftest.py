import numpy as np
import pytest

from eocloak.fields import CloakConfig, HarmonicField
from eocloak.geometry import make_circle


@pytest.fixture
def disks():
    """Concentric disks 0.5 / 1 / 2 with a uniform background, materials unset."""
    def build(n=128, eps_s=None, zeta0=None, H=None):
        B, D, O = (make_circle((0.0, 0.0), r, n) for r in (0.5, 1.0, 2.0))
        return CloakConfig(B, D, O, H or HarmonicField("uniform-x"), eps_s=eps_s, zeta0=zeta0)
    return build


@pytest.fixture
def ring_points():
    def build(r, m=64):
        th = 2 * np.pi * (np.arange(m) + 0.5) / m
        return r * np.column_stack([np.cos(th), np.sin(th)])
    return build


def pytest_terminal_summary(terminalreporter):
    from tests.test_acceptance import ACCEPTANCE_LINES
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
