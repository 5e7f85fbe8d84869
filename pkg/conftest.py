import pytest

from models import SimConfig


@pytest.fixture
def cfg() -> SimConfig:
    """Small grid: R=8 on 64 points, evolution band 16"""
    return SimConfig(R=8, N=64)


@pytest.fixture
def sweep_cfg() -> SimConfig:
    """Wider grid for pulses of several radians"""
    return SimConfig(R=8, N=128)
