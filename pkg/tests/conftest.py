import pytest

from hexmix.experiments import draw_cftp_samples
from hexmix.hexlattice import HexDomain


@pytest.fixture(scope="session")
def samples_n16():
    """100 exact uniform samples on the (16,16,16) hexagon, shared by the
    concentration and level-line acceptance checks."""
    return draw_cftp_samples(HexDomain(16, 16, 16), 100, 1616)


@pytest.fixture(scope="session")
def samples_n32():
    """100 exact uniform samples on the (32,32,32) hexagon."""
    return draw_cftp_samples(HexDomain(32, 32, 32), 100, 3232)
