import pytest

from src.models.params import SystemParams
from src.services import network_model


@pytest.fixture
def nominal() -> SystemParams:
    return network_model.nominal_params()


@pytest.fixture
def eta(nominal):
    return network_model.link_transmissivity(nominal)


@pytest.fixture
def y0(nominal):
    return network_model.y_tdma(nominal)


@pytest.fixture
def nominal_inputs(nominal, y0):
    return network_model.decoy_inputs(nominal, y0)
