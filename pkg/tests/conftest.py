import logging

import pytest

from inflow_ns.composite import build_parts
from inflow_ns.gas import GasParams, ThermoState
from inflow_ns.wave_curves import generate_case

logging.getLogger("inflow_ns").setLevel(logging.ERROR)

BASE_STRENGTHS = dict(delta_b=0.02, delta_r1=0.05, delta_d=0.02, delta_r3=0.05)


@pytest.fixture(scope="session")
def gas():
    return GasParams()


@pytest.fixture(scope="session")
def base_case(gas):
    return generate_case(ThermoState(1.0, 0.0, 1.0), BASE_STRENGTHS, gas)


@pytest.fixture(scope="session")
def base_parts(base_case, gas):
    return build_parts(base_case, gas)
