import pytest

from barrierfd import BarrierContract, BarrierGeometry, MarketParams, MonitoringPolicy


@pytest.fixture
def down_contract():
    """Down-and-out call, S0 = 95, K = 100, B = 90, T = 1."""
    return BarrierContract(K=100.0, T=1.0, S0=95.0, geometry=BarrierGeometry.down_and_out(90.0))


@pytest.fixture
def down_market():
    return MarketParams(r=0.10, q=0.0, sigma=0.25)


@pytest.fixture
def short_market():
    return MarketParams(r=0.10, q=0.0, sigma=0.20)


@pytest.fixture
def double_contract():
    return BarrierContract(K=100.0, T=0.5, S0=100.0, geometry=BarrierGeometry.double_knock_out(95.0, 125.0))


def discrete(contract, text):
    return BarrierContract(contract.K, contract.T, contract.S0, contract.geometry, contract.rebate,
                           MonitoringPolicy.parse(text))
