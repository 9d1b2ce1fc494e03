import os

os.environ.setdefault("ENVIRONMENT", "testing")

import pytest

from config import InlineExecutor, get_settings
from metric import SpacetimePoint, build_metric
from schemas import AssumptionBudgetSchema, MetricSpecSchema, TolerancesSchema
from storages import LocalReportStorage


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "unit: Unit tests"
    )
    config.addinivalue_line(
        "markers", "slow: Tests that trace full direction grids"
    )
    config.addinivalue_line(
        "markers", "e2e: End-to-end tests through the command line"
    )


@pytest.fixture(scope="session")
def settings():
    return get_settings()


@pytest.fixture(scope="session")
def executor():
    return InlineExecutor()


@pytest.fixture(scope="session")
def tolerances():
    return TolerancesSchema()


@pytest.fixture(scope="session")
def flat_budget():
    return AssumptionBudgetSchema(
        N0=1.0,
        K0=1.0,
        R0=1.0,
        I0=1.0,
        rho0=1.0,
        epsilon=0.1,
        r0=1.0,
        delta_star=0.4,
        delta0=0.4,
        epsilon0=0.1,
        varpi=1.0,
    )


@pytest.fixture(scope="session")
def minkowski():
    return build_metric(MetricSpecSchema(family="minkowski", interval=(-2.0, 0.0)))


@pytest.fixture(scope="session")
def flat_torus():
    return build_metric(MetricSpecSchema(family="flat_torus", params={"period": 1.0}, interval=(-2.0, 0.0)))


@pytest.fixture(scope="session")
def lapse_bump():
    return build_metric(
        MetricSpecSchema(
            family="lapse_bump",
            params={"amplitude": 0.05, "width": 1.0, "center": [0.0, 0.0, 0.0]},
            interval=(-2.0, 0.0),
        )
    )


@pytest.fixture(scope="session")
def cylinder():
    return build_metric(MetricSpecSchema(family="spherical_cylinder", params={"radius": 1.0}, interval=(-5.0, 0.0)))


@pytest.fixture(scope="session")
def perturbed_torus():
    return build_metric(
        MetricSpecSchema(
            family="perturbed_torus",
            params={"period": 1.0, "amplitude": 0.01, "drift": 0.05},
            interval=(-0.5, 0.5),
        )
    )


@pytest.fixture(scope="session")
def origin():
    return SpacetimePoint.of(0.0, (0.0, 0.0, 0.0))


@pytest.fixture(scope="session")
def torus_center():
    return SpacetimePoint.of(0.0, (0.5, 0.5, 0.5))


@pytest.fixture(scope="session")
def equator():
    return SpacetimePoint.of(0.0, (1.5707963267948966, 1.0, 0.0), "A")


@pytest.fixture(scope="function")
def storage(tmp_path):
    return LocalReportStorage(root=tmp_path / "out")
