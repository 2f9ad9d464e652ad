import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from partmap import DispCodebook, GridModule, HeadingCode, OvcCodebook

settings.register_profile(
    "suite", deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")


@pytest.fixture(scope="session")
def ovc() -> OvcCodebook:
    return OvcCodebook()


@pytest.fixture(scope="session")
def disp() -> DispCodebook:
    return DispCodebook()


@pytest.fixture(scope="session")
def grid() -> GridModule:
    return GridModule()


@pytest.fixture(scope="session")
def heading_code() -> HeadingCode:
    return HeadingCode()


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
