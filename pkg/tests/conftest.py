import pytest

from panelar import InnovationSpec, RegimeSpec


@pytest.fixture
def normal():
    return InnovationSpec.normal()


@pytest.fixture
def rademacher():
    return InnovationSpec.rademacher()


@pytest.fixture
def unit_root():
    return RegimeSpec.unit_root()
