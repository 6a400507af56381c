import pytest

from plaas.equilibrium import with_subsidy
from plaas.model import reference_scenario


@pytest.fixture(scope="session")
def base():
    """Reference parameters with L_T = 0.1 and both subsidies at 50."""
    return reference_scenario()


@pytest.fixture(scope="session")
def unsubsidised(base):
    return with_subsidy(base, 0.0, 0.0)
