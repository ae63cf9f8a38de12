import math

import pytest

from pdmho.model import Line, ModelParams, Radial


@pytest.fixture(scope="session")
def ref():
    """alpha=3, omega=4, d=3, l=0: Delta=5, lambda=4, k=4/3."""
    return ModelParams(3.0, 4.0, Radial(3, 0)).derived


@pytest.fixture(scope="session")
def line_even():
    return ModelParams(1.0, math.sqrt(8.0), Line("even")).derived


@pytest.fixture(scope="session")
def line_odd():
    return ModelParams(1.0, math.sqrt(8.0), Line("odd")).derived
