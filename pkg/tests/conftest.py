from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

Q_GRID = [Fraction(1, 3), Fraction(1, 2), Fraction(2), Fraction(5, 3)]


@pytest.fixture(params=["pp", "pip"])
def spec(request):
    return request.param
