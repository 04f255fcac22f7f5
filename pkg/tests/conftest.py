from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from spray_geometry.expr import Point
from spray_geometry.geometry import GLMetricField, LagrangeSpace, SemisprayField

settings.register_profile(
    "spray", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("spray")

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"

POINCARE = "(y1^2 + y2^2)/x2^2"


@pytest.fixture
def problems_dir() -> Path:
    return PROBLEMS


@pytest.fixture
def flat_space() -> LagrangeSpace:
    return LagrangeSpace.parse("y1^2 + y2^2", 2)


@pytest.fixture
def poincare_space() -> LagrangeSpace:
    return LagrangeSpace.parse(POINCARE, 2)


@pytest.fixture
def poincare_start() -> Point:
    return Point((0.0, 1.0), (1.0, 0.0))


@pytest.fixture
def poincare_spray() -> SemisprayField:
    """Christoffel spray of g = delta / x2^2, written out by hand."""
    return SemisprayField.from_texts(["-y1*y2/x2", "(y1^2 - y2^2)/(2*x2)"])


@pytest.fixture
def helmholtz_control() -> tuple[SemisprayField, GLMetricField]:
    return SemisprayField.from_texts(["x1*y2", "0"]), GLMetricField.euclidean(2)
