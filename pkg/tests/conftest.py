"""Shared fixtures: small measure matrices with known renewal measures."""

from pathlib import Path

import pytest

from markov_renewal.models.measure import (
    AtomTerm,
    ExpPolyTerm,
    LatticeMeasureMatrix,
    MeasureMatrix,
    ScalarMeasure,
)
from markov_renewal.models.results import SearchRegion

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

ZERO = ScalarMeasure()
POISSON = ScalarMeasure(densities=(ExpPolyTerm(coefficient=1.0),))
DELTA0 = ScalarMeasure(atoms=(AtomTerm(location=0.0, weight=1.0),))


@pytest.fixture
def config_dir() -> Path:
    """Directory of the example configuration files."""
    return CONFIG_DIR


@pytest.fixture
def golden() -> MeasureMatrix:
    """``[[Poisson, delta_0], [0, Poisson]]``; alpha = 1, pole order 2."""
    return MeasureMatrix(entries=((POISSON, DELTA0), (ZERO, POISSON)))


@pytest.fixture
def tilted() -> MeasureMatrix:
    """``[[Poisson, Poisson], [0, Poisson]]``; alpha = 1, pole order 2."""
    return MeasureMatrix(entries=((POISSON, POISSON), (ZERO, POISSON)))


@pytest.fixture
def diagonal() -> MeasureMatrix:
    """``diag(Poisson, Poisson)``; double determinant zero, simple pole."""
    return MeasureMatrix(entries=((POISSON, ZERO), (ZERO, POISSON)))


@pytest.fixture
def region() -> SearchRegion:
    """Search region around ``z = 1`` used with the Poisson models."""
    return SearchRegion(re_min=0.1, re_max=3.0, im_max=5.0)


@pytest.fixture
def doubling() -> LatticeMeasureMatrix:
    """Single type with mass 2 at ``n = 1``: ``U({n}) = 2**n``."""
    return LatticeMeasureMatrix(span=1.0, weights=(((0.0, 2.0),),))


@pytest.fixture
def geometric() -> LatticeMeasureMatrix:
    """Mass 1/4 at 0 and 3/2 at 1: ``U({n}) = (4/3) 2**n``."""
    return LatticeMeasureMatrix(span=1.0, weights=(((0.25, 1.5),),))
