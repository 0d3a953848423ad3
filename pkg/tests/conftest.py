"""Shared fixtures: weight models for the betas used across the suite."""

import pytest

from gaflab.special import WeightModel


@pytest.fixture(scope="session")
def models():
    return {b: WeightModel(beta=b) for b in (0.5, 1.0, 2.0, 3.0, 4.0)}


@pytest.fixture(scope="session")
def model2():
    return WeightModel(beta=2.0)
