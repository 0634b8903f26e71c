"""Pytest configuration and fixtures."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pytest


@pytest.fixture
def singular_problem():
    """A=1, B=2, x0=1/2, P=1 with g = -cos(11x)/sqrt|x - 2/3|."""
    from src.core.expr import parse, to_forcing
    from src.models.beam import BeamProblem

    text = "-cos(11*x)/sqrt(abs(x-2/3))"
    g = to_forcing(parse(text), [(2.0 / 3.0, -0.5)], label=text)
    return BeamProblem.from_values(1.0, 2.0, 0.5, 1.0, g=g)


@pytest.fixture
def smooth_problem():
    """Constant negative force with a smooth load."""
    from src.models.beam import BeamProblem, ForcingTerm

    g = ForcingTerm(eval=lambda x: np.sin(3.0 * x) + 1.0, label="sin(3*x) + 1")
    return BeamProblem.from_values(2.0, 1.0, 0.4, -3.0, g=g)


@pytest.fixture
def fresh_settings(monkeypatch):
    """Clear the cached settings before and after a test that sets DISTBEAM_ variables."""
    from src.models.config import get_settings

    get_settings.cache_clear()
    yield monkeypatch
    get_settings.cache_clear()
