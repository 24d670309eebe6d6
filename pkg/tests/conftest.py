"""Shared fixtures."""

import pytest

from src.core.events import EventSystem, RunEvent
from src.core.settings import REFERENCE_A, REFERENCE_ETA_B
from src.learning.model import MacroState, ModelParams
from src.numerics.gaussmath import QuadratureSpec


@pytest.fixture(autouse=True)
def reset_event_bus():
    EventSystem.clear()
    yield
    EventSystem.clear()


@pytest.fixture
def params():
    """Reference conditions with eta_J = 0.2."""
    return ModelParams(a=REFERENCE_A, eta_b=REFERENCE_ETA_B, eta_j=0.2)


@pytest.fixture
def standard_state():
    return MacroState(r_b=0.0, r_j=0.0, r_bj=0.0, l_b=1.0, l_j=1.0)


@pytest.fixture
def fast_quadrature():
    return QuadratureSpec(abs_tol=1e-8)


@pytest.fixture
def collect_events():
    """Subscribe a recorder to the given event types and return its list."""
    received = []

    def attach(*event_types: RunEvent):
        for event_type in event_types:
            EventSystem.subscribe(event_type, received.append)
        return received

    return attach
