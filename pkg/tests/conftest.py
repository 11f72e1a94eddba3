"""Shared fixtures: the C70 molecule and the fullerene experiment parameters."""

from pathlib import Path

import pytest

from src.app.core.coherence import MixedState
from src.app.core.experiment import ExperimentConfig
from src.app.core.gaussian import PureEvolution
from src.app.core.wavepacket import Particle

# Time of flight, coherence and detector resolution of the C70 experiment
T_FLIGHT = 6.65e-3
DELTA_KX = 9.0e6
DETECTOR_FWHM = 12e-6
B_SLIT = 1.0e-7

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture
def c70():
    return Particle.c70()


@pytest.fixture
def c70_moving():
    return Particle.c70(v_z=188.0)


@pytest.fixture
def pure_packet(c70):
    return PureEvolution.create(B_SLIT, c70)


@pytest.fixture
def c70_state(c70):
    return MixedState.create(B_SLIT, DELTA_KX, c70)


@pytest.fixture
def c70_experiment():
    return ExperimentConfig(t=T_FLIGHT)


@pytest.fixture
def synthetic_dataset():
    return DATA_DIR / "synthetic_c70.csv"
