import numpy as np
import pytest

from mvaa.config import PipelineConfig
from mvaa.synth import make_metronome, make_pulse_video


@pytest.fixture(scope="session")
def config():
    return PipelineConfig().validate()


@pytest.fixture(scope="session")
def click_track():
    """120 BPM metronome, 10 s at 22050 Hz, clicks at 0.5, 1.0, ... 9.5."""
    return make_metronome(120.0, 10.0)


@pytest.fixture(scope="session")
def click_times():
    return np.arange(0.5, 9.99, 0.5)


@pytest.fixture(scope="session")
def pulse_video():
    """12 s, 16 fps, 64x64; pulses every 9 frames starting at 12, which is
    deliberately offset from a 120 BPM grid."""
    return make_pulse_video(range(12, 192, 9), 192, fps=16.0)
