import numpy as np
import pytest

from musicviz import AudioFrame, synthesize


def make_frame(samples, sample_rate=44100, index=0, timestamp=0.0):
    return AudioFrame(
        samples=np.asarray(samples, dtype=np.float64),
        sample_rate=sample_rate,
        index=index,
        timestamp=timestamp,
    )


def sine_frame(freq, n=2048, sample_rate=44100, amplitude=1.0, index=0):
    samples = synthesize("sine", freq, n / sample_rate, amplitude, sample_rate)
    return make_frame(samples[:n], sample_rate, index)


def noise_frame(seed, n=2048, sample_rate=44100, amplitude=0.5, index=0):
    samples = synthesize(
        "white-noise", duration=n / sample_rate, amplitude=amplitude,
        sample_rate=sample_rate, seed=seed,
    )
    return make_frame(samples[:n], sample_rate, index)


@pytest.fixture
def a440_frame():
    return sine_frame(440.0)
