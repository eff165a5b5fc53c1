"""Per-frame spectrum and the timbre/energy feature set.

Energy is computed on the raw frame so the analysis window does not
attenuate loudness; all spectral features are computed on the Hann-windowed
frame for leakage control. Every function here is pure and reentrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ingest import AudioFrame

# Zwicker critical-band edges in Hz; 25 edges bound 24 bands.
BARK_BAND_EDGES_HZ = np.array(
    [0, 100, 200, 300, 400, 510, 630, 770, 920, 1080, 1270, 1480, 1720, 2000,
     2320, 2700, 3150, 3700, 4400, 5300, 6400, 7700, 9500, 12000, 15500],
    dtype=np.float64,
)
N_BARK_BANDS = 24
LOUDNESS_EXPONENT = 0.23
SHARPNESS_COEFF = 0.11
FLATNESS_EPS = 1e-12

# Acuity weight per band (z = band index + 1): unity up to z = 14, then
# 0.066 * exp(0.171 * z).
_BARK_Z = np.arange(1, N_BARK_BANDS + 1, dtype=np.float64)
_ACUITY = np.where(_BARK_Z < 15.0, 1.0, 0.066 * np.exp(0.171 * _BARK_Z))
_SHARPNESS_WEIGHTS = _BARK_Z * _ACUITY

_hann_cache: dict[int, np.ndarray] = {}


def _hann(n: int) -> np.ndarray:
    window = _hann_cache.get(n)
    if window is None:
        window = np.hanning(n)  # 0.5 * (1 - cos(2*pi*n/(N-1)))
        _hann_cache[n] = window
    return window


@dataclass(eq=False)
class Spectrum:
    """Magnitude spectrum of one windowed frame, bins 0..N/2."""

    magnitudes: np.ndarray
    bin_hz: float
    source_frame_index: int = 0

    @property
    def nyquist_hz(self) -> float:
        return self.bin_hz * (len(self.magnitudes) - 1)

    @property
    def is_silent(self) -> bool:
        return not np.any(self.magnitudes)


@dataclass(eq=False)
class FeatureVector:
    """All per-frame timbre and energy measurements."""

    energy: float
    rms: float
    spectral_centroid: float
    spectral_flatness: float
    spectral_kurtosis: float
    specific_loudness: np.ndarray
    loudness_total: float
    perceptual_spread: float
    perceptual_sharpness: float
    frame_index: int = 0
    timestamp: float = 0.0


def compute_spectrum(frame: AudioFrame) -> Spectrum:
    """Hann-window the frame and return magnitudes of DFT bins 0..N/2."""
    x = frame.samples
    n = x.shape[0]
    magnitudes = np.abs(np.fft.rfft(_hann(n) * x))
    return Spectrum(magnitudes, frame.sample_rate / n, frame.index)


def energy_and_rms(frame: AudioFrame) -> tuple[float, float]:
    """Sum of squared raw samples, and sqrt(energy / N)."""
    energy = float(np.dot(frame.samples, frame.samples))
    return energy, math.sqrt(energy / frame.samples.shape[0])


def spectral_centroid(spectrum: Spectrum) -> float:
    """Magnitude-weighted mean frequency in Hz; 0.0 for a silent spectrum."""
    total = float(np.sum(spectrum.magnitudes))
    if total == 0.0:
        return 0.0
    freqs = np.arange(len(spectrum.magnitudes)) * spectrum.bin_hz
    return float(np.dot(freqs, spectrum.magnitudes) / total)


def spectral_flatness(spectrum: Spectrum) -> float:
    """Geometric over arithmetic mean of magnitudes, DC bin excluded.

    The epsilon regularizer keeps the log finite on zero bins and makes
    silence come out as exactly 1.0.
    """
    m = spectrum.magnitudes[1:] + FLATNESS_EPS
    return float(np.exp(np.mean(np.log(m))) / np.mean(m))


def spectral_kurtosis(spectrum: Spectrum) -> float:
    """Fourth standardized moment of the bin-domain magnitude distribution.

    Raw (not excess) kurtosis: a Gaussian-shaped spectrum gives 3. Both the
    silent and single-bin degenerate cases return the neutral value 3.0.
    """
    total = float(np.sum(spectrum.magnitudes))
    if total == 0.0:
        return 3.0
    bins = np.arange(len(spectrum.magnitudes), dtype=np.float64)
    p = spectrum.magnitudes / total
    mean = float(np.dot(bins, p))
    dev = bins - mean
    var = float(np.dot(dev * dev, p))
    if math.sqrt(var) < 1e-9:
        return 3.0
    return float(np.dot(dev**4, p) / var**2)


def bark_loudness(spectrum: Spectrum) -> tuple[np.ndarray, float]:
    """Specific loudness per Bark band, (band power)^0.23, plus the total.

    Bands whose upper edge lies above Nyquist are left at zero, so low
    sample rates simply use the bands they can fully cover.
    """
    freqs = np.arange(len(spectrum.magnitudes)) * spectrum.bin_hz
    power = spectrum.magnitudes**2
    band_of_bin = np.searchsorted(BARK_BAND_EDGES_HZ, freqs, side="right") - 1
    nyquist = spectrum.nyquist_hz
    specific = np.zeros(N_BARK_BANDS)
    for band in range(N_BARK_BANDS):
        if BARK_BAND_EDGES_HZ[band + 1] > nyquist:
            break
        band_power = float(power[band_of_bin == band].sum())
        if band_power > 0.0:
            specific[band] = band_power**LOUDNESS_EXPONENT
    return specific, float(specific.sum())


def perceptual_spread(specific_loudness: np.ndarray, loudness_total: float) -> float:
    """((total - max band) / total)^2; 0 when there is no loudness."""
    if loudness_total <= 0.0:
        return 0.0
    return float(((loudness_total - np.max(specific_loudness)) / loudness_total) ** 2)


def perceptual_sharpness(specific_loudness: np.ndarray, loudness_total: float) -> float:
    """Acuity-weighted loudness centroid over Bark bands; 0 when silent."""
    if loudness_total <= 0.0:
        return 0.0
    return float(
        SHARPNESS_COEFF * np.dot(_SHARPNESS_WEIGHTS, specific_loudness) / loudness_total
    )


def extract_features(frame: AudioFrame) -> FeatureVector:
    """Compose all feature operations into one FeatureVector."""
    energy, rms = energy_and_rms(frame)
    spectrum = compute_spectrum(frame)
    specific, total = bark_loudness(spectrum)
    return FeatureVector(
        energy=energy,
        rms=rms,
        spectral_centroid=spectral_centroid(spectrum),
        spectral_flatness=spectral_flatness(spectrum),
        spectral_kurtosis=spectral_kurtosis(spectrum),
        specific_loudness=specific,
        loudness_total=total,
        perceptual_spread=perceptual_spread(specific, total),
        perceptual_sharpness=perceptual_sharpness(specific, total),
        frame_index=frame.index,
        timestamp=frame.timestamp,
    )
