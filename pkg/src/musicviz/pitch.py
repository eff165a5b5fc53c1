"""Fundamental-frequency detection by normalized-autocorrelation peak picking.

Per frame: compute the normalized square-difference curve over the lag range
implied by the configured frequency bounds, collect the key maxima between
positive-going zero crossings, take the first one within the peak-selection
threshold of the global maximum, refine it by parabolic interpolation, and
quantize the resulting frequency to an equal-temperament note.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from ._kernels import nsdf as _nsdf_kernel
from .ingest import AudioFrame

NOTE_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")

# Frames quieter than this RMS short-circuit to Unvoiced; numerical dust can
# otherwise correlate with itself and report spurious high clarity.
SILENCE_RMS = 1e-4


class PitchConfigError(ValueError):
    """Invalid pitch-detection configuration."""


@dataclass
class PitchConfig:
    """Detection thresholds and search range (defaults span the piano)."""

    voicing_threshold: float = 0.60
    peak_threshold: float = 0.90
    freq_min: float = 27.0
    freq_max: float = 4200.0

    def validate(self, sample_rate: float) -> None:
        if self.freq_min <= 0:
            raise PitchConfigError(f"freq_min must be positive, got {self.freq_min}")
        if self.freq_max >= sample_rate / 2:
            raise PitchConfigError(
                f"freq_max {self.freq_max} Hz is at or above Nyquist ({sample_rate / 2} Hz)"
            )
        if self.freq_max <= self.freq_min:
            raise PitchConfigError("freq_max must exceed freq_min")
        if not 0.0 < self.voicing_threshold <= 1.0:
            raise PitchConfigError("voicing_threshold must be in (0, 1]")
        if not 0.0 < self.peak_threshold <= 1.0:
            raise PitchConfigError("peak_threshold must be in (0, 1]")


@dataclass
class PitchEstimate:
    """A voiced detection: frequency plus its note quantization."""

    frequency: float
    clarity: float
    midi_float: float
    midi_note: int
    note_class: int
    octave: int
    cents: float
    frame_index: int = 0

    @property
    def note_name(self) -> str:
        return f"{NOTE_NAMES[self.note_class]}{self.octave}"


@dataclass
class Unvoiced:
    """No reliable pitch; carries the best clarity that was found."""

    clarity: float
    frame_index: int = 0


PitchResult = Union[PitchEstimate, Unvoiced]


def quantize_frequency(frequency: float) -> tuple[float, int, int, int, float]:
    """Map Hz to (midi_float, midi_note, note_class, octave, cents).

    midi_float = 69 + 12*log2(f/440). Half-integer midi values round toward
    +inf so cents stays in [-50, +50).
    """
    if frequency <= 0:
        raise ValueError(f"frequency must be positive, got {frequency}")
    midi_float = 69.0 + 12.0 * math.log2(frequency / 440.0)
    midi_note = math.floor(midi_float + 0.5)
    cents = 100.0 * (midi_float - midi_note)
    return midi_float, midi_note, midi_note % 12, midi_note // 12 - 1, cents


def nsdf(frame, max_lag: int) -> np.ndarray:
    """Normalized square difference curve for lags 0..max_lag (max_lag < N)."""
    samples = frame.samples if isinstance(frame, AudioFrame) else np.asarray(frame)
    if not 0 <= max_lag < len(samples):
        raise ValueError(f"max_lag must satisfy 0 <= max_lag < {len(samples)}")
    return _nsdf_kernel(np.asarray(samples, dtype=np.float64), int(max_lag))


def _key_maxima(curve: np.ndarray, lag_min: int, lag_max: int) -> list[int]:
    """Maximum index of each stretch between positive-going zero crossings.

    The descending tail of the lag-0 peak never opens a stretch, so it
    cannot produce a candidate. Candidates outside [lag_min, lag_max] are
    dropped.
    """
    positive = curve > 0.0
    starts = np.nonzero(positive[1 : lag_max + 1] & ~positive[:lag_max])[0] + 1
    peaks = []
    for i, start in enumerate(starts):
        end = starts[i + 1] if i + 1 < len(starts) else lag_max + 1
        idx = int(start + np.argmax(curve[start:end]))
        if lag_min <= idx <= lag_max:
            peaks.append(idx)
    return peaks


def _refine_peak(curve: np.ndarray, idx: int) -> tuple[float, float]:
    """Parabolic interpolation through (idx-1, idx, idx+1) on the curve."""
    if idx <= 0 or idx >= len(curve) - 1:
        return float(idx), float(curve[idx])
    left, mid, right = float(curve[idx - 1]), float(curve[idx]), float(curve[idx + 1])
    denom = left - 2.0 * mid + right
    if abs(denom) < 1e-30:
        return float(idx), mid
    delta = 0.5 * (left - right) / denom
    value = mid - 0.25 * (left - right) * delta
    return idx + delta, value


def detect_pitch(frame: AudioFrame, config: PitchConfig | None = None) -> PitchResult:
    """Detect the fundamental of one frame, or report it as unvoiced."""
    cfg = config if config is not None else PitchConfig()
    sr = frame.sample_rate
    cfg.validate(sr)

    x = frame.samples
    n = x.shape[0]
    energy = float(np.dot(x, x))
    if math.sqrt(energy / n) < SILENCE_RMS:
        return Unvoiced(0.0, frame.index)

    lag_min = max(2, int(math.ceil(sr / cfg.freq_max)))
    lag_max = min(int(math.floor(sr / cfg.freq_min)), n - 2)
    if lag_min > lag_max:
        return Unvoiced(0.0, frame.index)

    curve = _nsdf_kernel(np.asarray(x, dtype=np.float64), lag_max)
    peaks = _key_maxima(curve, lag_min, lag_max)
    if not peaks:
        return Unvoiced(0.0, frame.index)

    values = curve[peaks]
    threshold = cfg.peak_threshold * float(values.max())
    chosen = peaks[int(np.argmax(values >= threshold))]

    lag, value = _refine_peak(curve, chosen)
    clarity = min(max(value, 0.0), 1.0)
    if clarity < cfg.voicing_threshold or lag <= 0.0:
        return Unvoiced(clarity, frame.index)

    frequency = sr / lag
    midi_float, midi_note, note_class, octave, cents = quantize_frequency(frequency)
    return PitchEstimate(
        frequency=frequency,
        clarity=clarity,
        midi_float=midi_float,
        midi_note=midi_note,
        note_class=note_class,
        octave=octave,
        cents=cents,
        frame_index=frame.index,
    )
