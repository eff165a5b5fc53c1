"""WAV decoding, test-signal synthesis, and overlap framing of sample streams."""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

MIN_FRAME_SIZE = 256
MAX_FRAME_SIZE = 8192

WAVE_KINDS = ("sine", "square", "white-noise", "silence")


class WavError(ValueError):
    """Base class for WAV decode failures."""


class WavContainerError(WavError):
    """Not a RIFF/WAVE container, or structurally malformed."""


class WavUnsupportedError(WavError):
    """Valid container but a codec or layout this decoder does not handle."""


class WavTruncatedError(WavError):
    """Data chunk shorter than its declared size."""


class AliasingError(ValueError):
    """Requested tone frequency at or above Nyquist."""


@dataclass(eq=False)
class AudioFrame:
    """One fixed-length block of normalized samples, the unit of analysis."""

    samples: np.ndarray
    sample_rate: int
    index: int
    timestamp: float


def decode_wav(data: bytes) -> tuple[int, int, np.ndarray]:
    """Decode RIFF/WAVE bytes to ``(sample_rate, channels, samples)``.

    Accepts PCM 16-bit and IEEE float 32-bit, mono or stereo. Stereo is
    downmixed to mono by the per-frame channel mean, so the returned sample
    count equals the data-chunk size divided by bytes per frame. Samples are
    normalized to [-1, 1]; float input outside that range is clamped and the
    clamp count logged as a warning (live capture chains occasionally clip).
    """
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavContainerError("not a RIFF/WAVE container")

    fmt = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body = pos + 8
        if chunk_id == b"fmt ":
            if chunk_size < 16 or body + 16 > len(data):
                raise WavContainerError("fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", data, body)
        elif chunk_id == b"data":
            if fmt is None:
                raise WavContainerError("data chunk appears before fmt chunk")
            return _decode_data_chunk(data, body, chunk_size, fmt)
        pos = body + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    missing = "fmt " if fmt is None else "data"
    raise WavContainerError(f"missing {missing!r} chunk")


def _decode_data_chunk(data, body, chunk_size, fmt):
    audio_format, channels, sample_rate, _byte_rate, _block_align, bits = fmt
    if sample_rate <= 0:
        raise WavContainerError(f"invalid sample rate {sample_rate}")
    if channels not in (1, 2):
        raise WavUnsupportedError(f"{channels} channels unsupported (mono or stereo only)")
    if audio_format == 1 and bits == 16:
        dtype, scale = np.dtype("<i2"), 32768.0
    elif audio_format == 3 and bits == 32:
        dtype, scale = np.dtype("<f4"), None
    else:
        raise WavUnsupportedError(
            f"unsupported codec: format tag {audio_format}, {bits}-bit "
            "(PCM16 and float32 only)"
        )

    available = len(data) - body
    if chunk_size > available:
        raise WavTruncatedError(
            f"data chunk truncated: expected {chunk_size} bytes, got {available}"
        )

    bytes_per_frame = channels * dtype.itemsize
    n_frames = chunk_size // bytes_per_frame
    raw = np.frombuffer(data, dtype=dtype, count=n_frames * channels, offset=body)
    samples = raw.astype(np.float64)
    if scale is not None:
        samples /= scale
    if channels == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)

    clamped = int(np.count_nonzero((samples < -1.0) | (samples > 1.0)))
    if clamped:
        log.warning("clamped %d decoded samples outside [-1, 1]", clamped)
        samples = np.clip(samples, -1.0, 1.0)
    return int(sample_rate), int(channels), samples


def encode_wav(samples: np.ndarray, sample_rate: int, fmt: str = "pcm16") -> bytes:
    """Encode mono samples as RIFF/WAVE bytes (``pcm16`` or ``float32``)."""
    x = np.asarray(samples, dtype=np.float64).reshape(-1)
    if fmt == "pcm16":
        payload = np.clip(np.rint(x * 32767.0), -32768, 32767).astype("<i2").tobytes()
        audio_format, bits = 1, 16
    elif fmt == "float32":
        payload = x.astype("<f4").tobytes()
        audio_format, bits = 3, 32
    else:
        raise ValueError(f"unknown format {fmt!r} (pcm16 or float32)")

    bytes_per_frame = bits // 8
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        audio_format,
        1,
        int(sample_rate),
        int(sample_rate) * bytes_per_frame,
        bytes_per_frame,
        bits,
        b"data",
        len(payload),
    )
    return header + payload


def synthesize(
    kind: str,
    freq: float = 440.0,
    duration: float = 1.0,
    amplitude: float = 1.0,
    sample_rate: int = 44100,
    seed: int = 0,
) -> np.ndarray:
    """Generate a deterministic test signal.

    sine: A*sin(2*pi*f*n/sr); square: sign of that sine scaled by A;
    white-noise: uniform [-A, A] from a seeded generator; silence: zeros.
    """
    if kind not in WAVE_KINDS:
        raise ValueError(f"unknown waveform {kind!r}, expected one of {WAVE_KINDS}")
    if not 0.0 <= amplitude <= 1.0:
        raise ValueError(f"amplitude {amplitude} outside [0, 1]")
    if duration < 0:
        raise ValueError("duration must be non-negative")
    n = int(round(duration * sample_rate))

    if kind in ("sine", "square"):
        if freq >= sample_rate / 2:
            raise AliasingError(f"{freq} Hz is at or above Nyquist ({sample_rate / 2} Hz)")
        if freq <= 0:
            raise ValueError("tone frequency must be positive")
        wave = np.sin(2.0 * np.pi * freq * np.arange(n) / sample_rate)
        if kind == "square":
            wave = np.sign(wave)
        return amplitude * wave
    if kind == "white-noise":
        return np.random.default_rng(seed).uniform(-amplitude, amplitude, n)
    return np.zeros(n)


class Framer:
    """Chops a pushed sample stream into frames of N samples every H samples.

    Consecutive frames overlap by N - H samples; one frame is emitted each
    time H new samples accumulate after the first N. Single-owner mutable
    state: exactly one producer may call :meth:`push` at a time.
    """

    def __init__(self, frame_size: int = 2048, hop_size: int = 512, sample_rate: int = 44100):
        frame_size = int(frame_size)
        if (
            frame_size < MIN_FRAME_SIZE
            or frame_size > MAX_FRAME_SIZE
            or frame_size & (frame_size - 1)
        ):
            raise ValueError(
                f"frame_size must be a power of two in [{MIN_FRAME_SIZE}, {MAX_FRAME_SIZE}],"
                f" got {frame_size}"
            )
        hop_size = int(hop_size)
        if not 1 <= hop_size <= frame_size:
            raise ValueError(f"hop_size must be in [1, frame_size], got {hop_size}")
        if sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        self.frame_size = frame_size
        self.hop_size = hop_size
        self.sample_rate = int(sample_rate)
        self.clamped_total = 0
        self._buf = np.empty(2 * frame_size)
        self._size = 0
        self._next_index = 0

    def push(self, chunk) -> list[AudioFrame]:
        """Feed samples; return every frame the chunk completes, in order.

        A chunk containing non-finite samples is rejected whole and the
        framer state is left untouched.
        """
        chunk = np.asarray(chunk, dtype=np.float64).reshape(-1)
        if chunk.size and not np.all(np.isfinite(chunk)):
            raise ValueError("chunk contains non-finite samples")
        out_of_range = int(np.count_nonzero((chunk < -1.0) | (chunk > 1.0)))
        if out_of_range:
            if self.clamped_total == 0:
                log.warning("clamping samples outside [-1, 1] (counted in clamped_total)")
            self.clamped_total += out_of_range
            chunk = np.clip(chunk, -1.0, 1.0)

        need = self._size + chunk.size
        if need > self._buf.size:
            grown = np.empty(max(need, 2 * self._buf.size))
            grown[: self._size] = self._buf[: self._size]
            self._buf = grown
        self._buf[self._size : need] = chunk
        self._size = need

        frames = []
        offset = 0
        while self._size - offset >= self.frame_size:
            samples = self._buf[offset : offset + self.frame_size].copy()
            frames.append(
                AudioFrame(
                    samples=samples,
                    sample_rate=self.sample_rate,
                    index=self._next_index,
                    timestamp=self._next_index * self.hop_size / self.sample_rate,
                )
            )
            self._next_index += 1
            offset += self.hop_size
        if offset:
            remaining = self._size - offset
            self._buf[:remaining] = self._buf[offset : self._size].copy()
            self._size = remaining
        return frames

    @property
    def pending(self) -> int:
        """Samples currently buffered but not yet part of an emitted frame."""
        return self._size
