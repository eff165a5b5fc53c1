"""Throughput benchmark: full engine timing plus a kernel path comparison."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .engine import Engine, EngineConfig


@dataclass
class BenchResult:
    backend: str
    frames: int
    audio_seconds: float
    elapsed_seconds: float
    per_frame_ms: float
    realtime_factor: float


def bench_signal(duration: float, sample_rate: int) -> np.ndarray:
    """Deterministic voiced test material: a vibrato tone over light noise."""
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    freq = 220.0 * 2.0 ** np.sin(2.0 * np.pi * 0.25 * t)
    phase = 2.0 * np.pi * np.cumsum(freq) / sample_rate
    noise = np.random.default_rng(1234).uniform(-0.05, 0.05, n)
    return 0.6 * np.sin(phase) + noise


def benchmark_engine(
    duration: float = 60.0,
    sample_rate: int = 44100,
    frame_size: int = 2048,
    hop_size: int = 512,
) -> BenchResult:
    """Time the full pipeline over `duration` seconds of synthetic audio.

    A short warm-up run absorbs one-time JIT compilation before timing.
    """
    samples = bench_signal(duration, sample_rate)
    config = EngineConfig(frame_size=frame_size, hop_size=hop_size)
    Engine(sample_rate, config).push(samples[: 2 * sample_rate])

    engine = Engine(sample_rate, config)
    start = time.perf_counter()
    records = engine.push(samples)
    elapsed = time.perf_counter() - start
    frames = len(records)
    return BenchResult(
        backend=_kernels.BACKEND,
        frames=frames,
        audio_seconds=duration,
        elapsed_seconds=elapsed,
        per_frame_ms=1000.0 * elapsed / max(frames, 1),
        realtime_factor=duration / elapsed,
    )


def benchmark_kernels(
    frame_size: int = 2048, max_lag: int = 1633, repeats: int = 200
) -> list[tuple[str, float]]:
    """Per-call milliseconds of each available nsdf implementation."""
    x = np.random.default_rng(7).uniform(-1.0, 1.0, frame_size)
    paths = [("numpy", _kernels.nsdf_numpy)]
    if _kernels.nsdf_numba is not None:
        paths.append(("numba", _kernels.nsdf_numba))
    results = []
    for name, fn in paths:
        fn(x, max_lag)  # warm-up / JIT
        start = time.perf_counter()
        for _ in range(repeats):
            fn(x, max_lag)
        per_call = (time.perf_counter() - start) / repeats
        results.append((name, per_call * 1000.0))
    return results


def format_report(result: BenchResult, kernels: list[tuple[str, float]]) -> str:
    lines = [
        f"backend: {result.backend}",
        f"audio: {result.audio_seconds:.1f} s, frames: {result.frames}",
        f"elapsed: {result.elapsed_seconds:.3f} s "
        f"({result.per_frame_ms:.3f} ms/frame, {result.realtime_factor:.1f}x real time)",
        "nsdf kernel paths:",
    ]
    for name, ms in kernels:
        marker = " (active)" if name == result.backend else ""
        lines.append(f"  {name}: {ms:.3f} ms/call{marker}")
    return "\n".join(lines)
