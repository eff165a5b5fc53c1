"""The composed pipeline: PCM chunks in, protocol frame records out."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

import numpy as np

from .features import extract_features
from .ingest import Framer
from .mapper import MapperState, MappingConfig, map_frame
from .pitch import PitchConfig, detect_pitch
from .protocol import FrameRecord, SessionHeader


@dataclass
class EngineConfig:
    frame_size: int = 2048
    hop_size: int = 512
    mapping: MappingConfig = field(default_factory=MappingConfig)
    pitch: PitchConfig = field(default_factory=PitchConfig)
    include_features: bool = True
    include_pitch: bool = True


class Engine:
    """Single-owner streaming pipeline; push PCM, collect FrameRecords.

    Output is deterministic for identical input streams, so any chunking of
    the same samples yields the identical record sequence. Real-time
    embedders must call :meth:`push` off the render/audio-callback critical
    path or guarantee the per-frame budget is met.
    """

    def __init__(
        self,
        sample_rate: int,
        config: EngineConfig | None = None,
        created_utc: str | None = None,
    ):
        self.config = config if config is not None else EngineConfig()
        self.config.pitch.validate(sample_rate)
        self.sample_rate = int(sample_rate)
        self._framer = Framer(self.config.frame_size, self.config.hop_size, sample_rate)
        self._mapper = MapperState(
            self.config.mapping, self.config.frame_size, sample_rate
        )
        if created_utc is None:
            created_utc = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        self.header = SessionHeader(
            sample_rate=self.sample_rate,
            frame_size=self.config.frame_size,
            hop_size=self.config.hop_size,
            mapping=replace(self.config.mapping),
            created_utc=created_utc,
        )

    def push(self, chunk) -> list[FrameRecord]:
        """Process a chunk; return records for every frame it completes.

        Chunks with non-finite samples are rejected whole and the engine
        state is left unchanged.
        """
        records = []
        for frame in self._framer.push(chunk):
            features = extract_features(frame)
            pitch = detect_pitch(frame, self.config.pitch)
            visual = map_frame(pitch, features, self._mapper)
            records.append(
                FrameRecord.from_pipeline(
                    visual,
                    features if self.config.include_features else None,
                    pitch if self.config.include_pitch else None,
                )
            )
        return records

    @property
    def frames_emitted(self) -> int:
        return self._framer._next_index


def analyze_samples(
    samples: np.ndarray,
    sample_rate: int,
    config: EngineConfig | None = None,
    created_utc: str | None = None,
) -> tuple[SessionHeader, list[FrameRecord]]:
    """Single-shot batch analysis: a fresh engine fed the whole signal."""
    engine = Engine(sample_rate, config, created_utc)
    return engine.header, engine.push(samples)
