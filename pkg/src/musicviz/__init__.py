"""Streaming music-to-visual mapping engine.

Turns PCM audio into per-frame visual parameters: the detected pitch picks
the color, signal energy drives the object scale, and spectral timbre
shapes the surface texture. The Engine is the single push-driven pipeline;
the protocol module defines the line format sessions are stored in.
"""

from ._kernels import BACKEND
from .engine import Engine, EngineConfig, analyze_samples
from .features import (
    BARK_BAND_EDGES_HZ,
    FeatureVector,
    Spectrum,
    bark_loudness,
    compute_spectrum,
    energy_and_rms,
    extract_features,
    perceptual_sharpness,
    perceptual_spread,
    spectral_centroid,
    spectral_flatness,
    spectral_kurtosis,
)
from .ingest import (
    AliasingError,
    AudioFrame,
    Framer,
    WavContainerError,
    WavError,
    WavTruncatedError,
    WavUnsupportedError,
    decode_wav,
    encode_wav,
    synthesize,
)
from .mapper import (
    MapperState,
    MappingConfig,
    SequencingError,
    VisualFrame,
    dump_mapping_config,
    load_mapping_config,
    map_energy_to_scale,
    map_frame,
    map_pitch_to_color,
    map_timbre_to_texture,
)
from .pitch import (
    NOTE_NAMES,
    PitchConfig,
    PitchConfigError,
    PitchEstimate,
    PitchResult,
    Unvoiced,
    detect_pitch,
    nsdf,
    quantize_frequency,
)
from .protocol import (
    PROTOCOL_VERSION,
    FrameRecord,
    ParseError,
    ProtocolError,
    SchemaError,
    SessionHeader,
    VersionError,
    parse_header,
    parse_line,
    parse_record,
    read_stream,
    serialize_header,
    serialize_record,
)

__version__ = "0.1.0"
