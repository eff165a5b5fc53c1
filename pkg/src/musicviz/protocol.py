"""Versioned line protocol for analysis sessions.

A session stream is UTF-8 text with one JSON object per line. The first
line is the session header; every following line is a frame record:

    {"type": "header", "protocolVersion": 1, "sampleRate": ..,
     "frameSize": .., "hopSize": .., "createdUtc": "..", "mapping": {..}}
    {"type": "frame", "frameIndex": 0, "timestamp": 0.0,
     "visual": {..}, "features": {..}?, "pitch": {..}?}

Fixed key sets:

* visual (always present): hue, saturation, lightness, scale, roughness,
  sharpnessGlow, granularity, displacement, voiced
* features (optional): energy, rms, spectralCentroid, spectralFlatness,
  spectralKurtosis, specificLoudness (list of 24), loudnessTotal,
  perceptualSpread, perceptualSharpness
* pitch (optional): voiced, clarity, and when voiced also frequency,
  midiFloat, midiNote, noteClass, octave, cents
* mapping: the MappingConfig fields in camelCase (palette, saturationLow,
  saturationHigh, scaleMin, scaleMax, energyFloorRms, hueShiftRange,
  alphaColor, alphaScale, alphaTexture, roughnessGamma, invertRoughness,
  peakDecay)

All float fields are held at float32 precision and printed with at most
nine significant digits; nine digits round-trip a float32 exactly, so
parse(serialize(record)) reproduces every field bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

import numpy as np

from .features import N_BARK_BANDS, FeatureVector
from .mapper import MappingConfig, VisualFrame
from .pitch import PitchEstimate, PitchResult, Unvoiced

PROTOCOL_VERSION = 1


class ProtocolError(ValueError):
    """Base class for stream format errors."""


class VersionError(ProtocolError):
    """Header declares a protocol version this reader does not speak."""


class SchemaError(ProtocolError):
    """A required key is missing or has the wrong shape."""


class ParseError(ProtocolError):
    """A line is not a well-formed protocol object."""


def quantize(value: float) -> float:
    """Round to float32 precision (the protocol's number resolution)."""
    return float(np.float32(value))


def _float_out(value: float) -> float:
    if not math.isfinite(value):
        raise ProtocolError(f"non-finite value {value!r} cannot be serialized")
    # The nearest 9-significant-digit decimal still identifies the float32
    # uniquely, and json prints it with no more digits than that.
    return float(f"{value:.9g}")


@dataclass
class SessionHeader:
    """First record of every stream; pins the config the frames came from."""

    sample_rate: int
    frame_size: int
    hop_size: int
    mapping: MappingConfig
    created_utc: str
    protocol_version: int = PROTOCOL_VERSION


@dataclass
class FrameRecord:
    """One analysis frame on the wire: visuals plus optional detail blocks."""

    frame_index: int
    timestamp: float
    visual: VisualFrame
    features: FeatureVector | None = None
    pitch: PitchResult | None = None

    @classmethod
    def from_pipeline(
        cls,
        visual: VisualFrame,
        features: FeatureVector | None = None,
        pitch: PitchResult | None = None,
    ) -> "FrameRecord":
        """Build a record with every float quantized to wire precision."""
        v = VisualFrame(
            hue=quantize(visual.hue),
            saturation=quantize(visual.saturation),
            lightness=quantize(visual.lightness),
            scale=quantize(visual.scale),
            roughness=quantize(visual.roughness),
            sharpness_glow=quantize(visual.sharpness_glow),
            granularity=quantize(visual.granularity),
            displacement=quantize(visual.displacement),
            voiced=bool(visual.voiced),
            frame_index=int(visual.frame_index),
            timestamp=quantize(visual.timestamp),
        )
        f = None
        if features is not None:
            f = FeatureVector(
                energy=quantize(features.energy),
                rms=quantize(features.rms),
                spectral_centroid=quantize(features.spectral_centroid),
                spectral_flatness=quantize(features.spectral_flatness),
                spectral_kurtosis=quantize(features.spectral_kurtosis),
                specific_loudness=np.asarray(
                    features.specific_loudness, dtype=np.float32
                ).astype(np.float64),
                loudness_total=quantize(features.loudness_total),
                perceptual_spread=quantize(features.perceptual_spread),
                perceptual_sharpness=quantize(features.perceptual_sharpness),
                frame_index=int(visual.frame_index),
                timestamp=quantize(visual.timestamp),
            )
        p: PitchResult | None = None
        if isinstance(pitch, PitchEstimate):
            p = PitchEstimate(
                frequency=quantize(pitch.frequency),
                clarity=quantize(pitch.clarity),
                midi_float=quantize(pitch.midi_float),
                midi_note=int(pitch.midi_note),
                note_class=int(pitch.note_class),
                octave=int(pitch.octave),
                cents=quantize(pitch.cents),
                frame_index=int(visual.frame_index),
            )
        elif isinstance(pitch, Unvoiced):
            p = Unvoiced(clarity=quantize(pitch.clarity), frame_index=int(visual.frame_index))
        return cls(int(visual.frame_index), quantize(visual.timestamp), v, f, p)


def serialize_header(header: SessionHeader) -> str:
    m = header.mapping
    obj = {
        "type": "header",
        "protocolVersion": header.protocol_version,
        "sampleRate": header.sample_rate,
        "frameSize": header.frame_size,
        "hopSize": header.hop_size,
        "createdUtc": header.created_utc,
        "mapping": {
            "palette": [_float_out(h) for h in m.palette],
            "saturationLow": _float_out(m.saturation_low),
            "saturationHigh": _float_out(m.saturation_high),
            "scaleMin": _float_out(m.scale_min),
            "scaleMax": _float_out(m.scale_max),
            "energyFloorRms": _float_out(m.energy_floor_rms),
            "hueShiftRange": _float_out(m.hue_shift_range),
            "alphaColor": _float_out(m.alpha_color),
            "alphaScale": _float_out(m.alpha_scale),
            "alphaTexture": _float_out(m.alpha_texture),
            "roughnessGamma": _float_out(m.roughness_gamma),
            "invertRoughness": bool(m.invert_roughness),
            "peakDecay": _float_out(m.peak_decay),
        },
    }
    return json.dumps(obj, separators=(",", ":"))


def serialize_record(record: FrameRecord) -> str:
    v = record.visual
    obj = {
        "type": "frame",
        "frameIndex": int(record.frame_index),
        "timestamp": _float_out(record.timestamp),
        "visual": {
            "hue": _float_out(v.hue),
            "saturation": _float_out(v.saturation),
            "lightness": _float_out(v.lightness),
            "scale": _float_out(v.scale),
            "roughness": _float_out(v.roughness),
            "sharpnessGlow": _float_out(v.sharpness_glow),
            "granularity": _float_out(v.granularity),
            "displacement": _float_out(v.displacement),
            "voiced": bool(v.voiced),
        },
    }
    f = record.features
    if f is not None:
        obj["features"] = {
            "energy": _float_out(f.energy),
            "rms": _float_out(f.rms),
            "spectralCentroid": _float_out(f.spectral_centroid),
            "spectralFlatness": _float_out(f.spectral_flatness),
            "spectralKurtosis": _float_out(f.spectral_kurtosis),
            "specificLoudness": [_float_out(x) for x in f.specific_loudness],
            "loudnessTotal": _float_out(f.loudness_total),
            "perceptualSpread": _float_out(f.perceptual_spread),
            "perceptualSharpness": _float_out(f.perceptual_sharpness),
        }
    p = record.pitch
    if isinstance(p, PitchEstimate):
        obj["pitch"] = {
            "voiced": True,
            "clarity": _float_out(p.clarity),
            "frequency": _float_out(p.frequency),
            "midiFloat": _float_out(p.midi_float),
            "midiNote": int(p.midi_note),
            "noteClass": int(p.note_class),
            "octave": int(p.octave),
            "cents": _float_out(p.cents),
        }
    elif isinstance(p, Unvoiced):
        obj["pitch"] = {"voiced": False, "clarity": _float_out(p.clarity)}
    return json.dumps(obj, separators=(",", ":"))


_decoder = json.JSONDecoder()


def _parse_object(line: str) -> dict:
    stripped = line.rstrip("\n")
    try:
        obj, end = _decoder.raw_decode(stripped)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at byte {exc.pos}: {exc.msg}") from None
    if stripped[end:].strip():
        raise ParseError(f"trailing garbage at byte {end}")
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object")
    return obj


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise SchemaError(f"missing required key {key!r} in {where}")
    return obj[key]


def _require_float(obj: dict, key: str, where: str) -> float:
    value = _require(obj, key, where)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise SchemaError(f"key {key!r} in {where} must be a number")
    return quantize(float(value))


def _require_config_float(obj: dict, key: str, where: str) -> float:
    # Config values are human-entered decimals; nine significant digits
    # reproduce them exactly, so no float32 quantization here.
    value = _require(obj, key, where)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise SchemaError(f"key {key!r} in {where} must be a number")
    return float(value)


def parse_header(line: str) -> SessionHeader:
    obj = _parse_object(line)
    if obj.get("type") != "header":
        raise SchemaError("expected a header object (type 'header')")
    version = _require(obj, "protocolVersion", "header")
    if version != PROTOCOL_VERSION:
        raise VersionError(f"unknown protocolVersion {version!r} (expected {PROTOCOL_VERSION})")
    m = _require(obj, "mapping", "header")
    palette = _require(m, "palette", "header.mapping")
    mapping = MappingConfig(
        palette=tuple(float(h) for h in palette),
        saturation_low=_require_config_float(m, "saturationLow", "header.mapping"),
        saturation_high=_require_config_float(m, "saturationHigh", "header.mapping"),
        scale_min=_require_config_float(m, "scaleMin", "header.mapping"),
        scale_max=_require_config_float(m, "scaleMax", "header.mapping"),
        energy_floor_rms=_require_config_float(m, "energyFloorRms", "header.mapping"),
        hue_shift_range=_require_config_float(m, "hueShiftRange", "header.mapping"),
        alpha_color=_require_config_float(m, "alphaColor", "header.mapping"),
        alpha_scale=_require_config_float(m, "alphaScale", "header.mapping"),
        alpha_texture=_require_config_float(m, "alphaTexture", "header.mapping"),
        roughness_gamma=_require_config_float(m, "roughnessGamma", "header.mapping"),
        invert_roughness=bool(_require(m, "invertRoughness", "header.mapping")),
        peak_decay=_require_config_float(m, "peakDecay", "header.mapping"),
    )
    return SessionHeader(
        sample_rate=int(_require(obj, "sampleRate", "header")),
        frame_size=int(_require(obj, "frameSize", "header")),
        hop_size=int(_require(obj, "hopSize", "header")),
        mapping=mapping,
        created_utc=str(_require(obj, "createdUtc", "header")),
        protocol_version=int(version),
    )


def parse_record(line: str) -> FrameRecord:
    obj = _parse_object(line)
    if obj.get("type") != "frame":
        raise SchemaError("expected a frame object (type 'frame')")
    frame_index = _require(obj, "frameIndex", "frame")
    if not isinstance(frame_index, int) or isinstance(frame_index, bool):
        raise SchemaError("key 'frameIndex' in frame must be an integer")
    timestamp = _require_float(obj, "timestamp", "frame")
    v = _require(obj, "visual", "frame")
    visual = VisualFrame(
        hue=_require_float(v, "hue", "frame.visual"),
        saturation=_require_float(v, "saturation", "frame.visual"),
        lightness=_require_float(v, "lightness", "frame.visual"),
        scale=_require_float(v, "scale", "frame.visual"),
        roughness=_require_float(v, "roughness", "frame.visual"),
        sharpness_glow=_require_float(v, "sharpnessGlow", "frame.visual"),
        granularity=_require_float(v, "granularity", "frame.visual"),
        displacement=_require_float(v, "displacement", "frame.visual"),
        voiced=bool(_require(v, "voiced", "frame.visual")),
        frame_index=frame_index,
        timestamp=timestamp,
    )
    features = None
    if "features" in obj:
        f = obj["features"]
        loudness = _require(f, "specificLoudness", "frame.features")
        if not isinstance(loudness, list) or len(loudness) != N_BARK_BANDS:
            raise SchemaError(
                f"key 'specificLoudness' in frame.features must be a list of {N_BARK_BANDS}"
            )
        features = FeatureVector(
            energy=_require_float(f, "energy", "frame.features"),
            rms=_require_float(f, "rms", "frame.features"),
            spectral_centroid=_require_float(f, "spectralCentroid", "frame.features"),
            spectral_flatness=_require_float(f, "spectralFlatness", "frame.features"),
            spectral_kurtosis=_require_float(f, "spectralKurtosis", "frame.features"),
            specific_loudness=np.asarray(loudness, dtype=np.float32).astype(np.float64),
            loudness_total=_require_float(f, "loudnessTotal", "frame.features"),
            perceptual_spread=_require_float(f, "perceptualSpread", "frame.features"),
            perceptual_sharpness=_require_float(f, "perceptualSharpness", "frame.features"),
            frame_index=frame_index,
            timestamp=timestamp,
        )
    pitch: PitchResult | None = None
    if "pitch" in obj:
        p = obj["pitch"]
        voiced = _require(p, "voiced", "frame.pitch")
        clarity = _require_float(p, "clarity", "frame.pitch")
        if voiced:
            pitch = PitchEstimate(
                frequency=_require_float(p, "frequency", "frame.pitch"),
                clarity=clarity,
                midi_float=_require_float(p, "midiFloat", "frame.pitch"),
                midi_note=int(_require(p, "midiNote", "frame.pitch")),
                note_class=int(_require(p, "noteClass", "frame.pitch")),
                octave=int(_require(p, "octave", "frame.pitch")),
                cents=_require_float(p, "cents", "frame.pitch"),
                frame_index=frame_index,
            )
        else:
            pitch = Unvoiced(clarity=clarity, frame_index=frame_index)
    return FrameRecord(frame_index, timestamp, visual, features, pitch)


def parse_line(line: str) -> Union[SessionHeader, FrameRecord]:
    """Parse either stream object; dispatches on the 'type' key."""
    obj = _parse_object(line)
    kind = _require(obj, "type", "stream object")
    if kind == "header":
        return parse_header(line)
    if kind == "frame":
        return parse_record(line)
    raise SchemaError(f"unknown object type {kind!r}")


def read_stream(lines: Iterable[str]) -> Iterator[Union[SessionHeader, FrameRecord]]:
    """Yield the header then records, enforcing order and index monotonicity.

    Raises the underlying ProtocolError subclass with the one-based line
    number prefixed to the message.
    """
    header_seen = False
    last_index: int | None = None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = parse_line(line)
            if isinstance(obj, SessionHeader):
                if header_seen:
                    raise ParseError("duplicate header")
                header_seen = True
            else:
                if not header_seen:
                    raise ParseError("frame record before header")
                if last_index is not None and obj.frame_index <= last_index:
                    raise ParseError(
                        f"frameIndex {obj.frame_index} does not increase (last was {last_index})"
                    )
                last_index = obj.frame_index
        except ProtocolError as exc:
            raise type(exc)(f"line {lineno}: {exc}") from None
        yield obj


# Flat CSV export. Column order is fixed: the visual columns, then feature
# columns when requested, then pitch columns when requested.

CSV_VISUAL_COLUMNS = [
    "frameIndex", "timestamp", "hue", "saturation", "lightness", "scale",
    "roughness", "sharpnessGlow", "granularity", "displacement", "voiced",
]
CSV_FEATURE_COLUMNS = [
    "energy", "rms", "spectralCentroid", "spectralFlatness", "spectralKurtosis",
    "loudnessTotal", "perceptualSpread", "perceptualSharpness",
] + [f"bark{i:02d}" for i in range(N_BARK_BANDS)]
CSV_PITCH_COLUMNS = [
    "pitchVoiced", "clarity", "frequency", "midiNote", "noteClass", "octave", "cents",
]


def csv_columns(include_features: bool, include_pitch: bool) -> list[str]:
    columns = list(CSV_VISUAL_COLUMNS)
    if include_features:
        columns += CSV_FEATURE_COLUMNS
    if include_pitch:
        columns += CSV_PITCH_COLUMNS
    return columns


def record_to_csv_row(
    record: FrameRecord, include_features: bool, include_pitch: bool
) -> list:
    v = record.visual
    row: list = [
        record.frame_index, _float_out(record.timestamp), _float_out(v.hue),
        _float_out(v.saturation), _float_out(v.lightness), _float_out(v.scale),
        _float_out(v.roughness), _float_out(v.sharpness_glow),
        _float_out(v.granularity), _float_out(v.displacement), int(v.voiced),
    ]
    if include_features:
        f = record.features
        if f is None:
            row += [""] * len(CSV_FEATURE_COLUMNS)
        else:
            row += [
                _float_out(f.energy), _float_out(f.rms),
                _float_out(f.spectral_centroid), _float_out(f.spectral_flatness),
                _float_out(f.spectral_kurtosis), _float_out(f.loudness_total),
                _float_out(f.perceptual_spread), _float_out(f.perceptual_sharpness),
            ] + [_float_out(x) for x in f.specific_loudness]
    if include_pitch:
        p = record.pitch
        if isinstance(p, PitchEstimate):
            row += [1, _float_out(p.clarity), _float_out(p.frequency),
                    p.midi_note, p.note_class, p.octave, _float_out(p.cents)]
        elif isinstance(p, Unvoiced):
            row += [0, _float_out(p.clarity), "", "", "", "", ""]
        else:
            row += [""] * len(CSV_PITCH_COLUMNS)
    return row
