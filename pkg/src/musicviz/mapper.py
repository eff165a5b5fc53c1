"""Mapping pitch, energy, and timbre onto smoothed visual parameters.

Three raw mapping rules produce color, scale, and texture per frame; each
group is then exponentially smoothed with its own coefficient so parameter
updates at frame rate do not flicker. Unvoiced frames freeze the color at
its previous smoothed value while scale and texture keep updating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

from .features import FeatureVector
from .pitch import PitchEstimate, PitchResult

# Chromatic circle, C = 0 degrees (red) through B = 330.
DEFAULT_PALETTE = tuple(float(30 * i) for i in range(12))

GLOW_SHARPNESS_REF = 3.0  # perceptual sharpness that saturates the glow
GRANULARITY_LOG_REF = math.log(101.0)  # kurtosis 100 saturates the grain
LIGHTNESS_BASE = 0.5
LIGHTNESS_GLOW_GAIN = 0.2


class SequencingError(ValueError):
    """Pitch result and feature vector come from different frames."""


@dataclass
class MappingConfig:
    """Palette, ranges, and smoothing constants for the visual mapping."""

    palette: tuple = DEFAULT_PALETTE
    saturation_low: float = 0.25
    saturation_high: float = 0.95
    scale_min: float = 0.6
    scale_max: float = 2.0
    energy_floor_rms: float = 0.2
    hue_shift_range: float = 20.0
    alpha_color: float = 0.3
    alpha_scale: float = 0.5
    alpha_texture: float = 0.2
    roughness_gamma: float = 0.5
    invert_roughness: bool = False
    peak_decay: float = 0.999

    def validate(self) -> None:
        if len(self.palette) != 12 or len(set(self.palette)) != 12:
            raise ValueError("palette must hold 12 distinct hues")
        if not all(0.0 <= h < 360.0 for h in self.palette):
            raise ValueError("palette hues must lie in [0, 360)")
        if not 0.0 <= self.saturation_low < self.saturation_high <= 1.0:
            raise ValueError("need 0 <= saturation_low < saturation_high <= 1")
        if not 0.0 < self.scale_min < self.scale_max:
            raise ValueError("need 0 < scale_min < scale_max")
        for name in ("alpha_color", "alpha_scale", "alpha_texture"):
            alpha = getattr(self, name)
            if not 0.0 < alpha <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {alpha}")
        if self.energy_floor_rms <= 0.0:
            raise ValueError("energy_floor_rms must be positive")
        if self.hue_shift_range < 0.0:
            raise ValueError("hue_shift_range must be non-negative")
        if self.roughness_gamma <= 0.0:
            raise ValueError("roughness_gamma must be positive")
        if not 0.0 < self.peak_decay <= 1.0:
            raise ValueError("peak_decay must be in (0, 1]")


@dataclass
class VisualFrame:
    """One frame of mapped visual parameters."""

    hue: float
    saturation: float
    lightness: float
    scale: float
    roughness: float
    sharpness_glow: float
    granularity: float
    displacement: float
    voiced: bool
    frame_index: int = 0
    timestamp: float = 0.0


class Texture(NamedTuple):
    roughness: float
    glow: float
    granularity: float
    displacement: float
    hue_shift: float


class MapperState:
    """Previous smoothed frame plus the adaptive energy reference.

    Single-owner mutable state: one map_frame call at a time per instance.
    """

    def __init__(
        self,
        config: MappingConfig | None = None,
        frame_size: int = 2048,
        sample_rate: int = 44100,
    ):
        self.config = config if config is not None else MappingConfig()
        self.config.validate()
        self.frame_size = int(frame_size)
        self.sample_rate = int(sample_rate)
        self.energy_floor = self.frame_size * self.config.energy_floor_rms**2
        self.peak_energy = 0.0
        self.previous: VisualFrame | None = None


def map_pitch_to_color(
    p: PitchResult, cfg: MappingConfig
) -> tuple[float, float] | None:
    """Raw (hue, saturation) for a voiced result; None means hold previous.

    Hue comes from the note class; saturation rises linearly with octave
    from saturation_low at octave 0 to saturation_high at octave 8.
    """
    if not isinstance(p, PitchEstimate):
        return None
    t = min(max(p.octave / 8.0, 0.0), 1.0)
    saturation = cfg.saturation_low + (cfg.saturation_high - cfg.saturation_low) * t
    return cfg.palette[p.note_class], saturation


def map_energy_to_scale(f: FeatureVector, state: MapperState, cfg: MappingConfig | None = None) -> float:
    """Raw scale from energy, normalized by a decaying running peak.

    The reference is max(frame_size * energy_floor_rms^2, running peak), so a
    quiet stream still spans the scale range without pinning at an extreme.
    Updates the running peak in state.
    """
    cfg = cfg if cfg is not None else state.config
    state.peak_energy = max(f.energy, state.peak_energy * cfg.peak_decay)
    reference = max(state.energy_floor, state.peak_energy)
    e_norm = min(1.0, f.energy / reference)
    return cfg.scale_min + (cfg.scale_max - cfg.scale_min) * e_norm


def map_timbre_to_texture(
    f: FeatureVector, cfg: MappingConfig, sample_rate: int
) -> Texture:
    """Raw texture parameters and the centroid-driven hue shift."""
    flatness = min(max(f.spectral_flatness, 0.0), 1.0)
    if cfg.invert_roughness:
        flatness = 1.0 - flatness
    roughness = flatness**cfg.roughness_gamma
    glow = min(max(f.perceptual_sharpness / GLOW_SHARPNESS_REF, 0.0), 1.0)
    granularity = min(
        max(math.log1p(max(f.spectral_kurtosis, 0.0)) / GRANULARITY_LOG_REF, 0.0), 1.0
    )
    displacement = min(max(f.perceptual_spread, 0.0), 1.0)
    shift_t = min(max(f.spectral_centroid / (sample_rate / 4.0), 0.0), 1.0)
    hue_shift = -cfg.hue_shift_range + 2.0 * cfg.hue_shift_range * shift_t
    return Texture(roughness, glow, granularity, displacement, hue_shift)


def _ema(prev: float, raw: float, alpha: float) -> float:
    return alpha * raw + (1.0 - alpha) * prev


def _ema_hue(prev: float, raw: float, alpha: float) -> float:
    # Smooth along the shortest arc so 350 -> 10 degrees does not sweep 340.
    diff = (raw - prev + 180.0) % 360.0 - 180.0
    return (prev + alpha * diff) % 360.0


def map_frame(p: PitchResult, f: FeatureVector, state: MapperState) -> VisualFrame:
    """Apply all three mapping rules, smooth, and update the state."""
    if p.frame_index != f.frame_index:
        raise SequencingError(
            f"pitch result is for frame {p.frame_index}, features for {f.frame_index}"
        )
    cfg = state.config
    texture = map_timbre_to_texture(f, cfg, state.sample_rate)
    raw_scale = map_energy_to_scale(f, state, cfg)
    color = map_pitch_to_color(p, cfg)
    voiced = color is not None
    prev = state.previous

    if voiced:
        raw_hue = (color[0] + texture.hue_shift) % 360.0
        raw_saturation = color[1]
    elif prev is not None:
        raw_hue, raw_saturation = prev.hue, prev.saturation
    else:
        # Nothing to freeze before the first voiced frame; start neutral.
        raw_hue, raw_saturation = cfg.palette[0], cfg.saturation_low

    raw_lightness = min(
        max(LIGHTNESS_BASE + LIGHTNESS_GLOW_GAIN * texture.glow, 0.0), 1.0
    )

    if prev is None:
        frame = VisualFrame(
            hue=raw_hue,
            saturation=raw_saturation,
            lightness=raw_lightness,
            scale=raw_scale,
            roughness=texture.roughness,
            sharpness_glow=texture.glow,
            granularity=texture.granularity,
            displacement=texture.displacement,
            voiced=voiced,
            frame_index=f.frame_index,
            timestamp=f.timestamp,
        )
    else:
        if voiced:
            hue = _ema_hue(prev.hue, raw_hue, cfg.alpha_color)
            saturation = _ema(prev.saturation, raw_saturation, cfg.alpha_color)
        else:
            hue, saturation = prev.hue, prev.saturation
        frame = VisualFrame(
            hue=hue,
            saturation=saturation,
            lightness=_ema(prev.lightness, raw_lightness, cfg.alpha_color),
            scale=_ema(prev.scale, raw_scale, cfg.alpha_scale),
            roughness=_ema(prev.roughness, texture.roughness, cfg.alpha_texture),
            sharpness_glow=_ema(prev.sharpness_glow, texture.glow, cfg.alpha_texture),
            granularity=_ema(prev.granularity, texture.granularity, cfg.alpha_texture),
            displacement=_ema(prev.displacement, texture.displacement, cfg.alpha_texture),
            voiced=voiced,
            frame_index=f.frame_index,
            timestamp=f.timestamp,
        )
    state.previous = frame
    return frame


# Plain-text key-value configuration, keys mirroring the field names above.

def dump_mapping_config(cfg: MappingConfig) -> str:
    """Render a MappingConfig as the key = value config document."""
    lines = []
    for name in MappingConfig.__dataclass_fields__:
        value = getattr(cfg, name)
        if name == "palette":
            value = ",".join(f"{h:g}" for h in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{name} = {value}")
    return "\n".join(lines) + "\n"


def load_mapping_config(text: str) -> MappingConfig:
    """Parse the key = value config document; unknown keys are errors."""
    values: dict = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        if key not in MappingConfig.__dataclass_fields__:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        if key == "palette":
            try:
                values[key] = tuple(float(h) for h in raw_value.split(","))
            except ValueError:
                raise ValueError(f"config line {lineno}: palette must be 12 hues") from None
        elif key == "invert_roughness":
            if raw_value.lower() not in ("true", "false"):
                raise ValueError(f"config line {lineno}: expected true or false")
            values[key] = raw_value.lower() == "true"
        else:
            try:
                values[key] = float(raw_value)
            except ValueError:
                raise ValueError(f"config line {lineno}: {key} must be a number") from None
    cfg = replace(MappingConfig(), **values)
    cfg.validate()
    return cfg
