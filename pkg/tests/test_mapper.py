import copy
import math

import numpy as np
import pytest

from musicviz import (
    FeatureVector,
    MapperState,
    MappingConfig,
    PitchEstimate,
    SequencingError,
    Unvoiced,
    analyze_samples,
    dump_mapping_config,
    load_mapping_config,
    map_energy_to_scale,
    map_frame,
    map_pitch_to_color,
    map_timbre_to_texture,
    synthesize,
)

SR = 44100


def features(
    energy=100.0, flatness=0.5, kurtosis=3.0, centroid=1000.0,
    spread=0.1, sharpness=1.0, frame_index=0,
):
    loud = np.zeros(24)
    loud[5] = 1.0
    return FeatureVector(
        energy=energy,
        rms=math.sqrt(energy / 2048),
        spectral_centroid=centroid,
        spectral_flatness=flatness,
        spectral_kurtosis=kurtosis,
        specific_loudness=loud,
        loudness_total=1.0,
        perceptual_spread=spread,
        perceptual_sharpness=sharpness,
        frame_index=frame_index,
        timestamp=frame_index * 512 / SR,
    )


def estimate(note_class=9, octave=4, frame_index=0, frequency=440.0):
    midi = (octave + 1) * 12 + note_class
    return PitchEstimate(
        frequency=frequency, clarity=0.95, midi_float=float(midi),
        midi_note=midi, note_class=note_class, octave=octave, cents=0.0,
        frame_index=frame_index,
    )


class TestPitchToColor:
    def test_a4_default_palette(self):
        hue, saturation = map_pitch_to_color(estimate(9, 4), MappingConfig())
        assert hue == 270.0
        assert saturation == pytest.approx(0.60, abs=1e-12)

    def test_octave_saturation_extremes_and_monotonicity(self):
        cfg = MappingConfig()
        sats = [map_pitch_to_color(estimate(9, o), cfg)[1] for o in range(9)]
        assert sats[0] == pytest.approx(0.25, abs=1e-12)
        assert sats[8] == pytest.approx(0.95, abs=1e-12)
        assert all(a < b for a, b in zip(sats, sats[1:]))

    def test_unvoiced_holds(self):
        assert map_pitch_to_color(Unvoiced(0.2), MappingConfig()) is None


class TestEnergyToScale:
    def test_zero_energy_is_scale_min(self):
        state = MapperState(frame_size=2048)
        assert map_energy_to_scale(features(energy=0.0), state) == pytest.approx(0.6)

    def test_reference_energy_is_scale_max(self):
        state = MapperState(frame_size=2048)
        floor = state.energy_floor  # 2048 * 0.04
        assert floor == pytest.approx(2048 * 0.04)
        assert map_energy_to_scale(features(energy=floor), state) == pytest.approx(2.0)

    def test_monotone_in_energy_with_identical_state(self):
        base = MapperState(frame_size=2048)
        base.peak_energy = 500.0
        last = -1.0
        for energy in np.linspace(0.0, 1000.0, 64):
            state = copy.deepcopy(base)
            scale = map_energy_to_scale(features(energy=float(energy)), state)
            assert scale >= last
            last = scale

    def test_running_peak_decays(self):
        state = MapperState(frame_size=2048)
        map_energy_to_scale(features(energy=1000.0), state)
        assert state.peak_energy == 1000.0
        map_energy_to_scale(features(energy=0.0), state)
        assert state.peak_energy == pytest.approx(999.0)


class TestTimbreToTexture:
    def test_silence_conventions(self):
        cfg = MappingConfig()
        t = map_timbre_to_texture(
            features(flatness=1.0, sharpness=0.0, spread=0.0, kurtosis=3.0, centroid=0.0),
            cfg, SR,
        )
        assert t.roughness == 1.0
        assert t.glow == 0.0
        assert t.displacement == 0.0
        assert t.granularity == pytest.approx(math.log(4) / math.log(101), abs=1e-12)
        assert t.hue_shift == -20.0

    def test_sine_flatness_roughness(self):
        t = map_timbre_to_texture(features(flatness=0.09), MappingConfig(), SR)
        assert t.roughness < 0.32  # sqrt(0.1) is about 0.316

    def test_centroid_midpoint_no_shift(self):
        t = map_timbre_to_texture(features(centroid=SR / 8), MappingConfig(), SR)
        assert t.hue_shift == pytest.approx(0.0, abs=1e-9)

    def test_invert_roughness_flag(self):
        cfg = MappingConfig(invert_roughness=True)
        t = map_timbre_to_texture(features(flatness=1.0), cfg, SR)
        assert t.roughness == 0.0

    def test_extreme_kurtosis_clamps(self):
        t = map_timbre_to_texture(features(kurtosis=1e9), MappingConfig(), SR)
        assert t.granularity == 1.0


class TestMapFrame:
    def test_sequencing_error(self):
        state = MapperState()
        with pytest.raises(SequencingError):
            map_frame(estimate(frame_index=3), features(frame_index=4), state)

    def test_first_frame_equals_raw(self):
        state = MapperState()
        frame = map_frame(estimate(9, 4), features(centroid=SR / 8), state)
        assert frame.hue == 270.0  # zero shift at the centroid midpoint
        assert frame.saturation == pytest.approx(0.60)
        assert frame.voiced

    def test_constant_input_converges_like_ema(self):
        state = MapperState()
        cfg = state.config
        p, f = estimate(0, 2), features(centroid=SR / 8, flatness=0.25)
        first = map_frame(p, f, state)
        raw_roughness = first.roughness
        previous_gap = None
        for t in range(1, 12):
            frame = map_frame(p, f, state)
            gap = abs(frame.roughness - raw_roughness)
            if previous_gap is not None and previous_gap > 1e-15:
                assert gap / previous_gap == pytest.approx(1 - cfg.alpha_texture, abs=1e-6)
            previous_gap = gap

    def test_energy_step_reaches_scale_max_within_seven_frames(self):
        state = MapperState(frame_size=2048)
        silent, loud = features(energy=0.0), features(energy=2048 * 0.04)
        map_frame(estimate(), silent, state)
        last = None
        for t in range(1, 8):
            loud.frame_index = t
            est = estimate(frame_index=t)
            last = map_frame(est, loud, state)
        assert last.scale == pytest.approx(2.0, rel=0.01)  # (1/2)^7 < 1%

    def test_unvoiced_freezes_color_but_not_scale(self):
        state = MapperState()
        voiced_frame = map_frame(estimate(9, 4), features(energy=50.0), state)
        result = map_frame(
            Unvoiced(0.1, frame_index=1), features(energy=500.0, frame_index=1), state
        )
        assert result.hue == voiced_frame.hue
        assert result.saturation == voiced_frame.saturation
        assert not result.voiced
        assert result.scale != voiced_frame.scale

    def test_never_voiced_starts_neutral(self):
        state = MapperState()
        frame = map_frame(Unvoiced(0.0), features(), state)
        assert frame.hue == state.config.palette[0]
        assert frame.saturation == state.config.saturation_low

    def test_hue_smoothing_wraps_shortest_arc(self):
        cfg = MappingConfig(palette=tuple((float((i * 30 + 345) % 360)) for i in range(12)))
        state = MapperState(cfg)
        # palette[0] = 345; feed a centroid-neutral frame then shift upward
        f = features(centroid=SR / 8)
        map_frame(estimate(0, 4), f, state)
        assert state.previous.hue == 345.0
        # next frame: small positive shift crossing 360
        f2 = features(centroid=SR / 8 + SR / 16, frame_index=1)
        frame = map_frame(estimate(0, 4, frame_index=1), f2, state)
        # raw hue = 345 + 10 = 355; EMA moves 0.3 * 10 = 3 degrees, no wrap sweep
        assert frame.hue == pytest.approx(348.0, abs=1e-9)

    def test_smoothing_stays_in_raw_envelope(self):
        rng = np.random.default_rng(123)
        state = MapperState()
        raw_scales = []
        for i in range(200):
            f = features(energy=float(rng.uniform(0, 200)), frame_index=i)
            p = estimate(int(rng.integers(0, 12)), int(rng.integers(0, 9)), i)
            probe = copy.deepcopy(state)
            raw_scales.append(map_energy_to_scale(f, probe))
            frame = map_frame(p, f, state)
            assert min(raw_scales) - 1e-12 <= frame.scale <= max(raw_scales) + 1e-12

    def test_determinism(self):
        def run():
            state = MapperState()
            rng = np.random.default_rng(5)
            out = []
            for i in range(100):
                f = features(
                    energy=float(rng.uniform(0, 300)),
                    flatness=float(rng.uniform(0, 1)),
                    frame_index=i,
                )
                p = (
                    estimate(int(rng.integers(0, 12)), int(rng.integers(0, 9)), i)
                    if rng.uniform() > 0.3
                    else Unvoiced(0.1, i)
                )
                out.append(map_frame(p, f, state))
            return out

        for a, b in zip(run(), run()):
            assert a == b

    def test_range_safety_fuzz(self):
        rng = np.random.default_rng(999)
        state = MapperState()
        cfg = state.config
        for i in range(5000):
            loud = rng.uniform(0, 10, 24)
            total = float(loud.sum())
            f = FeatureVector(
                energy=float(rng.uniform(0, 1e5)),
                rms=0.0,
                spectral_centroid=float(rng.uniform(0, SR / 2)),
                spectral_flatness=float(rng.uniform(0, 1)),
                spectral_kurtosis=float(rng.uniform(0, 1e7)),
                specific_loudness=loud,
                loudness_total=total,
                perceptual_spread=float(((total - loud.max()) / total) ** 2),
                perceptual_sharpness=float(rng.uniform(0, 20)),
                frame_index=i,
            )
            p = (
                estimate(int(rng.integers(0, 12)), int(rng.integers(-1, 10)), i)
                if rng.uniform() > 0.25
                else Unvoiced(float(rng.uniform(0, 0.6)), i)
            )
            v = map_frame(p, f, state)
            assert 0.0 <= v.hue < 360.0
            assert 0.0 <= v.saturation <= 1.0
            assert 0.0 <= v.lightness <= 1.0
            assert cfg.scale_min <= v.scale <= cfg.scale_max
            assert 0.0 <= v.roughness <= 1.0
            assert 0.0 <= v.sharpness_glow <= 1.0
            assert 0.0 <= v.granularity <= 1.0
            assert 0.0 <= v.displacement <= 1.0


class TestFullPipelineColor:
    def test_a440_hue_within_shift_band_of_palette(self):
        samples = synthesize("sine", 440.0, 1.0, 1.0, SR)
        _, records = analyze_samples(samples, SR)
        cfg = MappingConfig()
        for record in records:
            assert record.visual.voiced
            deviation = abs(record.visual.hue - cfg.palette[9])
            deviation = min(deviation, 360 - deviation)
            assert deviation <= cfg.hue_shift_range + 1e-6
            assert record.pitch.note_class == 9

    def test_color_invariant_under_amplitude(self):
        base_samples = synthesize("sine", 440.0, 0.5, 0.4, SR)
        _, base = analyze_samples(base_samples, SR)
        for c in (0.1, 0.5, 2.0):
            _, scaled = analyze_samples(c * base_samples, SR)
            for a, b in zip(base, scaled):
                assert b.visual.hue == pytest.approx(a.visual.hue, abs=1e-6)
                assert b.visual.saturation == pytest.approx(a.visual.saturation, abs=1e-9)
                assert b.pitch.note_class == a.pitch.note_class


class TestMappingConfigValidation:
    def test_defaults_valid(self):
        MappingConfig().validate()

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            MappingConfig(palette=(0.0,) * 12).validate()  # not distinct
        with pytest.raises(ValueError):
            MappingConfig(saturation_low=0.9, saturation_high=0.5).validate()
        with pytest.raises(ValueError):
            MappingConfig(scale_min=2.0, scale_max=1.0).validate()
        with pytest.raises(ValueError):
            MappingConfig(alpha_color=0.0).validate()
        with pytest.raises(ValueError):
            MappingConfig(alpha_scale=1.5).validate()


class TestConfigDocument:
    def test_roundtrip(self):
        cfg = MappingConfig(
            saturation_low=0.1, scale_max=3.0, invert_roughness=True,
            palette=tuple(float(i * 25) for i in range(12)),
        )
        parsed = load_mapping_config(dump_mapping_config(cfg))
        assert parsed == cfg

    def test_comments_and_defaults(self):
        cfg = load_mapping_config("# just a comment\n\nscale_max = 2.5\n")
        assert cfg.scale_max == 2.5
        assert cfg.scale_min == 0.6

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown key"):
            load_mapping_config("wibble = 3\n")

    def test_invalid_values_rejected(self):
        with pytest.raises(ValueError, match="line 1"):
            load_mapping_config("scale_max = loud\n")
        with pytest.raises(ValueError):
            load_mapping_config("palette = 1,2,3\n")  # needs 12 hues
