"""Acceptance suite: one test per release criterion.

Each test prints a single PASS line with the measured numbers once its
assertions hold (run with -s to see them on a green run). Tolerances are
pinned here and nowhere else.
"""

import copy
import json
import math
import time

import numpy as np
import pytest

from musicviz import (
    FeatureVector,
    MapperState,
    MappingConfig,
    PitchEstimate,
    Unvoiced,
    VisualFrame,
    analyze_samples,
    Engine,
    EngineConfig,
    bark_loudness,
    detect_pitch,
    energy_and_rms,
    extract_features,
    map_energy_to_scale,
    map_frame,
    map_pitch_to_color,
    parse_record,
    perceptual_sharpness,
    perceptual_spread,
    serialize_record,
    spectral_flatness,
    synthesize,
)
from musicviz.bench import benchmark_engine
from musicviz.cli import main as cli_main
from musicviz.features import Spectrum
from musicviz.protocol import ParseError, SchemaError, VersionError

import _oracles
from conftest import make_frame, noise_frame, sine_frame

SR = 44100


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def test_criterion_1_feature_oracle_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(20260101)
    worst = 0.0
    for _ in range(100):
        x = rng.uniform(-1, 1, 1024)
        fv = extract_features(make_frame(x, SR))
        mags = _oracles.windowed_magnitudes(x)
        bin_hz = SR / 1024
        specific, total = _oracles.bark(mags, bin_hz)
        pairs = [
            (fv.spectral_centroid, _oracles.centroid(mags, bin_hz)),
            (fv.spectral_flatness, _oracles.flatness(mags)),
            (fv.spectral_kurtosis, _oracles.kurtosis(mags)),
            (fv.loudness_total, total),
            (fv.perceptual_spread, _oracles.spread(specific, total)),
            (fv.perceptual_sharpness, _oracles.sharpness(specific, total)),
        ] + list(zip(fv.specific_loudness, specific))
        for got, expected in pairs:
            rel = _rel(got, expected)
            worst = max(worst, rel)
            assert rel <= 1e-6
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    print(
        f"PASS criterion 1: 100 frames, all features within 1e-6 of the direct-DFT "
        f"oracle (worst {worst:.2e}), {elapsed:.1f} s"
    )


def test_criterion_2_pitch_sweep():
    start = time.perf_counter()
    worst_cents = 0.0
    for midi in range(33, 97):
        freq = 440.0 * 2 ** ((midi - 69) / 12)
        result = detect_pitch(sine_frame(freq, n=2048, sample_rate=SR))
        assert isinstance(result, PitchEstimate), f"midi {midi} unvoiced"
        assert result.midi_note == midi, f"midi {midi} detected as {result.midi_note}"
        assert abs(result.cents) < 10.0
        assert result.clarity > 0.9
        worst_cents = max(worst_cents, abs(result.cents))
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    print(
        f"PASS criterion 2: MIDI 33-96 sweep exact, zero octave errors, "
        f"worst |cents| {worst_cents:.2f}, {elapsed:.1f} s"
    )


def test_criterion_3_noise_rejection():
    unvoiced = sum(
        isinstance(detect_pitch(noise_frame(seed)), Unvoiced) for seed in range(100)
    )
    assert unvoiced >= 95
    print(f"PASS criterion 3: {unvoiced}/100 white-noise frames unvoiced")


def test_criterion_4_closed_form_spot_checks():
    energy, _ = energy_and_rms(make_frame(np.full(2048, 0.5)))
    assert energy == 512.0

    flat = spectral_flatness(Spectrum(np.full(1025, 0.42), SR / 2048))
    assert abs(flat - 1.0) <= 1e-9

    two_bands = np.zeros(24)
    two_bands[3] = two_bands[17] = 1.0
    assert abs(perceptual_spread(two_bands, two_bands.sum()) - 0.25) <= 1e-9

    band0 = np.zeros(24)
    band0[0] = 5.0
    assert abs(perceptual_sharpness(band0, band0.sum()) - 0.11) <= 1e-9
    print(
        "PASS criterion 4: energy 512.0 exact, flatness 1.0, spread 0.25, "
        "sharpness 0.11 all within 1e-9"
    )


def _random_valid_features(rng, index):
    loud = rng.uniform(0.0, 10.0, 24)
    if rng.uniform() < 0.05:
        loud[:] = 0.0
    total = float(loud.sum())
    spread = 0.0 if total == 0 else float(((total - loud.max()) / total) ** 2)
    return FeatureVector(
        energy=float(rng.uniform(0, 1e5)),
        rms=0.0,
        spectral_centroid=float(rng.uniform(0, SR / 2)),
        spectral_flatness=float(rng.uniform(0, 1)),
        spectral_kurtosis=float(rng.uniform(0, 1e8)),
        specific_loudness=loud,
        loudness_total=total,
        perceptual_spread=spread,
        perceptual_sharpness=float(rng.uniform(0, 30)),
        frame_index=index,
        timestamp=index * 512 / SR,
    )


def _random_pitch(rng, index):
    if rng.uniform() < 0.3:
        return Unvoiced(float(rng.uniform(0, 0.6)), index)
    note_class = int(rng.integers(0, 12))
    octave = int(rng.integers(-1, 10))
    midi = (octave + 1) * 12 + note_class
    return PitchEstimate(
        frequency=440.0 * 2 ** ((midi - 69) / 12),
        clarity=float(rng.uniform(0.6, 1.0)),
        midi_float=float(midi),
        midi_note=midi,
        note_class=note_class,
        octave=octave,
        cents=float(rng.uniform(-50, 50)),
        frame_index=index,
    )


def test_criterion_5_mapping_properties():
    rng = np.random.default_rng(5150)
    cfg = MappingConfig()
    state = MapperState(cfg)
    n_frames = 100_000
    for i in range(n_frames):
        frame = map_frame(_random_pitch(rng, i), _random_valid_features(rng, i), state)
        assert 0.0 <= frame.hue < 360.0
        assert 0.0 <= frame.saturation <= 1.0
        assert 0.0 <= frame.lightness <= 1.0
        assert cfg.scale_min <= frame.scale <= cfg.scale_max
        assert 0.0 <= frame.roughness <= 1.0
        assert 0.0 <= frame.sharpness_glow <= 1.0
        assert 0.0 <= frame.granularity <= 1.0
        assert 0.0 <= frame.displacement <= 1.0

    # scale monotone in energy at fixed state
    base = MapperState(cfg)
    base.peak_energy = 321.0
    last = -math.inf
    for energy in np.linspace(0, 2000, 200):
        probe = copy.deepcopy(base)
        fv = _random_valid_features(np.random.default_rng(1), 0)
        fv.energy = float(energy)
        scale = map_energy_to_scale(fv, probe)
        assert scale >= last
        last = scale

    # saturation strictly monotone in octave
    saturations = [
        map_pitch_to_color(
            PitchEstimate(440.0, 0.9, 69.0, (o + 1) * 12 + 9, 9, o, 0.0, 0), cfg
        )[1]
        for o in range(9)
    ]
    assert all(a < b for a, b in zip(saturations, saturations[1:]))

    # color invariant under input amplitude scaling (pre-clip factors)
    base_samples = synthesize("sine", 440.0, 0.5, 0.4, SR)
    _, reference = analyze_samples(base_samples, SR, created_utc="t")
    for c in (0.1, 0.5, 2.0):
        _, scaled = analyze_samples(c * base_samples, SR, created_utc="t")
        for a, b in zip(reference, scaled):
            assert abs(a.visual.hue - b.visual.hue) <= 1e-6
            assert abs(a.visual.saturation - b.visual.saturation) <= 1e-9
            assert a.pitch.note_class == b.pitch.note_class
    print(
        f"PASS criterion 5: {n_frames} fuzzed frames in range; scale/saturation "
        "monotone; color amplitude-invariant for c in {0.1, 0.5, 2}"
    )


def test_criterion_6_streaming_equals_batch():
    samples = synthesize("sine", 523.25, 5.0, 0.7, SR) + synthesize(
        "white-noise", duration=5.0, amplitude=0.03, sample_rate=SR, seed=66
    )
    _, batch = analyze_samples(samples, SR, created_utc="t")
    batch_lines = [serialize_record(r) for r in batch]

    rng = np.random.default_rng(606)
    for trial in range(10):
        engine = Engine(SR, EngineConfig(), created_utc="t")
        lines = []
        cursor = 0
        while cursor < len(samples):
            step = int(rng.integers(1, 8000))
            lines.extend(serialize_record(r) for r in engine.push(samples[cursor : cursor + step]))
            cursor += step
        assert lines == batch_lines, f"chunking trial {trial} diverged"
    print(
        f"PASS criterion 6: 10 random chunkings of a 5 s fixture, all "
        f"{len(batch_lines)} records bit-identical to batch"
    )


def test_criterion_7_protocol_round_trip():
    from test_protocol import assert_records_equal, header_line, random_record

    rng = np.random.default_rng(707)
    for i in range(1000):
        record = random_record(
            rng, i,
            with_features=bool(rng.uniform() > 0.3),
            with_pitch=bool(rng.uniform() > 0.3),
        )
        assert_records_equal(record, parse_record(serialize_record(record)))

    with pytest.raises(VersionError):
        from musicviz import parse_header
        parse_header(header_line(protocolVersion=99))
    record_obj = json.loads(serialize_record(random_record(rng, 0)))
    del record_obj["timestamp"]
    with pytest.raises(SchemaError, match="'timestamp'"):
        parse_record(json.dumps(record_obj))
    good_line = serialize_record(random_record(rng, 1))
    with pytest.raises(ParseError, match=f"byte {len(good_line)}"):
        parse_record(good_line + "xx")
    print(
        "PASS criterion 7: 1000 record round-trips exact; version/schema/parse "
        "errors typed and located"
    )


def test_criterion_8_real_time_budget():
    result = benchmark_engine(duration=60.0, sample_rate=SR, frame_size=2048, hop_size=512)
    assert result.per_frame_ms < 2.0, f"{result.per_frame_ms:.3f} ms/frame"
    assert result.realtime_factor >= 5.0, f"{result.realtime_factor:.1f}x"
    print(
        f"PASS criterion 8: {result.per_frame_ms:.3f} ms/frame, "
        f"{result.realtime_factor:.1f}x real time on backend {result.backend}"
    )


def test_criterion_9_cli_end_to_end(tmp_path, capsys):
    wav = tmp_path / "a440.wav"
    stream = tmp_path / "a440.jsonl"
    assert cli_main(["synth", "--wave", "sine", "--freq", "440", "--dur", "1",
                     "--out", str(wav)]) == 0
    assert cli_main(["analyze", str(wav), "--pitch", "--features",
                     "--out", str(stream)]) == 0
    assert cli_main(["stats", str(stream)]) == 0
    out = capsys.readouterr().out
    assert "dominant noteClass: 9 (A)" in out
    share = float(out.split("share ")[1].split("%")[0])
    assert share >= 95.0

    assert cli_main(["analyze", str(tmp_path / "missing.wav")]) == 1
    capsys.readouterr()
    assert cli_main(["analyze", str(wav), "--frame-size", "1000"]) == 2
    capsys.readouterr()
    print(
        f"PASS criterion 9: synth->analyze->stats gives noteClass 9 at "
        f"{share:.1f}% share; exit codes 0/1/2 as specified"
    )
