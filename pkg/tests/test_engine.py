import numpy as np
import pytest

from musicviz import Engine, EngineConfig, analyze_samples, serialize_record, synthesize

SR = 44100


def test_one_second_sine_record_count():
    samples = synthesize("sine", 440.0, 1.0, 1.0, SR)
    engine = Engine(SR)
    records = engine.push(samples)
    assert len(records) == (44100 - 2048) // 512 + 1 == 83


def test_frame_count_formula_various_lengths():
    for total in (2048, 2049, 2560, 5000, 44100):
        engine = Engine(SR)
        records = engine.push(np.zeros(total))
        assert len(records) == (total - 2048) // 512 + 1


def test_empty_chunk_is_noop():
    engine = Engine(SR)
    engine.push(synthesize("sine", 440.0, 0.02, 1.0, SR))
    before = engine.frames_emitted
    assert engine.push(np.array([])) == []
    assert engine.frames_emitted == before


def test_nonfinite_chunk_rejected_state_unchanged():
    engine = Engine(SR)
    engine.push(np.zeros(1000))
    bad = np.zeros(100)
    bad[0] = np.inf
    with pytest.raises(ValueError):
        engine.push(bad)
    # the previously buffered 1000 samples must still count
    records = engine.push(np.zeros(1048))
    assert len(records) == 1


def test_streaming_equals_batch_bit_identical():
    samples = synthesize("sine", 330.0, 2.0, 0.8, SR) + synthesize(
        "white-noise", duration=2.0, amplitude=0.05, sample_rate=SR, seed=9
    )
    config = EngineConfig()
    _, batch = analyze_samples(samples, SR, config, created_utc="x")

    rng = np.random.default_rng(77)
    for _ in range(5):
        engine = Engine(SR, EngineConfig(), created_utc="x")
        streamed = []
        cursor = 0
        while cursor < len(samples):
            step = int(rng.integers(1, 5000))
            streamed.extend(engine.push(samples[cursor : cursor + step]))
            cursor += step
        assert len(streamed) == len(batch)
        for a, b in zip(streamed, batch):
            assert serialize_record(a) == serialize_record(b)


def test_records_include_optional_blocks_per_config():
    samples = synthesize("sine", 440.0, 0.1, 1.0, SR)
    full = Engine(SR, EngineConfig(include_features=True, include_pitch=True)).push(samples)
    assert full[0].features is not None and full[0].pitch is not None
    bare = Engine(SR, EngineConfig(include_features=False, include_pitch=False)).push(samples)
    assert bare[0].features is None and bare[0].pitch is None


def test_determinism_across_runs():
    samples = synthesize("white-noise", duration=0.5, amplitude=0.7, sample_rate=SR, seed=4)
    _, first = analyze_samples(samples, SR, created_utc="t")
    _, second = analyze_samples(samples, SR, created_utc="t")
    assert [serialize_record(r) for r in first] == [serialize_record(r) for r in second]


def test_header_reflects_config():
    config = EngineConfig(frame_size=1024, hop_size=256)
    engine = Engine(48000, config, created_utc="2026-01-01T00:00:00Z")
    assert engine.header.sample_rate == 48000
    assert engine.header.frame_size == 1024
    assert engine.header.hop_size == 256
    assert engine.header.created_utc == "2026-01-01T00:00:00Z"
    assert engine.header.mapping == config.mapping


def test_invalid_pitch_config_rejected_at_init():
    from musicviz import PitchConfig, PitchConfigError

    with pytest.raises(PitchConfigError):
        Engine(8000, EngineConfig(pitch=PitchConfig(freq_max=4200.0)))
