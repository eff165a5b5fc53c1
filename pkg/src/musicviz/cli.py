"""Command line interface: synth, analyze, stats, and bench subcommands.

Exit codes: 0 success, 1 input or data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from collections import Counter

import numpy as np

from .bench import benchmark_engine, benchmark_kernels, format_report
from .engine import EngineConfig, analyze_samples
from .ingest import (
    MAX_FRAME_SIZE,
    MIN_FRAME_SIZE,
    WAVE_KINDS,
    AliasingError,
    WavError,
    decode_wav,
    encode_wav,
    synthesize,
)
from .mapper import load_mapping_config
from .pitch import NOTE_NAMES, PitchEstimate
from .protocol import (
    FrameRecord,
    ProtocolError,
    SessionHeader,
    csv_columns,
    record_to_csv_row,
    serialize_header,
    serialize_record,
    read_stream,
)


class UsageError(Exception):
    """Flag combination rejected after parsing; maps to exit code 2."""


def _power_of_two(text: str) -> int:
    value = int(text)
    if value < MIN_FRAME_SIZE or value > MAX_FRAME_SIZE or value & (value - 1):
        raise argparse.ArgumentTypeError(
            f"must be a power of two in [{MIN_FRAME_SIZE}, {MAX_FRAME_SIZE}]"
        )
    return value


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="musicviz",
        description="Music-to-visual mapping engine: analyze audio into visual parameter frames.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = {}

    p_synth = sub.add_parser("synth", help="generate a test-signal WAV file")
    p_synth.add_argument("--wave", choices=WAVE_KINDS, default="sine")
    p_synth.add_argument("--freq", type=float, default=440.0, help="tone frequency in Hz")
    p_synth.add_argument("--dur", type=float, default=1.0, help="duration in seconds")
    p_synth.add_argument("--amplitude", type=float, default=1.0)
    p_synth.add_argument("--rate", type=int, default=44100, help="sample rate in Hz")
    p_synth.add_argument("--seed", type=int, default=0, help="noise generator seed")
    p_synth.add_argument("--format", choices=("pcm16", "float32"), default="pcm16")
    p_synth.add_argument("--out", required=True, help="output WAV path")
    p_synth.set_defaults(func=cmd_synth)
    subparsers["synth"] = p_synth

    p_analyze = sub.add_parser(
        "analyze",
        help="analyze a WAV file into a frame stream",
        epilog=(
            "CSV column order: frameIndex, timestamp, hue, saturation, lightness, "
            "scale, roughness, sharpnessGlow, granularity, displacement, voiced; "
            "with --features then energy, rms, spectralCentroid, spectralFlatness, "
            "spectralKurtosis, loudnessTotal, perceptualSpread, perceptualSharpness, "
            "bark00..bark23; with --pitch then pitchVoiced, clarity, frequency, "
            "midiNote, noteClass, octave, cents."
        ),
    )
    p_analyze.add_argument("input", help="input WAV path")
    p_analyze.add_argument("--out", default="-", help="output path ('-' for stdout)")
    p_analyze.add_argument("--frame-size", type=_power_of_two, default=2048)
    p_analyze.add_argument("--hop", type=int, default=512)
    p_analyze.add_argument("--features", action="store_true", help="include the feature vector")
    p_analyze.add_argument("--pitch", action="store_true", help="include the pitch result")
    p_analyze.add_argument("--csv", action="store_true", help="emit flat CSV instead of the line protocol")
    p_analyze.add_argument("--config", help="mapping config file (key = value lines)")
    p_analyze.add_argument("--seed", type=int, default=0, help="accepted for symmetry; analysis is deterministic")
    p_analyze.set_defaults(func=cmd_analyze)
    subparsers["analyze"] = p_analyze

    p_stats = sub.add_parser("stats", help="summarize a frame stream")
    p_stats.add_argument("stream", help="frame stream path")
    p_stats.set_defaults(func=cmd_stats)
    subparsers["stats"] = p_stats

    p_bench = sub.add_parser("bench", help="benchmark the pipeline and kernel paths")
    p_bench.add_argument("--duration", type=float, default=60.0, help="seconds of audio")
    p_bench.add_argument("--rate", type=int, default=44100)
    p_bench.add_argument("--frame-size", type=_power_of_two, default=2048)
    p_bench.add_argument("--hop", type=int, default=512)
    p_bench.set_defaults(func=cmd_bench)
    subparsers["bench"] = p_bench

    return parser, subparsers


def cmd_synth(args) -> int:
    try:
        samples = synthesize(
            args.wave, args.freq, args.dur, args.amplitude, args.rate, args.seed
        )
    except (AliasingError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    data = encode_wav(samples, args.rate, args.format)
    try:
        with open(args.out, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_analyze(args) -> int:
    if args.hop < 1 or args.hop > args.frame_size:
        raise UsageError(f"--hop must be in [1, {args.frame_size}]")

    config = EngineConfig(
        frame_size=args.frame_size,
        hop_size=args.hop,
        include_features=args.features,
        include_pitch=args.pitch,
    )
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                config.mapping = load_mapping_config(fh.read())
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1

    try:
        with open(args.input, "rb") as fh:
            data = fh.read()
        sample_rate, _channels, samples = decode_wav(data)
    except (OSError, WavError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    header, records = analyze_samples(samples, sample_rate, config)
    text = _render_stream(header, records, args)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    return 0


def _render_stream(header: SessionHeader, records: list[FrameRecord], args) -> str:
    if args.csv:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(csv_columns(args.features, args.pitch))
        for record in records:
            writer.writerow(record_to_csv_row(record, args.features, args.pitch))
        return buf.getvalue()
    lines = [serialize_header(header)]
    lines.extend(serialize_record(r) for r in records)
    return "\n".join(lines) + "\n"


def cmd_stats(args) -> int:
    try:
        with open(args.stream, "r", encoding="utf-8") as fh:
            objects = list(read_stream(fh))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ProtocolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    header = next((o for o in objects if isinstance(o, SessionHeader)), None)
    records = [o for o in objects if isinstance(o, FrameRecord)]
    if header is not None:
        print(
            f"session: sampleRate={header.sample_rate} frameSize={header.frame_size} "
            f"hopSize={header.hop_size} created={header.created_utc}"
        )
    print(f"frames: {len(records)}")
    if not records:
        print("no frames: statistics empty")
        return 0

    fields: dict[str, list[float]] = {}
    for record in records:
        v = record.visual
        for name, value in (
            ("hue", v.hue), ("saturation", v.saturation), ("lightness", v.lightness),
            ("scale", v.scale), ("roughness", v.roughness),
            ("sharpnessGlow", v.sharpness_glow), ("granularity", v.granularity),
            ("displacement", v.displacement),
        ):
            fields.setdefault(name, []).append(value)
        f = record.features
        if f is not None:
            for name, value in (
                ("energy", f.energy), ("rms", f.rms),
                ("spectralCentroid", f.spectral_centroid),
                ("spectralFlatness", f.spectral_flatness),
                ("spectralKurtosis", f.spectral_kurtosis),
                ("loudnessTotal", f.loudness_total),
                ("perceptualSpread", f.perceptual_spread),
                ("perceptualSharpness", f.perceptual_sharpness),
            ):
                fields.setdefault(name, []).append(value)

    voiced = sum(1 for r in records if r.visual.voiced)
    print(f"voiced: {voiced}/{len(records)} ({100.0 * voiced / len(records):.1f}%)")

    histogram = Counter(
        r.pitch.note_class for r in records if isinstance(r.pitch, PitchEstimate)
    )
    if histogram:
        total = sum(histogram.values())
        dominant, count = histogram.most_common(1)[0]
        print(
            f"dominant noteClass: {dominant} ({NOTE_NAMES[dominant]}) "
            f"share {100.0 * count / total:.1f}%"
        )
        ordered = " ".join(f"{c}:{histogram.get(c, 0)}" for c in range(12))
        print(f"noteClass histogram: {ordered}")
    else:
        print("dominant noteClass: none (no voiced pitch records)")

    print(f"{'field':<20} {'min':>12} {'mean':>12} {'max':>12}")
    for name, values in fields.items():
        arr = np.asarray(values)
        print(f"{name:<20} {arr.min():>12.6g} {arr.mean():>12.6g} {arr.max():>12.6g}")
    return 0


def cmd_bench(args) -> int:
    result = benchmark_engine(args.duration, args.rate, args.frame_size, args.hop)
    kernels = benchmark_kernels(args.frame_size)
    print(format_report(result, kernels))
    return 0


def main(argv=None) -> int:
    parser, subparsers = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        sub = subparsers.get(args.command, parser)
        sys.stderr.write(sub.format_usage())
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
