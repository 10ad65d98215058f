"""Command-line interface: ``sscfkit extract | synth | analyze``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .config import load_config, read_config_text
from .errors import ConfigurationError, SscfKitError
from .formats import FORMAT_SUFFIX, read_wav, write_features, write_wav
from .pipeline import PROFILE_SPECS, analyze_transitions, batch_extract, extract, get_profile, read_manifest
from .synth import TransitionSpec, preset, synth_transition

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


def _fmt(x) -> str:
    return "" if x is None else "%.6g" % x


def cmd_extract(args, parser) -> int:
    try:
        config = load_config(args.config)
        profile = get_profile(args.profile)
    except ConfigurationError as exc:
        parser.error(str(exc))
    out = Path(args.out)
    if args.manifest:
        try:
            manifest = read_manifest(args.manifest)
        except (OSError, SscfKitError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_FAILURE
    else:
        manifest = [(Path(args.input).stem, Path(args.input))]
    report = batch_extract(manifest, profile, config, out, args.format, workers=args.workers)
    for utt_id, n in report.successes.items():
        print(f"{utt_id}\t{n} frames\t{out / (utt_id + FORMAT_SUFFIX[args.format])}")
    for utt_id, err in report.failures.items():
        print(f"{utt_id}\tFAILED\t{err}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAILURE


_SYNTH_DEFAULTS = {"from": None, "to": None, "dur": 0.3, "rate": 16000, "speaker": "male",
                   "interp": "linear", "hold": 0.0}


def cmd_synth(args, parser) -> int:
    opts = dict(_SYNTH_DEFAULTS)
    if args.config:
        try:
            cp = read_config_text(args.config)
        except (OSError, ConfigurationError) as exc:
            parser.error(str(exc))
        if cp.has_section("synth"):
            opts.update({k: v.strip() for k, v in cp.items("synth") if k in opts})
    for key in opts:
        value = getattr(args, key if key != "from" else "from_vowel")
        if value is not None:
            opts[key] = value
    if opts["from"] is None or opts["to"] is None:
        parser.error("synth needs --from and --to (or a [synth] config section)")
    try:
        spec = TransitionSpec(
            preset(opts["from"], opts["speaker"]),
            preset(opts["to"], opts["speaker"]),
            float(opts["dur"]),
            opts["interp"],
            float(opts["hold"]),
        )
        w = synth_transition(spec, int(opts["rate"]))
    except (ConfigurationError, ValueError) as exc:
        parser.error(str(exc))
    name = f"{opts['from'].strip('/')}{opts['to'].strip('/')}.wav"
    out = Path(args.out) if args.out else Path(name)
    if out.suffix.lower() != ".wav":
        out = out / name
    out.parent.mkdir(parents=True, exist_ok=True)
    write_wav(out, w)
    print(f"{out}\t{w.duration_s:.3f} s\t{w.sample_rate_hz} Hz")
    return EXIT_OK


def read_segments(path: Path) -> tuple[list[tuple[int, str, Path, float, float]], list[str]]:
    """Parse a segments TSV (label, path, start_s, end_s); returns rows and problems."""
    rows, problems = [], []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        try:
            if len(parts) != 4 or not parts[0]:
                raise ValueError("expected 4 tab-separated columns")
            start, end = float(parts[2]), float(parts[3])
            if not 0 <= start < end:
                raise ValueError("need 0 <= start_s < end_s")
        except ValueError as exc:
            problems.append(f"{path}:{lineno}: {exc}; row skipped")
            continue
        audio = Path(parts[1])
        if not audio.is_absolute():
            audio = path.parent / audio
        rows.append((lineno, parts[0], audio, start, end))
    return rows, problems


def cmd_analyze(args, parser) -> int:
    try:
        config = load_config(args.config)
    except ConfigurationError as exc:
        parser.error(str(exc))
    seg_path = Path(args.segments)
    try:
        rows, problems = read_segments(seg_path)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    failed = False
    waves = {}
    segments = []
    for lineno, label, audio, start, end in rows:
        if audio not in waves:
            try:
                waves[audio] = read_wav(audio)
            except SscfKitError as exc:
                problems.append(f"{seg_path}:{lineno}: {exc}; row skipped")
                failed = True
                continue
        segments.append((label, waves[audio], start, end))
    for p in problems:
        print(p, file=sys.stderr)

    result = analyze_transitions(segments, args.plane, config, edge_frames=args.edge_frames)
    stats_path = Path(args.out_stats)
    stats_path.parent.mkdir(parents=True, exist_ok=True)
    with open(stats_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "mean_angle_deg", "std_angle_deg", "n", "n_excluded", "pair_sum_deg"])
        for s in result.stats:
            w.writerow([s.label, _fmt(s.mean_angle_deg), _fmt(s.std_angle_deg), s.n, s.n_excluded,
                        _fmt(s.pair_sum_deg)])
    if args.out_plot:
        with open(args.out_plot, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["label", "segment", "frame", "time_s", "transition_angle_deg",
                        "polar_radius", "polar_angle_deg"])
            for t in result.trajectories:
                for k in range(t.times_s.size):
                    w.writerow([t.label, t.segment_index, k, _fmt(t.times_s[k]), _fmt(t.angle_deg[k]),
                                _fmt(t.polar_radius[k]), _fmt(t.polar_angle_deg[k])])
    for s in result.stats:
        pair = f"\tpair_sum={s.pair_sum_deg:.1f}" if s.pair_sum_deg is not None else ""
        print(f"{s.label}\tmean={s.mean_angle_deg:.1f}\tstd={s.std_angle_deg:.2f}\tn={s.n}{pair}")
    return EXIT_FAILURE if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sscfkit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="compute a feature profile for audio files")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="single WAV file")
    src.add_argument("--manifest", help="TSV of utterance_id<TAB>wav path")
    p.add_argument("--profile", required=True,
                   help=f"one of {', '.join(PROFILE_SPECS)} or a stream list like 'mfcc13:dd,polar12'")
    p.add_argument("--format", choices=sorted(FORMAT_SUFFIX), default="csv")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="extraction config file")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("synth", help="synthesize a vowel-to-vowel transition to WAV")
    p.add_argument("--from", dest="from_vowel", help="start vowel preset (a e i o u)")
    p.add_argument("--to", help="end vowel preset")
    p.add_argument("--dur", type=float, help="glide duration in seconds (0.05-5)")
    p.add_argument("--rate", type=int, help="sample rate in Hz (default 16000)")
    p.add_argument("--speaker", choices=["male", "female"])
    p.add_argument("--interp", choices=["linear", "cosine"])
    p.add_argument("--hold", type=float, help="steady vowel before and after the glide, seconds")
    p.add_argument("--out", help="output WAV path or directory")
    p.add_argument("--config", help="config file with a [synth] section")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("analyze", help="transition-angle statistics over labelled segments")
    p.add_argument("--segments", required=True, help="TSV of label, wav path, start_s, end_s")
    p.add_argument("--plane", choices=["sscf12", "ratio"], default="sscf12")
    p.add_argument("--out-stats", required=True, help="stats CSV path")
    p.add_argument("--out-plot", help="per-frame trajectory CSV path")
    p.add_argument("--edge-frames", type=int, default=1,
                   help="frames averaged at each end for the net angle")
    p.add_argument("--config", help="extraction config file")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args, parser)


if __name__ == "__main__":
    sys.exit(main())
