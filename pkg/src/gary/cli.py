"""Command-line entry points.

Subcommands: segment (text -> phrase JSON), simulate (one synthetic
session), crossover (the counterbalanced experiment), replay (verify a
recorded session), serve (live WebSocket session service).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from gary.engine import Mode, SessionConfig
from gary.harness import Timeout, report_csv, run_crossover, run_session
from gary.layout import Viewport, paginate
from gary.session import (
    CorruptLog,
    default_log_dir,
    replay_session,
    session_header,
    write_session,
)
from gary.simulator import UnknownPreset, make_profile, profiles_from_spec
from gary.text import EmptyText, segment_phrases, segmented_to_dict, tokenize


class CliError(Exception):
    """User-facing failure; main prints it and exits 2."""


def _read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise CliError(f"cannot read {path}: {e}")


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _load_segmentation(path: str, max_words: int, doc_id: str = "", title: str = ""):
    raw = _read_text(path)
    doc = tokenize(raw, doc_id or os.path.basename(path), title)
    return raw, segment_phrases(doc, max_words)


def cmd_segment(args: argparse.Namespace) -> int:
    try:
        _, seg = _load_segmentation(args.input, args.max_words, title=args.title or "")
    except EmptyText as e:
        return _fail(str(e))
    json.dump(segmented_to_dict(seg), sys.stdout, ensure_ascii=False, indent=2)
    print()
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        profile = make_profile(args.profile)
    except UnknownPreset as e:
        return _fail(str(e.args[0]))
    try:
        raw, seg = _load_segmentation(args.text, args.max_words)
    except EmptyText as e:
        return _fail(str(e))
    vp = Viewport()
    pages = paginate(seg, vp)
    mode = Mode(args.mode)
    cfg = SessionConfig(mode=mode, audio_rate_syll_s=args.audio_rate)
    try:
        result = run_session(
            profile, seg, pages, mode, seed=args.seed, cfg=cfg,
            collect_samples=args.trace is not None,
        )
    except Timeout as e:
        return _fail(str(e))
    if args.trace is not None:
        from gary.gaze import samples_to_csv

        samples_to_csv(result.sim.samples, args.trace)

    out_dir = args.out or default_log_dir()
    os.makedirs(out_dir, exist_ok=True)
    session_path = os.path.join(
        out_dir, f"session_{profile.name}_{mode.value}_{args.seed}.jsonl"
    )
    header = session_header(
        raw,
        seg.document.id,
        seg.document.title,
        args.max_words,
        vp,
        cfg,
        extra={"profile": profile.name, "seed": args.seed},
    )
    write_session(session_path, header, result.log, result.engine.state)

    json.dump(
        {"metrics": result.metrics.to_dict(), "session_file": session_path},
        sys.stdout,
        indent=2,
    )
    print()
    return 0


def cmd_crossover(args: argparse.Namespace) -> int:
    try:
        with open(args.config, encoding="utf-8") as f:
            config = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        return _fail(f"cannot read config: {e}")

    profile_spec = config.get("profiles", [])
    if not profile_spec:
        return _fail("config lists no profiles")
    try:
        profiles = profiles_from_spec(profile_spec)
    except (UnknownPreset, TypeError, ValueError) as e:
        return _fail(f"bad profile spec: {e}")
    if len(profiles) < 2:
        return _fail("crossover needs at least 2 profiles")

    if args.seeds is not None:
        seeds = list(range(args.seeds))
    else:
        seeds = config.get("seeds", [0])

    try:
        _, seg_a = _load_segmentation(config["text_a"], config.get("max_words", 5))
        _, seg_b = _load_segmentation(config["text_b"], config.get("max_words", 5))
    except KeyError as e:
        return _fail(f"config missing {e}")
    except EmptyText as e:
        return _fail(str(e))
    vp = Viewport()
    report = run_crossover(
        profiles, seg_a, paginate(seg_a, vp), seg_b, paginate(seg_b, vp), seeds
    )

    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "crossover_report.csv")
    json_path = os.path.join(out_dir, "crossover_report.json")
    with open(csv_path, "w", encoding="utf-8") as f:
        f.write(report_csv(report))
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(report.summary, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"wrote {csv_path} and {json_path}")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        verdict = replay_session(args.session)
    except CorruptLog as e:
        print(f"CorruptLog: {e}", file=sys.stderr)
        return 2
    print(str(verdict))
    return 0 if verdict.passed else 1


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from gary.service import create_app

    raw = _read_text(args.text)
    try:
        app = create_app(
            raw,
            mode=Mode(args.mode),
            max_words=args.max_words,
            ui_dir=args.ui,
            log_dir=args.log_dir,
        )
    except EmptyText as e:
        return _fail(str(e))
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gary")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment a text file into phrases")
    p.add_argument("input")
    p.add_argument("--max-words", type=int, default=5)
    p.add_argument("--title", default="")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("simulate", help="run one synthetic reading session")
    p.add_argument("text")
    p.add_argument("--profile", required=True)
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.GARY.value)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-words", type=int, default=5)
    p.add_argument("--audio-rate", type=float, default=3.1)
    p.add_argument("--out", default=None, help="session log directory (default GARY_LOG_DIR)")
    p.add_argument("--trace", default=None, help="also export the raw gaze stream as CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("crossover", help="run the counterbalanced crossover")
    p.add_argument("config")
    p.add_argument("--seeds", type=int, default=None, help="use seeds 0..N-1")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_crossover)

    p = sub.add_parser("replay", help="verify a recorded session file")
    p.add_argument("session")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="serve live sessions over WebSocket")
    p.add_argument("--text", required=True)
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.GARY.value)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--max-words", type=int, default=5)
    p.add_argument("--ui", default=None, help="static directory with the web client")
    p.add_argument("--log-dir", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        return _fail(str(e))
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
