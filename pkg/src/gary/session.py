"""Session files: record, hash, and replay-verify reading sessions.

A session file is a JSON header line (config, text, viewport), one line per
engine event, and a final line carrying the end-of-session clock and a
SHA-256 over header, events, and the canonical final state. Replay rebuilds
the session from the header, re-feeds every input event (fixations and
controls) through a fresh engine, advances it to the recorded final clock,
and passes only if the regenerated log and final state match bit for bit.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass

from gary.engine import Engine, EngineEvent, EngineState, SessionConfig
from gary.gaze import Fixation
from gary.layout import PageLayout, Viewport, pages_from_dict, pages_to_dict, paginate
from gary.text import segment_phrases, tokenize

FORMAT = "gary-session/1"


class CorruptLog(ValueError):
    """The session file is structurally unreadable."""


@dataclass(frozen=True)
class ReplayVerdict:
    passed: bool
    reason: str

    def __str__(self) -> str:
        return "PASS" if self.passed else f"FAIL: {self.reason}"


def _canonical_state(state: EngineState) -> str:
    return json.dumps(state.to_dict(), sort_keys=True, separators=(",", ":"))


def _digest(header_line: str, event_lines: list[str], state_json: str) -> str:
    h = hashlib.sha256()
    h.update(header_line.encode("utf-8"))
    h.update(b"\n")
    for line in event_lines:
        h.update(line.encode("utf-8"))
        h.update(b"\n")
    h.update(state_json.encode("utf-8"))
    return h.hexdigest()


def session_header(
    raw_text: str,
    doc_id: str,
    title: str,
    max_words: int,
    viewport: Viewport,
    cfg: SessionConfig,
    measured_pages: list[PageLayout] | None = None,
    extra: dict | None = None,
) -> dict:
    header = {
        "format": FORMAT,
        "config": cfg.to_dict(),
        "text": {"id": doc_id, "title": title, "raw": raw_text},
        "max_words": max_words,
        "viewport": dataclasses.asdict(viewport),
    }
    if measured_pages is not None:
        header["measured_pages"] = pages_to_dict(measured_pages)
    if extra:
        header["extra"] = extra
    return header


def write_session(path: str, header: dict, log: list[EngineEvent], final_state: EngineState) -> None:
    header_line = json.dumps(header, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    event_lines = [ev.to_json_line() for ev in log]
    digest = _digest(header_line, event_lines, _canonical_state(final_state))
    tail = json.dumps(
        {"final_clock_ms": final_state.clock_ms, "sha256": digest},
        sort_keys=True,
        separators=(",", ":"),
    )
    with open(path, "w", encoding="utf-8") as f:
        f.write(header_line + "\n")
        for line in event_lines:
            f.write(line + "\n")
        f.write(tail + "\n")


def _parse(path: str) -> tuple[dict, list[str], dict, str]:
    try:
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise CorruptLog(f"cannot read session file: {e}") from e
    if len(lines) < 2:
        raise CorruptLog("session file too short")
    try:
        header = json.loads(lines[0])
        tail = json.loads(lines[-1])
    except json.JSONDecodeError as e:
        raise CorruptLog(f"malformed header or tail line: {e}") from e
    if not isinstance(header, dict) or header.get("format") != FORMAT:
        raise CorruptLog("missing or unsupported format marker")
    if not isinstance(tail, dict) or "sha256" not in tail or "final_clock_ms" not in tail:
        raise CorruptLog("missing final hash line")
    return header, lines[1:-1], tail, lines[0]


def rebuild_engine(header: dict) -> Engine:
    try:
        text = header["text"]
        cfg = SessionConfig.from_dict(header["config"])
        vp = Viewport(**header["viewport"])
        doc = tokenize(text["raw"], text.get("id", ""), text.get("title", ""))
        seg = segment_phrases(doc, header["max_words"])
        if "measured_pages" in header:
            pages = pages_from_dict(header["measured_pages"])
        else:
            pages = paginate(seg, vp)
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptLog(f"header does not describe a session: {e}") from e
    return Engine(seg, pages, cfg)


def replay_session(path: str) -> ReplayVerdict:
    """Re-execute a session file and verify log and final state reproduce."""
    header, event_lines, tail, header_line = _parse(path)
    engine = rebuild_engine(header)
    try:
        events = [EngineEvent.from_json_line(line) for line in event_lines]
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise CorruptLog(f"malformed event record: {e}") from e

    try:
        for ev in events:
            if ev.kind == "fixation_in":
                p = ev.payload
                engine.on_fixation(
                    Fixation(p["start_ms"], p["duration_ms"], p["x"], p["y"]),
                    at_ms=ev.t_ms,
                )
            elif ev.kind == "control_applied":
                engine.on_control(ev.payload["action"], ev.t_ms)
        engine.on_tick(tail["final_clock_ms"])
    except Exception as e:  # tampered logs may produce arbitrarily bad inputs
        return ReplayVerdict(False, f"replay diverged: {e}")

    replayed_lines = [ev.to_json_line() for ev in engine.log]
    if replayed_lines != event_lines:
        return ReplayVerdict(False, "regenerated event log differs from recorded log")
    digest = _digest(header_line, event_lines, _canonical_state(engine.state))
    if digest != tail["sha256"]:
        return ReplayVerdict(False, "hash mismatch")
    return ReplayVerdict(True, "")


def default_log_dir() -> str:
    return os.environ.get("GARY_LOG_DIR", ".")
