"""The pacing state machine.

One engine instance drives one reading session. It models the read-aloud
audio as a clock (each phrase takes syllables / audio_rate seconds),
highlights the active phrase, and advances through the text:

* traditional mode advances unconditionally at the fixed rate and obeys
  transport controls (play / pause / skip forward / skip backward);
* gary mode advances past a phrase only if a fixation landed in the
  look-ahead region while that phrase was active (the advance permit), and
  pauses mid-phrase whenever gaze has been off the active and look-ahead
  areas for longer than the grace period.

The engine is a pure state machine over a virtual clock: every input
(tick, fixation, control) carries a timestamp, internal transitions are
stamped with their exact logical time (a phrase boundary crossed between
two ticks is logged at the boundary, not at the tick), and the event log
plus the final clock fully determine the final state. Replaying a log
through a fresh engine reproduces both log and state bit for bit.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field

from gary.layout import (
    AoiConfig,
    PageLayout,
    Rect,
    aoi_for_phrase,
    first_line_region,
    lookahead_region,
)
from gary.gaze import Fixation, hit_test
from gary.text import SegmentedText


class EmptyDocument(ValueError):
    """Session creation needs at least one phrase and one page."""


class NonPositiveRate(ValueError):
    """Audio rate must be positive."""


class ClockRegression(ValueError):
    """A tick arrived with a timestamp earlier than the engine clock."""


class UnsupportedControl(ValueError):
    """The control action is not available in the current mode."""


class SessionFinished(RuntimeError):
    """The session is over; there is no active phrase."""


class Mode(str, enum.Enum):
    GARY = "gary"
    TRADITIONAL = "traditional"


PLAYING = "playing"
PAUSED = "paused"
FINISHED = "finished"

PAUSE_NO_PERMIT = "no_permit"
PAUSE_GAZE_AWAY = "gaze_away"
PAUSE_CONTROL = "control"

REGION_LOOKAHEAD = "lookahead"
REGION_ACTIVE = "active"
REGION_NONE = "none"

CONTROL_PLAY = "play"
CONTROL_PAUSE = "pause"
CONTROL_SKIP_FORWARD = "skip_forward"
CONTROL_SKIP_BACKWARD = "skip_backward"
CONTROLS = (CONTROL_PLAY, CONTROL_PAUSE, CONTROL_SKIP_FORWARD, CONTROL_SKIP_BACKWARD)


@dataclass(frozen=True)
class SessionConfig:
    mode: Mode = Mode.GARY
    audio_rate_syll_s: float = 3.1
    grace_ms: float = 500.0
    aoi: AoiConfig = field(default_factory=AoiConfig)
    page_settle_ms: float = 1500.0

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "audio_rate_syll_s": self.audio_rate_syll_s,
            "grace_ms": self.grace_ms,
            "aoi": {
                "expansion_rms_px": self.aoi.expansion_rms_px,
                "lookahead_words": self.aoi.lookahead_words,
            },
            "page_settle_ms": self.page_settle_ms,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SessionConfig":
        return cls(
            mode=Mode(d["mode"]),
            audio_rate_syll_s=d["audio_rate_syll_s"],
            grace_ms=d["grace_ms"],
            aoi=AoiConfig(
                expansion_rms_px=d["aoi"]["expansion_rms_px"],
                lookahead_words=d["aoi"]["lookahead_words"],
            ),
            page_settle_ms=d["page_settle_ms"],
        )


@dataclass(frozen=True)
class AudioTimeline:
    durations_ms: tuple[float, ...]
    starts_ms: tuple[float, ...]

    @property
    def total_ms(self) -> float:
        return self.starts_ms[-1] + self.durations_ms[-1]


def build_timeline(seg: SegmentedText, audio_rate_syll_s: float) -> AudioTimeline:
    """Per-phrase durations at the fixed speaking rate, with cumulative starts."""
    if audio_rate_syll_s <= 0:
        raise NonPositiveRate(f"audio rate must be positive, got {audio_rate_syll_s}")
    durations = tuple(
        1000.0 * p.syllable_count / audio_rate_syll_s for p in seg.phrases
    )
    starts = []
    acc = 0.0
    for d in durations:
        starts.append(acc)
        acc += d
    return AudioTimeline(durations, tuple(starts))


@dataclass
class EngineState:
    mode: Mode
    page_index: int = 0
    phrase_index: int = 0
    status: str = PAUSED
    elapsed_ms: float = 0.0
    pause_reason: str | None = None  # None only before the first play
    advance_permit: bool = False
    last_on_text_ms: float = 0.0
    clock_ms: float = 0.0
    started: bool = False
    pause_started_ms: float = 0.0
    settle_until_ms: float = -math.inf

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "page_index": self.page_index,
            "phrase_index": self.phrase_index,
            "status": self.status,
            "elapsed_ms": self.elapsed_ms,
            "pause_reason": self.pause_reason,
            "advance_permit": self.advance_permit,
            "last_on_text_ms": self.last_on_text_ms,
            "clock_ms": self.clock_ms,
            "started": self.started,
            "pause_started_ms": self.pause_started_ms,
            "settle_until_ms": repr(self.settle_until_ms),
        }


@dataclass(frozen=True)
class EngineEvent:
    t_ms: float
    kind: str
    payload: dict

    def to_json_line(self) -> str:
        return json.dumps(
            {"t_ms": self.t_ms, "kind": self.kind, "payload": self.payload},
            sort_keys=True,
            separators=(",", ":"),
            ensure_ascii=False,
        )

    @classmethod
    def from_json_line(cls, line: str) -> "EngineEvent":
        d = json.loads(line)
        return cls(d["t_ms"], d["kind"], d["payload"])


def state_hash(state: EngineState) -> str:
    canon = json.dumps(state.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


class Engine:
    """Pacing state machine for one session.

    Inputs must arrive in timestamp order; each call first advances the
    virtual clock to the input's time, firing any phrase boundaries or
    grace expiries that lie in between at their exact times.
    """

    def __init__(
        self, seg: SegmentedText, pages: list[PageLayout], cfg: SessionConfig
    ) -> None:
        if not seg.phrases or not pages:
            raise EmptyDocument("cannot start a session on an empty document")
        self.seg = seg
        self.pages = pages
        self.cfg = cfg
        self.timeline = build_timeline(seg, cfg.audio_rate_syll_s)
        self.state = EngineState(mode=cfg.mode)
        self.log: list[EngineEvent] = []
        self._page_of_phrase = [
            next(p.page_index for p in pages if ph.first_word in p.boxes)
            for ph in seg.phrases
        ]
        self._aoi_cache: dict[int, tuple[list[Rect], list[Rect]]] = {}

    # -- geometry ---------------------------------------------------------

    def update_pages(self, pages: list[PageLayout]) -> None:
        """Replace layout geometry (e.g. client-measured boxes). Clears AOI caches."""
        self.pages = pages
        self._aoi_cache.clear()

    def _regions(self, phrase_index: int) -> tuple[list[Rect], list[Rect]]:
        cached = self._aoi_cache.get(phrase_index)
        if cached is None:
            page = self.pages[self._page_of_phrase[phrase_index]]
            active = aoi_for_phrase(page, self.seg.phrases[phrase_index], self.cfg.aoi)
            ahead = lookahead_region(page, self.seg, phrase_index, self.cfg.aoi)
            cached = (active, ahead)
            self._aoi_cache[phrase_index] = cached
        return cached

    # -- public inputs ----------------------------------------------------

    def on_tick(self, now_ms: float) -> list[EngineEvent]:
        """Advance the clock. Raises ClockRegression if now_ms is in the past."""
        if now_ms < self.state.clock_ms:
            raise ClockRegression(
                f"tick at {now_ms} behind engine clock {self.state.clock_ms}"
            )
        events: list[EngineEvent] = []
        self._advance_to(now_ms, events)
        return self._commit(events)

    def on_fixation(self, fx: Fixation, at_ms: float | None = None) -> list[EngineEvent]:
        """Deliver a completed fixation.

        Delivery defaults to the fixation's end time; a later at_ms models
        delayed delivery (the service delivers on its own clock) and is what
        replay uses to reproduce logged timestamps exactly.
        """
        t = max(at_ms if at_ms is not None else fx.end_ms, self.state.clock_ms)
        events: list[EngineEvent] = []
        self._advance_to(t, events)
        st = self.state

        region = REGION_NONE
        settle = False
        permit_granted = False
        if st.status != FINISHED:
            active, ahead = self._regions(st.phrase_index)
            point = (fx.x, fx.y)
            if hit_test(point, ahead):
                region = REGION_LOOKAHEAD
            elif hit_test(point, active):
                region = REGION_ACTIVE
            if (
                st.mode is Mode.GARY
                and t <= st.settle_until_ms
                and st.phrase_index == self._first_phrase_of_page(st.page_index)
                and hit_test(point, first_line_region(self.pages[st.page_index], self.cfg.aoi))
            ):
                settle = True

        applied = (
            st.mode is Mode.GARY
            and st.started
            and st.status != FINISHED
            and (region != REGION_NONE or settle)
        )
        if applied:
            st.last_on_text_ms = t
            if region == REGION_LOOKAHEAD or settle:
                if not st.advance_permit:
                    permit_granted = True
                st.advance_permit = True

        events.append(
            EngineEvent(
                t,
                "fixation_in",
                {
                    "start_ms": fx.start_ms,
                    "duration_ms": fx.duration_ms,
                    "x": fx.x,
                    "y": fx.y,
                    "region": region,
                    "settle": settle,
                    "permit": permit_granted,
                    "applied": applied,
                },
            )
        )

        if applied and st.status == PAUSED:
            if st.pause_reason == PAUSE_NO_PERMIT and st.advance_permit:
                events.append(EngineEvent(t, "resume", {}))
                st.status = PLAYING
                self._start_phrase(st.phrase_index + 1, t, events)
            elif st.pause_reason == PAUSE_GAZE_AWAY:
                events.append(EngineEvent(t, "resume", {}))
                st.status = PLAYING
                st.pause_reason = None

        return self._commit(events)

    def on_control(self, action: str, t_ms: float) -> list[EngineEvent]:
        """Apply a transport control at the given time."""
        if action not in CONTROLS:
            raise ValueError(f"unknown control {action!r}")
        if action in (CONTROL_SKIP_FORWARD, CONTROL_SKIP_BACKWARD) and (
            self.cfg.mode is Mode.GARY
        ):
            raise UnsupportedControl(f"{action} is not available in gary mode")

        t = max(t_ms, self.state.clock_ms)
        events: list[EngineEvent] = []
        self._advance_to(t, events)
        st = self.state
        applied = False

        if action == CONTROL_PLAY and st.status == PAUSED and (
            not st.started or st.pause_reason == PAUSE_CONTROL
        ):
            # gaze-owned pauses (no_permit, gaze_away) resume through their
            # own fixation rules, never through the transport
            applied = True
            events.append(EngineEvent(t, "control_applied", {"action": action, "applied": True}))
            if not st.started:
                st.started = True
                st.status = PLAYING
                st.pause_reason = None
                st.last_on_text_ms = t
                self._emit_phrase_start(st.phrase_index, t, events)
            else:
                # gaze-away budget does not accrue while paused
                st.last_on_text_ms += t - st.pause_started_ms
                st.status = PLAYING
                st.pause_reason = None
                events.append(EngineEvent(t, "resume", {}))
        elif action == CONTROL_PAUSE and st.status == PLAYING:
            applied = True
            events.append(EngineEvent(t, "control_applied", {"action": action, "applied": True}))
            self._pause(PAUSE_CONTROL, t, events)
        elif action in (CONTROL_SKIP_FORWARD, CONTROL_SKIP_BACKWARD) and st.status != FINISHED:
            step = 1 if action == CONTROL_SKIP_FORWARD else -1
            target = st.phrase_index + step
            if 0 <= target < len(self.seg.phrases):
                applied = True
                events.append(
                    EngineEvent(t, "control_applied", {"action": action, "applied": True})
                )
                st.elapsed_ms = 0.0
                new_page = self._page_of_phrase[target]
                if new_page != st.page_index:
                    st.page_index = new_page
                    events.append(EngineEvent(t, "page_turn", {"page": new_page}))
                st.phrase_index = target
                self._emit_phrase_start(target, t, events, via="skip")

        if not applied:
            events.append(EngineEvent(t, "control_applied", {"action": action, "applied": False}))
        return self._commit(events)

    def current_highlight(self) -> tuple[int, int]:
        """Word-index span of the active phrase."""
        if self.state.status == FINISHED:
            raise SessionFinished("no active phrase after the session finished")
        p = self.seg.phrases[self.state.phrase_index]
        return (p.first_word, p.last_word)

    # -- internals --------------------------------------------------------

    def _first_phrase_of_page(self, page_index: int) -> int:
        return self._page_of_phrase.index(page_index)

    def _duration(self, phrase_index: int) -> float:
        return self.timeline.durations_ms[phrase_index]

    def _commit(self, events: list[EngineEvent]) -> list[EngineEvent]:
        self.log.extend(events)
        return events

    def _advance_to(self, target_ms: float, events: list[EngineEvent]) -> None:
        """Move the virtual clock to target_ms, firing everything due on the way.

        While playing, the next thing due is the earlier of the current
        phrase's end and (gary only) the grace expiry; events are stamped
        with those exact times, so behaviour does not depend on tick rate.
        """
        st = self.state
        while True:
            if st.status != PLAYING:
                st.clock_ms = max(st.clock_ms, target_ms)
                return
            boundary = st.clock_ms + (self._duration(st.phrase_index) - st.elapsed_ms)
            grace_expiry = (
                st.last_on_text_ms + self.cfg.grace_ms
                if st.mode is Mode.GARY
                else math.inf
            )
            stop = min(boundary, target_ms, grace_expiry)
            if stop > st.clock_ms:
                st.elapsed_ms += stop - st.clock_ms
                st.clock_ms = stop
            if stop == boundary:
                # phrase end wins ties against the grace expiry
                self._phrase_boundary(boundary, events)
                continue
            if stop == grace_expiry:
                self._pause(PAUSE_GAZE_AWAY, grace_expiry, events)
                continue
            return  # reached target_ms with nothing due

    def _phrase_boundary(self, t: float, events: list[EngineEvent]) -> None:
        st = self.state
        i = st.phrase_index
        events.append(EngineEvent(t, "phrase_end", {"phrase": i}))
        last_of_text = i == len(self.seg.phrases) - 1
        last_of_page = (not last_of_text) and self._page_of_phrase[i + 1] != st.page_index

        if last_of_text:
            st.status = FINISHED
            st.pause_reason = None
            st.elapsed_ms = self._duration(i)
            events.append(EngineEvent(t, "finish", {}))
            return
        if st.mode is Mode.GARY and not last_of_page and not st.advance_permit:
            self._pause(PAUSE_NO_PERMIT, t, events)
            st.elapsed_ms = self._duration(i)
            return
        self._start_phrase(i + 1, t, events)

    def _start_phrase(self, index: int, t: float, events: list[EngineEvent]) -> None:
        st = self.state
        new_page = self._page_of_phrase[index]
        if new_page != st.page_index:
            st.page_index = new_page
            st.settle_until_ms = t + self.cfg.page_settle_ms
            events.append(EngineEvent(t, "page_turn", {"page": new_page}))
        st.phrase_index = index
        st.elapsed_ms = 0.0
        st.advance_permit = False
        st.pause_reason = None
        self._emit_phrase_start(index, t, events)

    def _emit_phrase_start(self, index: int, t: float, events: list[EngineEvent], via: str = "audio") -> None:
        p = self.seg.phrases[index]
        events.append(
            EngineEvent(
                t,
                "phrase_start",
                {
                    "phrase": index,
                    "words": [p.first_word, p.last_word],
                    "page": self.state.page_index,
                    "via": via,
                },
            )
        )

    def _pause(self, reason: str, t: float, events: list[EngineEvent]) -> None:
        st = self.state
        st.status = PAUSED
        st.pause_reason = reason
        st.pause_started_ms = t
        events.append(EngineEvent(t, "pause", {"reason": reason}))
