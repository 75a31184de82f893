"""Session service: the engine behind a duplex JSON-over-WebSocket protocol.

One frame carries one UTF-8 JSON object with a mandatory "type" field:

* server -> client: "hello" (session config), "page" (full layout),
  "state" (gap-free sequence numbers; sent on every engine state change),
  "metrics" (on finish), "error"
* client -> server: "gaze" ({t_ms, x, y, valid} at ~60 Hz; t_ms must be
  monotonic, and is remapped onto the server clock at arrival), "control"
  ({action}), "page" (measured word boxes, accepted before playback starts)

Protocol violations are answered with an "error" message and the connection
closes; domain errors (an unsupported control) get an "error" message but
keep the session alive.

WireSession holds all protocol logic with timestamps injected by the
caller, so the whole wire behaviour is testable without sockets or sleep.
"""

from __future__ import annotations

import asyncio
import json
import os
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from gary.engine import (
    Engine,
    FINISHED,
    Mode,
    SessionConfig,
    UnsupportedControl,
)
from gary.gaze import OnlineFixationDetector, RawGazeSample
from gary.harness import compute_metrics
from gary.layout import PageLayout, Viewport, pages_from_dict, pages_to_dict, paginate
from gary.session import default_log_dir, session_header, write_session
from gary.text import SegmentedText, segment_phrases, segmented_to_dict, tokenize

TICK_INTERVAL_S = 1.0 / 60.0
MAX_SESSIONS = 16


@dataclass
class Outbound:
    message: dict
    close: bool = False


@dataclass
class WireSession:
    seg: SegmentedText
    pages: list[PageLayout]
    cfg: SessionConfig
    viewport: Viewport
    max_words: int = 5
    session_id: str = field(default_factory=lambda: uuid.uuid4().hex)

    def __post_init__(self) -> None:
        self.engine = Engine(self.seg, self.pages, self.cfg)
        self.detector = OnlineFixationDetector()
        self.seq = 0
        self.last_client_t: float | None = None
        self.last_state: dict | None = None  # comparable view, clock excluded
        self.metrics_sent = False
        self.measured_pages: list[PageLayout] | None = None

    # -- outbound ----------------------------------------------------------

    def hello(self) -> dict:
        return {
            "type": "hello",
            "session_id": self.session_id,
            "payload": {
                "config": self.cfg.to_dict(),
                "text": {"id": self.seg.document.id, "title": self.seg.document.title},
            },
        }

    def page_message(self) -> dict:
        return {
            "type": "page",
            "session_id": self.session_id,
            "payload": {
                "pages": pages_to_dict(self.pages),
                "segmentation": segmented_to_dict(self.seg),
                "viewport": {
                    "width_px": self.viewport.width_px,
                    "height_px": self.viewport.height_px,
                    "line_height_px": self.viewport.line_height_px,
                    "margin_px": self.viewport.margin_px,
                },
            },
        }

    def _state_payload(self) -> dict:
        st = self.engine.state
        if st.status == FINISHED:
            highlight = None
        else:
            highlight = list(self.engine.current_highlight())
        return {
            "phrase_index": st.phrase_index,
            "page_index": st.page_index,
            "highlight": highlight,
            "status": st.status,
            "pause_reason": st.pause_reason,
            "clock_ms": st.clock_ms,
        }

    def _drain_state(self) -> list[Outbound]:
        out: list[Outbound] = []
        payload = self._state_payload()
        # clock_ms is informative; only real state changes push a message
        comparable = {k: v for k, v in payload.items() if k != "clock_ms"}
        if comparable != self.last_state:
            self.last_state = comparable
            out.append(
                Outbound(
                    {
                        "type": "state",
                        "session_id": self.session_id,
                        "seq": self.seq,
                        "payload": payload,
                    }
                )
            )
            self.seq += 1
        if self.engine.state.status == FINISHED and not self.metrics_sent:
            self.metrics_sent = True
            metrics = compute_metrics(self.seg, self.pages, self.cfg.aoi, self.engine.log)
            out.append(
                Outbound(
                    {
                        "type": "metrics",
                        "session_id": self.session_id,
                        "payload": metrics.to_dict(),
                    }
                )
            )
        return out

    def _error(self, code: str, message: str, close: bool) -> list[Outbound]:
        return [
            Outbound(
                {
                    "type": "error",
                    "session_id": self.session_id,
                    "payload": {"code": code, "message": message},
                },
                close=close,
            )
        ]

    # -- inbound -----------------------------------------------------------

    def tick(self, server_t_ms: float) -> list[Outbound]:
        if server_t_ms < self.engine.state.clock_ms:
            return []
        self.engine.on_tick(server_t_ms)
        return self._drain_state()

    def handle(self, msg: dict, server_t_ms: float) -> list[Outbound]:
        if not isinstance(msg, dict) or "type" not in msg:
            return self._error("protocol", "frame is not an object with a type", True)
        kind = msg.get("type")
        if kind == "gaze":
            return self._handle_gaze(msg, server_t_ms)
        if kind == "control":
            return self._handle_control(msg, server_t_ms)
        if kind == "page":
            return self._handle_measured_page(msg)
        return self._error("protocol", f"unexpected message type {kind!r}", True)

    def _handle_gaze(self, msg: dict, server_t_ms: float) -> list[Outbound]:
        p = msg.get("payload", {})
        try:
            client_t = float(p["t_ms"])
            x = float(p["x"])
            y = float(p["y"])
            valid = bool(p.get("valid", True))
        except (KeyError, TypeError, ValueError):
            return self._error("protocol", "malformed gaze payload", True)
        if self.last_client_t is not None and client_t <= self.last_client_t:
            return self._error("protocol", "gaze t_ms must be monotonic", True)
        self.last_client_t = client_t
        # server clock is authoritative; client time is only checked for order
        t = max(server_t_ms, self.engine.state.clock_ms)
        for fx in self.detector.push(RawGazeSample(t, x, y, valid)):
            self.engine.on_fixation(fx, at_ms=t)
        self.engine.on_tick(t)
        return self._drain_state()

    def _handle_control(self, msg: dict, server_t_ms: float) -> list[Outbound]:
        action = msg.get("payload", {}).get("action")
        if not isinstance(action, str):
            return self._error("protocol", "malformed control payload", True)
        t = max(server_t_ms, self.engine.state.clock_ms)
        try:
            self.engine.on_control(action, t)
        except UnsupportedControl as e:
            return self._error("UnsupportedControl", str(e), False)
        except ValueError as e:
            return self._error("protocol", str(e), True)
        return self._drain_state()

    def _handle_measured_page(self, msg: dict) -> list[Outbound]:
        if self.engine.state.started:
            return self._error(
                "MeasurementRejected", "layout can only be measured before playback", False
            )
        try:
            pages = pages_from_dict(msg["payload"]["pages"])
        except (KeyError, TypeError) as e:
            return self._error("protocol", f"malformed page payload: {e}", True)
        self.measured_pages = pages
        self.pages = pages
        self.engine.update_pages(pages)
        return []

    # -- persistence -------------------------------------------------------

    def write_log(self, directory: str | None = None) -> str | None:
        if not self.engine.log:
            return None
        directory = directory or default_log_dir()
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, f"session_{self.session_id}.jsonl")
        doc = self.seg.document
        header = session_header(
            doc.raw_text,
            doc.id,
            doc.title,
            self.max_words,
            self.viewport,
            self.cfg,
            measured_pages=self.measured_pages,
        )
        write_session(path, header, self.engine.log, self.engine.state)
        return path


def build_session(
    raw_text: str,
    mode: Mode,
    viewport: Viewport | None = None,
    cfg: SessionConfig | None = None,
    max_words: int = 5,
    doc_id: str = "",
    title: str = "",
) -> WireSession:
    vp = viewport or Viewport()
    config = cfg or SessionConfig(mode=mode)
    seg = segment_phrases(tokenize(raw_text, doc_id, title), max_words)
    pages = paginate(seg, vp)
    return WireSession(seg=seg, pages=pages, cfg=config, viewport=vp, max_words=max_words)


def create_app(
    raw_text: str,
    mode: Mode = Mode.GARY,
    viewport: Viewport | None = None,
    cfg: SessionConfig | None = None,
    max_words: int = 5,
    ui_dir: str | None = None,
    log_dir: str | None = None,
    max_sessions: int = MAX_SESSIONS,
):
    """FastAPI app serving one engine session per WebSocket connection."""
    app = FastAPI(title="gary session service")
    active: set[str] = set()

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket) -> None:
        await websocket.accept()
        if len(active) >= max_sessions:
            await websocket.send_text(json.dumps({
                "type": "error",
                "session_id": None,
                "payload": {"code": "busy", "message": "session limit reached"},
            }))
            await websocket.close()
            return
        session = build_session(raw_text, mode, viewport, cfg, max_words)
        active.add(session.session_id)
        loop = asyncio.get_running_loop()
        t0 = loop.time()
        now_ms = lambda: (loop.time() - t0) * 1000.0  # noqa: E731
        send_lock = asyncio.Lock()

        async def send_all(outs: list[Outbound]) -> bool:
            for out in outs:
                async with send_lock:
                    await websocket.send_text(json.dumps(out.message))
                if out.close:
                    await websocket.close()
                    return False
            return True

        async def pump() -> None:
            while True:
                await asyncio.sleep(TICK_INTERVAL_S)
                if not await send_all(session.tick(now_ms())):
                    return

        await send_all([Outbound(session.hello()), Outbound(session.page_message())])
        pump_task = asyncio.create_task(pump())
        try:
            while True:
                raw = await websocket.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await send_all(session._error("protocol", "frame is not JSON", True))
                    break
                if not await send_all(session.handle(msg, now_ms())):
                    break
        except WebSocketDisconnect:
            pass
        finally:
            pump_task.cancel()
            active.discard(session.session_id)
            if log_dir is not None or os.environ.get("GARY_LOG_DIR"):
                session.write_log(log_dir)

    if ui_dir:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
