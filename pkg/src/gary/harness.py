"""Experiment harness: session metrics, single runs, and the crossover design.

Sessions drive a ReaderSim against an Engine until the text finishes, then
reduce the event log to mechanical metrics. The crossover runs each profile
through both technologies with condition order and text pairing varied
orthogonally: half of the profiles start with gary, and a profile that
reads text A with gary reads text B with traditional and vice versa.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field, replace

from gary.engine import (
    Engine,
    EngineEvent,
    FINISHED,
    Mode,
    SessionConfig,
)
from gary.layout import PageLayout, aoi_for_phrase, AoiConfig
from gary.simulator import ReaderProfile, ReaderSim
from gary.text import SegmentedText

SPEED_CUTOFF_SYLL_S = 1.7
ACCURACY_CUTOFF_ERRORS = 10

# Reference comprehension gain scores (gary minus traditional) for accurate
# and inaccurate reader groups, carried in the report footer as context for
# the simulated mechanical deltas. Comprehension itself is not simulated.
REFERENCE_GAINS = {"accurate": 0.8, "inaccurate": 1.9}

METRIC_NAMES = (
    "total_time_s",
    "effective_speed_syll_s",
    "pause_count",
    "pause_time_s",
    "synchrony",
    "coverage",
)


class Timeout(RuntimeError):
    """The session did not finish within the allotted multiple of its timeline."""


@dataclass(frozen=True)
class SessionMetrics:
    total_time_s: float
    effective_speed_syll_s: float
    pause_count: int
    pause_time_s: float
    synchrony: float
    coverage: float

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in METRIC_NAMES}


@dataclass(frozen=True)
class ProfileClass:
    speed_class: str  # "high" | "low"
    accuracy_class: str


@dataclass
class SessionResult:
    metrics: SessionMetrics
    log: list[EngineEvent]
    engine: Engine
    sim: ReaderSim


def classify_profile(speed_syll_s: float, errors: int) -> ProfileClass:
    """Classify by the standard cut-offs; values at the cut-off count as high."""
    if speed_syll_s <= 0:
        raise ValueError("speed must be positive")
    if errors < 0:
        raise ValueError("errors must be non-negative")
    return ProfileClass(
        speed_class="low" if speed_syll_s < SPEED_CUTOFF_SYLL_S else "high",
        accuracy_class="low" if errors > ACCURACY_CUTOFF_ERRORS else "high",
    )


def gain_score(value_gary: float, value_traditional: float) -> float:
    """Per-profile delta, gary condition minus traditional condition."""
    return value_gary - value_traditional


def compute_metrics(
    seg: SegmentedText,
    pages: list[PageLayout],
    aoi: AoiConfig,
    log: list[EngineEvent],
) -> SessionMetrics:
    """Reduce a finished session log to metrics.

    synchrony is the fraction of audio-active (playing) time during which
    the most recently delivered fixation had landed inside the active or
    look-ahead AOI; coverage is the fraction of phrases whose AOI received
    at least one fixation at any time.
    """
    t0 = None
    tf = None
    playing = False
    on_text = False
    last_t = None
    play_time = 0.0
    sync_time = 0.0
    pause_time = 0.0
    pause_count = 0
    pause_from = None
    cur_page = 0
    covered: set[int] = set()

    phrase_aois = {}
    page_phrases: dict[int, list[int]] = {}
    for p in seg.phrases:
        for page in pages:
            if p.first_word in page.boxes:
                phrase_aois[p.index] = aoi_for_phrase(page, p, aoi)
                page_phrases.setdefault(page.page_index, []).append(p.index)
                break

    for ev in log:
        if playing and last_t is not None:
            dt = ev.t_ms - last_t
            play_time += dt
            if on_text:
                sync_time += dt
        last_t = ev.t_ms

        if ev.kind == "phrase_start":
            cur_page = ev.payload["page"]
            if t0 is None and ev.payload.get("via") == "audio":
                t0 = ev.t_ms
                playing = True
        elif ev.kind == "page_turn":
            cur_page = ev.payload["page"]
        elif ev.kind == "pause":
            playing = False
            pause_count += 1
            pause_from = ev.t_ms
        elif ev.kind == "resume":
            playing = True
            if pause_from is not None:
                pause_time += ev.t_ms - pause_from
                pause_from = None
        elif ev.kind == "finish":
            playing = False
            tf = ev.t_ms
        elif ev.kind == "fixation_in":
            on_text = ev.payload["region"] in ("active", "lookahead")
            point = (ev.payload["x"], ev.payload["y"])
            for pi in page_phrases.get(cur_page, ()):
                if pi not in covered and any(
                    r.contains(*point) for r in phrase_aois[pi]
                ):
                    covered.add(pi)

    if t0 is None or tf is None:
        raise ValueError("log does not contain a completed session")
    total_s = (tf - t0) / 1000.0
    return SessionMetrics(
        total_time_s=total_s,
        effective_speed_syll_s=seg.total_syllables / total_s,
        pause_count=pause_count,
        pause_time_s=pause_time / 1000.0,
        synchrony=(sync_time / play_time) if play_time > 0 else 0.0,
        coverage=len(covered) / len(seg.phrases),
    )


def run_session(
    profile: ReaderProfile,
    seg: SegmentedText,
    pages: list[PageLayout],
    mode: Mode,
    seed: int | None = None,
    cfg: SessionConfig | None = None,
    collect_samples: bool = False,
    timeout_factor: float = 10.0,
) -> SessionResult:
    """Drive one simulated session to completion and compute its metrics."""
    if cfg is None:
        cfg = SessionConfig(mode=mode)
    elif cfg.mode is not mode:
        cfg = replace(cfg, mode=mode)
    engine = Engine(seg, pages, cfg)
    sim = ReaderSim(profile, seg, pages, seed=seed, collect_samples=collect_samples)
    engine.on_control("play", 0.0)
    timeout_ms = timeout_factor * engine.timeline.total_ms
    while engine.state.status != FINISHED:
        if sim.t_ms > timeout_ms:
            raise Timeout(
                f"session exceeded {timeout_factor}x the timeline "
                f"({engine.timeline.total_ms:.0f} ms)"
            )
        fx = sim.next_event(engine)
        if fx is None:
            engine.on_tick(sim.t_ms)
        else:
            engine.on_fixation(fx)
    metrics = compute_metrics(seg, pages, cfg.aoi, engine.log)
    return SessionResult(metrics=metrics, log=engine.log, engine=engine, sim=sim)


def session_seed(base_seed: int, profile_index: int, mode: Mode) -> int:
    """Stable per-session seed derivation for crossover runs."""
    return base_seed * 1_000_003 + profile_index * 2 + (0 if mode is Mode.GARY else 1)


@dataclass
class CrossoverRow:
    seed: int
    profile: str
    speed_class: str
    accuracy_class: str
    order: int  # 1 = first session, 2 = second
    mode: str
    text: str
    metrics: SessionMetrics


@dataclass
class CrossoverReport:
    rows: list[CrossoverRow] = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def crossover_assignment(n_profiles: int) -> list[tuple[Mode, str]]:
    """(first condition, text read with gary) per profile, orthogonally varied."""
    cells = [
        (Mode.GARY, "A"),
        (Mode.TRADITIONAL, "A"),
        (Mode.GARY, "B"),
        (Mode.TRADITIONAL, "B"),
    ]
    return [cells[i % 4] for i in range(n_profiles)]


def run_crossover(
    profiles: list[ReaderProfile],
    seg_a: SegmentedText,
    pages_a: list[PageLayout],
    seg_b: SegmentedText,
    pages_b: list[PageLayout],
    seeds: list[int],
    cfg: SessionConfig | None = None,
) -> CrossoverReport:
    if len(profiles) < 2:
        raise ValueError("crossover needs at least 2 profiles")
    assignment = crossover_assignment(len(profiles))
    texts = {"A": (seg_a, pages_a), "B": (seg_b, pages_b)}
    report = CrossoverReport()

    for base_seed in seeds:
        for i, profile in enumerate(profiles):
            first_mode, gary_text = assignment[i]
            trad_text = "B" if gary_text == "A" else "A"
            sessions = {
                Mode.GARY: gary_text,
                Mode.TRADITIONAL: trad_text,
            }
            order = [first_mode, Mode.TRADITIONAL if first_mode is Mode.GARY else Mode.GARY]
            cls = classify_profile(profile.pace_syll_s, profile.decoding_errors)
            for position, mode in enumerate(order, start=1):
                label = sessions[mode]
                seg, pages = texts[label]
                result = run_session(
                    profile, seg, pages, mode,
                    seed=session_seed(base_seed, i, mode), cfg=cfg,
                )
                report.rows.append(
                    CrossoverRow(
                        seed=base_seed,
                        profile=profile.name,
                        speed_class=cls.speed_class,
                        accuracy_class=cls.accuracy_class,
                        order=position,
                        mode=mode.value,
                        text=label,
                        metrics=result.metrics,
                    )
                )

    report.summary = summarize(report.rows, [p.name for p in profiles], len(seeds))
    return report


def _mean_sd(values: list[float]) -> dict:
    mean = statistics.fmean(values)
    sd = statistics.stdev(values) if len(values) > 1 else 0.0
    return {"mean": mean, "sd": sd}


def summarize(rows: list[CrossoverRow], profile_names: list[str], n_seeds: int) -> dict:
    cells = {}
    for mode in (Mode.GARY.value, Mode.TRADITIONAL.value):
        mode_rows = [r for r in rows if r.mode == mode]
        cells[mode] = {
            name: _mean_sd([getattr(r.metrics, name) for r in mode_rows])
            for name in METRIC_NAMES
        }
    gains = {}
    for name in profile_names:
        gary = [r for r in rows if r.profile == name and r.mode == Mode.GARY.value]
        trad = [r for r in rows if r.profile == name and r.mode == Mode.TRADITIONAL.value]
        gains[name] = {
            m: gain_score(
                statistics.fmean([getattr(r.metrics, m) for r in gary]),
                statistics.fmean([getattr(r.metrics, m) for r in trad]),
            )
            for m in METRIC_NAMES
        }
    return {
        "n_profiles": len(profile_names),
        "n_seeds": n_seeds,
        "cells": cells,
        "gains": gains,
        "reference_gains": dict(REFERENCE_GAINS),
    }


def report_csv(report: CrossoverReport) -> str:
    header = "seed,profile,speed_class,accuracy_class,order,mode,text," + ",".join(
        METRIC_NAMES
    )
    lines = [header]
    for r in report.rows:
        values = [repr(getattr(r.metrics, name)) for name in METRIC_NAMES]
        lines.append(
            f"{r.seed},{r.profile},{r.speed_class},{r.accuracy_class},"
            f"{r.order},{r.mode},{r.text}," + ",".join(values)
        )
    return "\n".join(lines) + "\n"


def calibrate_pace(
    base_profile: ReaderProfile,
    target_syll_s: float,
    seg: SegmentedText,
    pages: list[PageLayout],
    seeds: list[int],
    lo: float = 1.2,
    hi: float = 3.2,
    tol: float = 0.05,
    max_iter: int = 24,
) -> float:
    """Bisect the intrinsic pace until mean closed-loop gary speed hits target.

    Closed-loop speed is monotone in pace (up to the audio-rate ceiling), so
    plain bisection converges; the returned pace is what preset constants
    are built from.
    """

    def mean_speed(pace: float) -> float:
        profile = replace(base_profile, pace_syll_s=pace)
        speeds = [
            run_session(profile, seg, pages, Mode.GARY, seed=s).metrics.effective_speed_syll_s
            for s in seeds
        ]
        return statistics.fmean(speeds)

    for _ in range(max_iter):
        mid = (lo + hi) / 2.0
        got = mean_speed(mid)
        if abs(got - target_syll_s) <= tol / 2:
            return mid
        if got < target_syll_s:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0
