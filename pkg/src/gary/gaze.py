"""Gaze input: calibration, fixation detection, AOI hit testing.

Raw tracker coordinates are mapped to screen pixels by a per-axis
second-order polynomial fitted over a twelve-target calibration. Fixations
are identified with a dispersion-threshold scan (I-DT) whose dispersion
metric is bounding-box width plus height.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from gary.layout import Rect

CALIBRATION_TARGETS = 12
MIN_SAMPLES_PER_TARGET = 5

# ~1.5 degrees at a 50-55 cm viewing distance on a nominal 96-dpi display
DEFAULT_DISPERSION_PX = 60.0
DEFAULT_MIN_DURATION_MS = 80.0


class InsufficientSamples(ValueError):
    """Calibration input does not meet the target/sample count contract."""


class DegenerateGeometry(ValueError):
    """Calibration targets do not span the plane (collinear)."""


@dataclass(frozen=True)
class RawGazeSample:
    t_ms: float
    x: float
    y: float
    valid: bool = True


@dataclass(frozen=True)
class Fixation:
    start_ms: float
    duration_ms: float
    x: float
    y: float

    @property
    def end_ms(self) -> float:
        return self.start_ms + self.duration_ms


@dataclass(frozen=True)
class CalibrationModel:
    """Per-axis coefficients for x' = a0 + a1*x + a2*y + a3*x^2 + a4*y^2 + a5*xy."""

    coef_x: tuple[float, ...]
    coef_y: tuple[float, ...]
    rms_error_px: float

    @classmethod
    def identity(cls) -> "CalibrationModel":
        return cls((0.0, 1.0, 0.0, 0.0, 0.0, 0.0), (0.0, 0.0, 1.0, 0.0, 0.0, 0.0), 0.0)


def _design_row(x: float, y: float) -> list[float]:
    return [1.0, x, y, x * x, y * y, x * y]


def fit_calibration(
    pairs: Sequence[tuple[tuple[float, float], Sequence[RawGazeSample]]],
) -> CalibrationModel:
    """Least-squares fit of the screen mapping over 12 calibration targets.

    Each pair is (target screen point, raw samples recorded while the user
    looked at it). Requires exactly 12 targets with at least 5 valid samples
    each. The residual RMS over all valid samples is stored on the model and
    feeds AOI expansion downstream.
    """
    if len(pairs) != CALIBRATION_TARGETS:
        raise InsufficientSamples(
            f"expected {CALIBRATION_TARGETS} calibration targets, got {len(pairs)}"
        )
    rows: list[list[float]] = []
    tx: list[float] = []
    ty: list[float] = []
    for target, samples in pairs:
        valid = [s for s in samples if s.valid]
        if len(valid) < MIN_SAMPLES_PER_TARGET:
            raise InsufficientSamples(
                f"target {target} has {len(valid)} valid samples, "
                f"need {MIN_SAMPLES_PER_TARGET}"
            )
        for s in valid:
            rows.append(_design_row(s.x, s.y))
            tx.append(target[0])
            ty.append(target[1])

    targets = np.array([t for t, _ in pairs], dtype=float)
    centered = targets - targets.mean(axis=0)
    # collinear targets leave the quadratic under-determined
    if np.linalg.matrix_rank(centered, tol=1e-9 * max(1.0, abs(centered).max())) < 2:
        raise DegenerateGeometry("calibration targets are collinear")

    a = np.array(rows, dtype=float)
    bx = np.array(tx, dtype=float)
    by = np.array(ty, dtype=float)
    # solve in a column-scaled basis: raw coordinates reach ~10^3 so the
    # squared columns reach ~10^6, which wrecks lstsq conditioning
    scale = np.abs(a).max(axis=0)
    scale[scale == 0.0] = 1.0
    sol_x, _, rank, _ = np.linalg.lstsq(a / scale, bx, rcond=None)
    sol_y, _, _, _ = np.linalg.lstsq(a / scale, by, rcond=None)
    if rank < 6:
        raise DegenerateGeometry("calibration samples do not determine the mapping")
    sol_x /= scale
    sol_y /= scale

    residual = np.hypot(a @ sol_x - bx, a @ sol_y - by)
    rms = float(np.sqrt(np.mean(residual**2)))
    return CalibrationModel(tuple(map(float, sol_x)), tuple(map(float, sol_y)), rms)


def apply_calibration(
    model: CalibrationModel,
    sample: RawGazeSample,
    screen_size: tuple[float, float] | None = None,
) -> tuple[float, float] | None:
    """Map a raw sample to screen pixels; None marks an invalid sample.

    Invalid input passes through as None. When screen_size is given, points
    landing outside a box twice the viewport size (centred on it) are also
    treated as invalid rather than trusted.
    """
    if not sample.valid:
        return None
    row = _design_row(sample.x, sample.y)
    px = sum(c * v for c, v in zip(model.coef_x, row))
    py = sum(c * v for c, v in zip(model.coef_y, row))
    if screen_size is not None:
        w, h = screen_size
        if not (-0.5 * w <= px <= 1.5 * w and -0.5 * h <= py <= 1.5 * h):
            return None
    return (px, py)


def detect_fixations(
    samples: Sequence[RawGazeSample],
    dispersion_px: float = DEFAULT_DISPERSION_PX,
    min_duration_ms: float = DEFAULT_MIN_DURATION_MS,
) -> list[Fixation]:
    """Dispersion-threshold fixation identification (I-DT).

    A fixation is a maximal window of consecutive valid samples whose
    bounding-box dispersion (width + height) stays within dispersion_px and
    whose time span reaches min_duration_ms. Invalid samples break windows.
    The scan is greedy from the left: the earliest qualifying window is
    taken, extended as far as dispersion allows, and the scan resumes after
    it.
    """
    fixations: list[Fixation] = []
    for run in _valid_runs(samples):
        _scan_run(run, dispersion_px, min_duration_ms, fixations)
    return fixations


def _valid_runs(samples: Sequence[RawGazeSample]) -> Iterable[list[RawGazeSample]]:
    run: list[RawGazeSample] = []
    last_t = None
    for s in samples:
        if last_t is not None and s.t_ms <= last_t:
            raise ValueError("sample timestamps must be strictly increasing")
        last_t = s.t_ms
        if s.valid:
            run.append(s)
        elif run:
            yield run
            run = []
    if run:
        yield run


def _scan_run(
    run: list[RawGazeSample],
    dispersion_px: float,
    min_duration_ms: float,
    out: list[Fixation],
) -> None:
    n = len(run)
    i = 0
    while i < n:
        # smallest window starting at i that spans the duration threshold
        j = i
        while j < n and run[j].t_ms - run[i].t_ms < min_duration_ms:
            j += 1
        if j == n:
            return  # run too short for any further fixation
        xs = [s.x for s in run[i : j + 1]]
        ys = [s.y for s in run[i : j + 1]]
        min_x, max_x = min(xs), max(xs)
        min_y, max_y = min(ys), max(ys)
        if (max_x - min_x) + (max_y - min_y) > dispersion_px:
            i += 1
            continue
        while j + 1 < n:
            s = run[j + 1]
            nx0, nx1 = min(min_x, s.x), max(max_x, s.x)
            ny0, ny1 = min(min_y, s.y), max(max_y, s.y)
            if (nx1 - nx0) + (ny1 - ny0) > dispersion_px:
                break
            min_x, max_x, min_y, max_y = nx0, nx1, ny0, ny1
            j += 1
        window = run[i : j + 1]
        out.append(
            Fixation(
                start_ms=window[0].t_ms,
                duration_ms=window[-1].t_ms - window[0].t_ms,
                x=sum(s.x for s in window) / len(window),
                y=sum(s.y for s in window) / len(window),
            )
        )
        i = j + 1


class OnlineFixationDetector:
    """Streaming I-DT for live input, one instance per sample stream.

    Emits a Fixation as soon as the current window satisfies the duration
    threshold, then re-emits the growing window at most every refresh_ms so
    a long dwell keeps feeding the engine without flooding it. Offline
    analysis should use detect_fixations; this variant trades the maximal-
    window guarantee for low latency.
    """

    def __init__(
        self,
        dispersion_px: float = DEFAULT_DISPERSION_PX,
        min_duration_ms: float = DEFAULT_MIN_DURATION_MS,
        refresh_ms: float = 100.0,
    ) -> None:
        self.dispersion_px = dispersion_px
        self.min_duration_ms = min_duration_ms
        self.refresh_ms = refresh_ms
        self._window: list[RawGazeSample] = []
        self._last_emit_ms: float | None = None

    def push(self, sample: RawGazeSample) -> list[Fixation]:
        if not sample.valid:
            self._window = []
            self._last_emit_ms = None
            return []
        self._window.append(sample)
        while self._window:
            xs = [s.x for s in self._window]
            ys = [s.y for s in self._window]
            if (max(xs) - min(xs)) + (max(ys) - min(ys)) <= self.dispersion_px:
                break
            self._window.pop(0)
            self._last_emit_ms = None
        if not self._window:
            return []
        span = self._window[-1].t_ms - self._window[0].t_ms
        if span < self.min_duration_ms:
            return []
        if (
            self._last_emit_ms is not None
            and sample.t_ms - self._last_emit_ms < self.refresh_ms
        ):
            return []
        self._last_emit_ms = sample.t_ms
        return [
            Fixation(
                start_ms=self._window[0].t_ms,
                duration_ms=span,
                x=sum(xs) / len(xs),
                y=sum(ys) / len(ys),
            )
        ]


def hit_test(point: tuple[float, float], region: Iterable[Rect]) -> bool:
    """True when the point lies inside any rectangle, boundaries inclusive."""
    px, py = point
    return any(r.contains(px, py) for r in region)


def samples_to_csv(samples: Iterable[RawGazeSample], path: str) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["t_ms", "x", "y", "valid"])
        for s in samples:
            writer.writerow([repr(s.t_ms), repr(s.x), repr(s.y), int(s.valid)])


def samples_from_csv(path: str) -> list[RawGazeSample]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != ["t_ms", "x", "y", "valid"]:
            raise ValueError(f"unexpected gaze trace header: {header}")
        return [
            RawGazeSample(float(t), float(x), float(y), bool(int(v)))
            for t, x, y, v in reader
        ]


def model_to_json(model: CalibrationModel, path: str) -> None:
    with open(path, "w") as f:
        json.dump(
            {
                "coef_x": list(model.coef_x),
                "coef_y": list(model.coef_y),
                "rms_error_px": model.rms_error_px,
            },
            f,
            indent=2,
        )


def model_from_json(path: str) -> CalibrationModel:
    with open(path) as f:
        d = json.load(f)
    return CalibrationModel(tuple(d["coef_x"]), tuple(d["coef_y"]), d["rms_error_px"])
