"""Pagination and gaze areas of interest.

Pages hold at most seven lines of text and never split a phrase across a
page boundary. Geometry uses a fixed-width font model (word width is
character count times a constant) so layout is deterministic and
renderer-independent; a live client may re-measure real glyphs and report
its own boxes, which replace these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from gary.text import Phrase, SegmentedText


class WordTooWide(ValueError):
    """A single word exceeds the usable line width."""


class PhraseNotOnPage(ValueError):
    """The requested phrase has no word boxes on the given page."""


@dataclass(frozen=True)
class Viewport:
    """Display metrics. line_height_px is 1.5x the nominal glyph height."""

    width_px: int = 1024
    height_px: int = 360
    char_width_px: float = 10.0
    line_height_px: float = 36.0
    margin_px: float = 48.0
    max_lines: int = 7

    def lines_per_page(self) -> int:
        usable = self.height_px - 2 * self.margin_px
        return min(self.max_lines, max(1, math.floor(usable / self.line_height_px)))

    def usable_width(self) -> float:
        return self.width_px - 2 * self.margin_px


@dataclass(frozen=True)
class Rect:
    x: float
    y: float
    w: float
    h: float

    def contains(self, px: float, py: float) -> bool:
        return self.x <= px <= self.x + self.w and self.y <= py <= self.y + self.h

    def expand(self, pad: float) -> "Rect":
        return Rect(self.x - pad, self.y - pad, self.w + 2 * pad, self.h + 2 * pad)


@dataclass(frozen=True)
class WordBox:
    word_index: int
    x: float
    y: float
    w: float
    h: float

    @property
    def rect(self) -> Rect:
        return Rect(self.x, self.y, self.w, self.h)


@dataclass
class PageLayout:
    page_index: int
    lines: list[list[WordBox]]
    boxes: dict[int, WordBox] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.boxes:
            self.boxes = {b.word_index: b for line in self.lines for b in line}

    @property
    def first_word(self) -> int:
        return self.lines[0][0].word_index

    @property
    def last_word(self) -> int:
        return self.lines[-1][-1].word_index

    @property
    def line_height(self) -> float:
        return self.lines[0][0].h


@dataclass(frozen=True)
class AoiConfig:
    """AOI expansion parameters.

    expansion_rms_px is the calibration residual; boxes are padded by
    max(0.5 * line_height, 1.5 * expansion_rms_px) on every side so that
    tracking error rarely pushes an on-text fixation outside its AOI.
    """

    expansion_rms_px: float = 5.0
    lookahead_words: int = 5


def aoi_pad(line_height: float, cfg: AoiConfig) -> float:
    return max(0.5 * line_height, 1.5 * cfg.expansion_rms_px)


def paginate(seg: SegmentedText, vp: Viewport) -> list[PageLayout]:
    """Greedy line fill, new page after the line limit, phrases page-atomic.

    A phrase that would straddle the page boundary moves wholly to the next
    page (it may still wrap lines within its page).
    """
    words = seg.document.words
    usable = vp.usable_width()
    widths = [len(w.token) * vp.char_width_px for w in words]
    for w, width in zip(words, widths):
        if width > usable:
            raise WordTooWide(f"word {w.token!r} ({width}px) exceeds line width {usable}px")

    space = vp.char_width_px
    limit = vp.lines_per_page()
    pages: list[PageLayout] = []
    lines: list[list[WordBox]] = [[]]
    cursor_x = vp.margin_px

    def place(widx: int, line_idx: int, x: float) -> tuple[int, float, WordBox]:
        # x > margin means the line already has content; a word that would
        # overflow then wraps (a word at line start never wraps, it was
        # width-checked above)
        if x > vp.margin_px and x + widths[widx] > vp.margin_px + usable:
            line_idx += 1
            x = vp.margin_px
        box = WordBox(
            widx,
            x,
            vp.margin_px + line_idx * vp.line_height_px,
            widths[widx],
            vp.line_height_px,
        )
        return line_idx, x + widths[widx] + space, box

    def flush_page() -> None:
        nonlocal lines, cursor_x
        pages.append(PageLayout(len(pages), [ln for ln in lines if ln]))
        lines = [[]]
        cursor_x = vp.margin_px

    for phrase in seg.phrases:
        # dry run to see whether the phrase fits the remaining page space
        line_idx = len(lines) - 1
        x = cursor_x
        placed: list[tuple[int, WordBox]] = []
        for widx in range(phrase.first_word, phrase.last_word + 1):
            line_idx, x, box = place(widx, line_idx, x)
            placed.append((line_idx, box))
        if line_idx >= limit:
            flush_page()
            line_idx, x = 0, cursor_x
            placed = []
            for widx in range(phrase.first_word, phrase.last_word + 1):
                line_idx, x, box = place(widx, line_idx, x)
                placed.append((line_idx, box))
        for li, box in placed:
            while len(lines) <= li:
                lines.append([])
            lines[li].append(box)
        cursor_x = x

    if any(lines):
        flush_page()
    return pages


def _line_unions(boxes: list[WordBox]) -> list[Rect]:
    by_line: dict[float, list[WordBox]] = {}
    for b in boxes:
        by_line.setdefault(b.y, []).append(b)
    rects = []
    for y in sorted(by_line):
        row = by_line[y]
        x0 = min(b.x for b in row)
        x1 = max(b.x + b.w for b in row)
        rects.append(Rect(x0, y, x1 - x0, row[0].h))
    return rects


def aoi_for_phrase(page: PageLayout, phrase: Phrase, cfg: AoiConfig) -> list[Rect]:
    """Expanded union box of the phrase's words, one rectangle per line."""
    try:
        boxes = [page.boxes[i] for i in range(phrase.first_word, phrase.last_word + 1)]
    except KeyError:
        raise PhraseNotOnPage(f"phrase {phrase.index} not on page {page.page_index}")
    pad = aoi_pad(page.line_height, cfg)
    return [r.expand(pad) for r in _line_unions(boxes)]


def lookahead_region(
    page: PageLayout, seg: SegmentedText, phrase_index: int, cfg: AoiConfig
) -> list[Rect]:
    """Expanded AOI of the next words after the phrase, bounded to this page.

    Covers min(lookahead_words, words remaining on the page) words; empty
    when the phrase is the last one on the page.
    """
    phrase = seg.phrases[phrase_index]
    if phrase.first_word not in page.boxes or phrase.last_word not in page.boxes:
        raise PhraseNotOnPage(f"phrase {phrase_index} not on page {page.page_index}")
    first = phrase.last_word + 1
    last = min(phrase.last_word + cfg.lookahead_words, page.last_word)
    if first > last:
        return []
    boxes = [page.boxes[i] for i in range(first, last + 1)]
    pad = aoi_pad(page.line_height, cfg)
    return [r.expand(pad) for r in _line_unions(boxes)]


def first_line_region(page: PageLayout, cfg: AoiConfig) -> list[Rect]:
    """Expanded AOI of the page's first line (used by the page-settle rule)."""
    pad = aoi_pad(page.line_height, cfg)
    return [r.expand(pad) for r in _line_unions(page.lines[0])]


def page_of_word(pages: list[PageLayout], word_index: int) -> int:
    for p in pages:
        if word_index in p.boxes:
            return p.page_index
    raise KeyError(word_index)


def pages_to_dict(pages: list[PageLayout]) -> list[dict]:
    """JSON-ready view: pages -> lines -> word boxes with global indices."""
    return [
        {
            "page_index": p.page_index,
            "lines": [
                [
                    {"word_index": b.word_index, "x": b.x, "y": b.y, "w": b.w, "h": b.h}
                    for b in line
                ]
                for line in p.lines
            ],
        }
        for p in pages
    ]


def pages_from_dict(data: list[dict]) -> list[PageLayout]:
    return [
        PageLayout(
            d["page_index"],
            [
                [WordBox(b["word_index"], b["x"], b["y"], b["w"], b["h"]) for b in line]
                for line in d["lines"]
            ],
        )
        for d in data
    ]
