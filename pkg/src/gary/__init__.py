"""Gaze-contingent read-aloud toolkit.

The package is organised around the reading loop: ``text`` segments Italian
text into phrases, ``layout`` paginates them and derives gaze areas of
interest, ``gaze`` maps and filters eye-tracking input, ``engine`` runs the
pacing state machine, ``simulator`` closes the loop with synthetic readers,
``harness`` runs crossover experiments over them, and ``service``/``cli``
expose everything to a live browser client and the command line.
"""

from gary.text import (
    Document,
    Phrase,
    SegmentedText,
    count_syllables,
    gulpease,
    reading_speed,
    segment_phrases,
    tokenize,
)

__all__ = [
    "Document",
    "Phrase",
    "SegmentedText",
    "count_syllables",
    "gulpease",
    "reading_speed",
    "segment_phrases",
    "tokenize",
]
