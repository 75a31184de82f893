"""Italian text model: tokenization, syllable counting, readability, phrase segmentation.

Everything in this module is a pure function over immutable inputs. The
segmentation produced here (prosodic-style phrases of one to five words) is
the atomic unit the pacing engine highlights and plays.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass


class EmptyText(ValueError):
    """Raised when the input contains no word tokens."""


class NoVowel(ValueError):
    """Raised when a word has no vowel to carry a syllable nucleus."""


class NonPositiveDuration(ValueError):
    """Raised when a reading-speed computation receives duration <= 0."""


@dataclass(frozen=True)
class Word:
    """A word token with its character span in the source text."""

    token: str
    start: int
    end: int  # exclusive


@dataclass(frozen=True)
class Sentence:
    """Inclusive word-index range of one sentence."""

    first_word: int
    last_word: int


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    raw_text: str
    words: tuple[Word, ...]
    sentences: tuple[Sentence, ...]
    # word indices after which any punctuation occurs (phrase boundaries)
    boundary_after: frozenset[int]


@dataclass(frozen=True)
class Phrase:
    """A highlight/playback unit of 1..max_words consecutive words."""

    index: int
    first_word: int
    last_word: int  # inclusive
    syllable_count: int

    @property
    def word_span(self) -> tuple[int, int]:
        return (self.first_word, self.last_word)

    @property
    def word_count(self) -> int:
        return self.last_word - self.first_word + 1


@dataclass(frozen=True)
class SegmentedText:
    document: Document
    phrases: tuple[Phrase, ...]
    total_syllables: int
    gulpease: float


_CHUNK_RE = re.compile(r"\S+")
_SENTENCE_PUNCT = set(".?!;:")

# Vowel inventory for Italian orthography. Unaccented i/u (and y in loanwords)
# are weak: adjacent to another vowel they merge into its nucleus. Everything
# else, including every accented vowel, is strong and carries its own nucleus,
# which makes written accents force hiatus (ad-dì-o).
_WEAK_VOWELS = set("iuy")
_STRONG_VOWELS = set("aeoàáâèéêìíîòóôùúû")
_VOWELS = _WEAK_VOWELS | _STRONG_VOWELS


def tokenize(raw_text: str, doc_id: str = "", title: str = "") -> Document:
    """Split text into words and sentences.

    Words are whitespace-delimited chunks with leading and trailing
    punctuation stripped; the stripped punctuation stays in the inter-word
    gaps and marks phrase boundaries. Interior punctuation (the elision
    apostrophe of "l'oceano", decimal points) stays inside the token, so
    elided articles do not inflate the word count. Sentences break wherever
    an inter-word gap contains one of ``. ? ! ; :``.
    """
    text = unicodedata.normalize("NFC", raw_text)
    words: list[Word] = []
    for m in _CHUNK_RE.finditer(text):
        chunk = m.group()
        first = next((i for i, c in enumerate(chunk) if c.isalnum()), None)
        if first is None:
            continue  # punctuation-only chunk; stays in the gap
        last = max(i for i, c in enumerate(chunk) if c.isalnum())
        words.append(
            Word(chunk[first : last + 1], m.start() + first, m.start() + last + 1)
        )
    if not words:
        raise EmptyText("no word tokens in input")

    boundaries: set[int] = set()
    sentence_breaks: set[int] = set()
    for i in range(len(words) - 1):
        gap = text[words[i].end : words[i + 1].start]
        if any(not c.isspace() for c in gap):
            boundaries.add(i)
        if any(c in _SENTENCE_PUNCT for c in gap):
            sentence_breaks.add(i)

    sentences: list[Sentence] = []
    first = 0
    for i in sorted(sentence_breaks):
        sentences.append(Sentence(first, i))
        first = i + 1
    if first < len(words):
        sentences.append(Sentence(first, len(words) - 1))

    return Document(
        id=doc_id,
        title=title,
        raw_text=raw_text,
        words=tuple(words),
        sentences=tuple(sentences),
        boundary_after=frozenset(boundaries),
    )


def count_syllables(word: str) -> int:
    """Count syllables of an Italian word token.

    Deterministic vowel-nucleus counting: letters are scanned into maximal
    vowel clusters; each cluster contributes one nucleus per strong vowel
    (a, e, o and any accented vowel), with a minimum of one, so unaccented
    i/u glide onto neighbouring vowels (an-guil-le -> 3, a-iuo-la -> 3)
    while adjacent strong vowels stay in hiatus (po-e-ta -> 3). The "qu"
    group falls out of the same rule because its u is weak.
    """
    letters = [c for c in unicodedata.normalize("NFC", word).lower() if c.isalpha()]
    if not letters:
        raise ValueError(f"word {word!r} has no alphabetic characters")

    count = 0
    cluster_strong = 0
    in_cluster = False
    for c in letters:
        if c in _VOWELS:
            if not in_cluster:
                in_cluster = True
                cluster_strong = 0
            if c in _STRONG_VOWELS:
                cluster_strong += 1
        else:
            if in_cluster:
                count += max(1, cluster_strong)
                in_cluster = False
    if in_cluster:
        count += max(1, cluster_strong)

    if count == 0:
        raise NoVowel(f"word {word!r} has no vowel")
    return count


def _syllables_or_one(token: str) -> int:
    # Vowel-less tokens (digits, stray consonant abbreviations) still take one
    # spoken beat; the strict counter is reserved for proper words.
    try:
        return count_syllables(token)
    except (NoVowel, ValueError):
        return 1


def letter_count(doc: Document) -> int:
    """Alphabetic characters over all tokens; apostrophes and digits excluded."""
    return sum(1 for w in doc.words for c in w.token if c.isalpha())


def gulpease_raw(words: int, letters: int, sentences: int) -> float:
    """Unclamped readability score: 89 + (300*sentences - 10*letters) / words."""
    if words <= 0:
        raise EmptyText("word count must be positive")
    return 89.0 + (300.0 * sentences - 10.0 * letters) / words


def gulpease(doc: Document) -> float:
    """Readability index in [0, 100]; higher reads easier."""
    raw = gulpease_raw(len(doc.words), letter_count(doc), len(doc.sentences))
    return min(100.0, max(0.0, raw))


def segment_phrases(doc: Document, max_words: int = 5) -> SegmentedText:
    """Partition the document's words into phrases of 1..max_words.

    Breaks at every punctuation boundary; a punctuation-free run is chunked
    greedily into groups of max_words with a shorter remainder at the end.
    """
    if not 1 <= max_words <= 5:
        raise ValueError("max_words must be in 1..5")

    runs: list[tuple[int, int]] = []
    start = 0
    for i in range(len(doc.words)):
        if i in doc.boundary_after:
            runs.append((start, i))
            start = i + 1
    if start < len(doc.words):
        runs.append((start, len(doc.words) - 1))

    phrases: list[Phrase] = []
    for run_start, run_end in runs:
        i = run_start
        while i <= run_end:
            j = min(i + max_words - 1, run_end)
            syll = sum(_syllables_or_one(w.token) for w in doc.words[i : j + 1])
            phrases.append(Phrase(len(phrases), i, j, syll))
            i = j + 1

    total = sum(p.syllable_count for p in phrases)
    return SegmentedText(
        document=doc,
        phrases=tuple(phrases),
        total_syllables=total,
        gulpease=gulpease(doc),
    )


def reading_speed(total_syllables: int, duration_s: float) -> float:
    """Syllables per second."""
    if duration_s <= 0:
        raise NonPositiveDuration(f"duration must be positive, got {duration_s}")
    if total_syllables <= 0:
        raise ValueError("syllable count must be positive")
    return total_syllables / duration_s


def segmented_to_dict(seg: SegmentedText) -> dict:
    """JSON-ready view of a segmentation."""
    doc = seg.document
    return {
        "id": doc.id,
        "title": doc.title,
        "words": [{"token": w.token, "start": w.start, "end": w.end} for w in doc.words],
        "sentences": [[s.first_word, s.last_word] for s in doc.sentences],
        "phrases": [
            {"word_span": [p.first_word, p.last_word], "syllable_count": p.syllable_count}
            for p in seg.phrases
        ],
        "total_syllables": seg.total_syllables,
        "gulpease": seg.gulpease,
    }
