import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gary.text import (
    EmptyText,
    NonPositiveDuration,
    NoVowel,
    count_syllables,
    gulpease,
    gulpease_raw,
    reading_speed,
    segment_phrases,
    tokenize,
)


class TestTokenize:
    def test_single_token(self):
        doc = tokenize("Ciao.")
        assert [w.token for w in doc.words] == ["Ciao"]
        assert len(doc.sentences) == 1

    def test_two_sentences(self):
        doc = tokenize("Le anguille nuotano. Poi dormono.")
        assert len(doc.words) == 5
        assert len(doc.sentences) == 2
        assert [w.token for w in doc.words] == [
            "Le", "anguille", "nuotano", "Poi", "dormono",
        ]

    def test_whitespace_only_raises(self):
        with pytest.raises(EmptyText):
            tokenize("   ")

    def test_elision_is_one_word(self):
        doc = tokenize("Guarda l'oceano.")
        assert [w.token for w in doc.words] == ["Guarda", "l'oceano"]

    def test_spans_recover_tokens(self):
        raw = "«Ecco», disse: l'acqua è blu!"
        doc = tokenize(raw)
        for w in doc.words:
            assert raw[w.start : w.end] == w.token

    def test_every_word_in_exactly_one_sentence(self):
        doc = tokenize("Uno due. Tre; quattro! Cinque")
        seen = []
        for s in doc.sentences:
            seen.extend(range(s.first_word, s.last_word + 1))
        assert seen == list(range(len(doc.words)))

    def test_punctuation_only_chunk_is_boundary_not_word(self):
        doc = tokenize("uno - due")
        assert [w.token for w in doc.words] == ["uno", "due"]
        assert 0 in doc.boundary_after

    def test_interior_period_does_not_split(self):
        doc = tokenize("vale 3.14 circa")
        assert len(doc.sentences) == 1
        assert doc.words[1].token == "3.14"


class TestSyllables:
    def test_fixture_set_exact(self, readability_fixtures):
        for item in readability_fixtures["syllables"]:
            assert count_syllables(item["word"]) == item["expected"], item

    def test_no_vowel(self):
        with pytest.raises(NoVowel):
            count_syllables("brr")

    def test_no_letters(self):
        with pytest.raises(ValueError):
            count_syllables("1234")

    def test_accent_forces_hiatus(self):
        assert count_syllables("addìo") == 3  # ad-dì-o

    def test_deterministic(self):
        assert all(
            count_syllables("attraversano") == 5 for _ in range(10)
        )

    @given(st.text(alphabet="aeiou", min_size=1, max_size=12))
    def test_pure_vowel_strings_count_strong_vowels(self, s):
        # single cluster: one nucleus per strong vowel, at least one
        expected = max(1, sum(1 for c in s if c in "aeo"))
        assert count_syllables(s) == expected


class TestGulpease:
    def test_synthetic_counts(self):
        assert gulpease_raw(100, 450, 5) == 59.0

    def test_clamp_boundary(self):
        doc = tokenize("Ciao.")
        assert gulpease(doc) == 100.0

    def test_fixture_set(self, readability_fixtures):
        for item in readability_fixtures["gulpease"]:
            doc = tokenize(item["text"])
            assert len(doc.words) == item["words"], item["text"]
            assert len(doc.sentences) == item["sentences"], item["text"]
            assert abs(gulpease(doc) - item["expected"]) <= 0.5, item["text"]

    def test_monotone_decreasing_in_letters(self):
        scores = [gulpease_raw(50, letters, 4) for letters in range(100, 400, 25)]
        assert all(a > b for a, b in zip(scores, scores[1:]))

    def test_empty_raises(self):
        with pytest.raises(EmptyText):
            gulpease_raw(0, 0, 0)


class TestSegmentPhrases:
    def test_single_phrase(self):
        seg = segment_phrases(tokenize("Ciao."))
        assert len(seg.phrases) == 1
        assert seg.phrases[0].word_span == (0, 0)

    def test_greedy_chunks(self):
        raw = " ".join(["la"] * 12)
        seg = segment_phrases(tokenize(raw), max_words=5)
        assert [p.word_count for p in seg.phrases] == [5, 5, 2]

    def test_punctuation_breaks(self):
        seg = segment_phrases(
            tokenize("Le anguille, pesci misteriosi, attraversano l'oceano.")
        )
        doc = seg.document
        groups = [
            [doc.words[i].token for i in range(p.first_word, p.last_word + 1)]
            for p in seg.phrases
        ]
        assert groups == [
            ["Le", "anguille"],
            ["pesci", "misteriosi"],
            ["attraversano", "l'oceano"],
        ]

    def test_max_words_flag(self):
        raw = " ".join(["sole"] * 10)
        seg = segment_phrases(tokenize(raw), max_words=3)
        assert all(p.word_count <= 3 for p in seg.phrases)

    def test_syllable_totals_consistent(self, story_seg):
        assert story_seg.total_syllables == sum(
            p.syllable_count for p in story_seg.phrases
        )
        assert [p.index for p in story_seg.phrases] == list(range(len(story_seg.phrases)))


def _random_text(rng: random.Random) -> str:
    syll = ["la", "ri", "mon", "te", "so", "gna", "vi", "an", "co", "stra"]
    parts = []
    for _ in range(rng.randint(1, 60)):
        word = "".join(rng.choice(syll) for _ in range(rng.randint(1, 4)))
        parts.append(word)
        if rng.random() < 0.18:
            parts[-1] += rng.choice([",", ".", "!", "?", ";", ":"])
    return " ".join(parts)


class TestSegmentationProperties:
    def test_partition_and_bounds_over_random_corpus(self):
        # quantified over >= 1000 random texts
        rng = random.Random(20260809)
        for _ in range(1000):
            raw = _random_text(rng)
            doc = tokenize(raw)
            seg = segment_phrases(doc)
            covered = []
            for p in seg.phrases:
                assert 1 <= p.word_count <= 5
                covered.extend(range(p.first_word, p.last_word + 1))
            assert covered == list(range(len(doc.words)))

    @given(st.integers(1, 40), st.integers(0, 4))
    @settings(max_examples=60)
    def test_partition_hypothesis(self, n_words, punct_every):
        words = []
        for i in range(n_words):
            w = "pa" * ((i % 3) + 1)
            if punct_every and i % (punct_every + 1) == punct_every:
                w += ","
            words.append(w)
        seg = segment_phrases(tokenize(" ".join(words)))
        assert sum(p.word_count for p in seg.phrases) == n_words


class TestReadingSpeed:
    def test_simple(self):
        assert reading_speed(300, 100.0) == 3.0

    def test_reported_mean_direction(self):
        # 690 syllables over 300 s lands on the overall gaze-gated mean speed
        assert reading_speed(690, 300.0) == pytest.approx(2.3)

    def test_zero_duration(self):
        with pytest.raises(NonPositiveDuration):
            reading_speed(100, 0.0)
