"""Cebuano-aware text segmentation.

Everything here is a pure function over strings: sentence splitting, word
tokenization, consonant-vowel (CV) skeleton construction, syllabification,
and syllable counting. The letter classification follows written Cebuano:
the five vowels a/e/i/o/u, the digraph "ng" as one consonant unit, and
every other letter (y and w included) as a consonant. Adjacent vowels are
hiatus, so each vowel is its own syllable nucleus (mi-ka-on, not mi-kaon).

Skeletons are plain strings over the alphabet {C, V}; a syllabification is
a list of contiguous skeleton slices whose concatenation restores the
skeleton.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

VOWELS = frozenset("aeiou")

# Letters joined by interior hyphens/apostrophes form one token
# (reduplications like "balay-balay" stay whole). [^\W\d_] is the
# re-module spelling of "any Unicode letter".
_TOKEN_RE = re.compile(r"[^\W\d_]+(?:['’-][^\W\d_]+)*")

# Runs of terminators end exactly one sentence ("!!" is not two).
_SENTENCE_END_RE = re.compile(r"[.!?…]+")

_JOINERS = frozenset("-'’")


@dataclass(frozen=True)
class Token:
    """A lowercase word together with its CV skeleton."""

    surface: str
    skeleton: str

    @property
    def letter_count(self) -> int:
        """Number of letters, hyphens/apostrophes excluded."""
        return sum(1 for ch in self.surface if ch not in _JOINERS)


def split_sentences(text: str) -> list[str]:
    """Split text into sentences on runs of . ! ? or ellipsis.

    Text holding no terminator is one sentence; empty text yields no
    sentences. Abbreviation handling is deliberately absent.
    """
    parts = _SENTENCE_END_RE.split(text)
    return [p.strip() for p in parts if p.strip()]


def tokenize(sentence: str) -> list[Token]:
    """Lowercase word tokens of a sentence.

    A token is a maximal run of letters, optionally joined by interior
    hyphens or apostrophes. Digits and punctuation never form tokens.
    """
    lowered = sentence.lower()
    return [Token(m, to_skeleton(m)) for m in _TOKEN_RE.findall(lowered)]


def to_skeleton(word: str) -> str:
    """CV skeleton of a lowercase word.

    a/e/i/o/u map to V, the digraph "ng" collapses to a single C, every
    other letter maps to C. Hyphens and apostrophes are skipped and also
    break a potential "ng" digraph.
    """
    units: list[str] = []
    i = 0
    n = len(word)
    while i < n:
        ch = word[i]
        if ch in _JOINERS:
            i += 1
            continue
        if ch == "n" and i + 1 < n and word[i + 1] == "g":
            units.append("C")
            i += 2
            continue
        units.append("V" if ch in VOWELS else "C")
        i += 1
    return "".join(units)


def syllabify(skeleton: str) -> list[str]:
    """Segment a CV skeleton into syllables.

    Each syllable is built around one V nucleus. Of the consonants between
    two nuclei, exactly one attaches to the following syllable as onset and
    the rest close the preceding syllable. Leading consonants all join the
    first syllable; trailing consonants all close the last one. A skeleton
    with no V at all yields a single residue syllable.
    """
    if not skeleton:
        return []
    nuclei = [i for i, u in enumerate(skeleton) if u == "V"]
    if not nuclei:
        return [skeleton]
    starts = [0]
    for prev, cur in zip(nuclei, nuclei[1:]):
        between = cur - prev - 1
        starts.append(cur - 1 if between >= 1 else cur)
    starts.append(len(skeleton))
    return [skeleton[a:b] for a, b in zip(starts, starts[1:])]


def syllable_count(token: Token) -> int:
    """Number of syllables in a token (vowel-less tokens count 1 residue)."""
    return len(syllabify(token.skeleton))
