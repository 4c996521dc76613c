"""Grammar segmentation of words and context-marker assignment."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .fst import ONE, TooManyPaths, Wfst, compose, enumerate_paths, output_labels
from .grammar import MARKER, InvalidWord, build_w_wfst, check_word, nfc

log = logging.getLogger(__name__)

ROLES = ("prefix", "infix", "suffix", "singleton")
SOURCES = ("grammar", "fallback", "whole_word")
DEFAULT_MAX_PATHS = 10_000


@dataclass(frozen=True)
class MarkedSubword:
    text: str
    role: str

    def __post_init__(self):
        if not self.text or MARKER in self.text:
            raise ValueError(f"bad subword text {self.text!r}")
        if self.role not in ROLES:
            raise ValueError(f"bad role {self.role!r}")

    def render(self) -> str:
        if self.role == "prefix":
            return self.text + MARKER
        if self.role == "suffix":
            return MARKER + self.text
        if self.role == "infix":
            return MARKER + self.text + MARKER
        return self.text

    __str__ = render

    @classmethod
    def parse(cls, token: str) -> "MarkedSubword":
        left = token.startswith(MARKER)
        right = token.endswith(MARKER)
        text = token[1 if left else 0 : len(token) - 1 if right else len(token)]
        if left and right:
            role = "infix"
        elif right:
            role = "prefix"
        elif left:
            role = "suffix"
        else:
            role = "singleton"
        if not text or MARKER in text:
            raise ValueError(f"malformed marked subword {token!r}")
        return cls(text, role)


@dataclass(frozen=True)
class Segmentation:
    word: str
    segments: tuple[MarkedSubword, ...]
    source: str
    weight: float = ONE

    def __post_init__(self):
        if "".join(s.text for s in self.segments) != self.word:
            raise ValueError(f"segments do not spell {self.word!r}")
        if self.source not in SOURCES:
            raise ValueError(f"bad source {self.source!r}")

    def rendered(self) -> list[str]:
        return [s.render() for s in self.segments]

    def texts(self) -> list[str]:
        return [s.text for s in self.segments]

    def to_tsv(self) -> str:
        return f"{self.word}\t{' '.join(self.rendered())}\t{self.source}"


def mark_segments(subwords: Iterable[str]) -> list[MarkedSubword]:
    subwords = list(subwords)
    if not subwords:
        raise ValueError("cannot mark an empty segment list")
    if len(subwords) == 1:
        return [MarkedSubword(subwords[0], "singleton")]
    last = len(subwords) - 1
    return [
        MarkedSubword(s, "prefix" if k == 0 else "suffix" if k == last else "infix")
        for k, s in enumerate(subwords)
    ]


def parse_segmentation_line(line: str) -> Segmentation:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 3:
        raise ValueError(f"expected 3 tab-separated fields, got {len(parts)}")
    word, segs, source = parts
    tokens = segs.split()
    if not tokens:
        raise ValueError("no segments")
    return Segmentation(nfc(word), tuple(MarkedSubword.parse(nfc(t)) for t in tokens), source)


def _segment_order(path):
    # fewer emitted subwords first; the subword table is sorted so ids
    # order like strings
    ids = path.olabel_ids()
    return (-path.weight, len(ids), ids)


def segment_word(word: str, sg: Wfst, max_paths: int = DEFAULT_MAX_PATHS) -> Segmentation | None:
    """Segment ``word`` through the subword grammar, or None if it does not parse.

    Raises InvalidWord (or its subclass UnknownCharacter) for words the
    grammar's character table cannot spell.
    """
    check_word(word)
    w = build_w_wfst(word, sg.isyms)
    paths = enumerate_paths(compose(w, sg), max_paths)
    paths = [p for p in paths if p.olabel_ids()]
    if not paths:
        return None
    paths.sort(key=_segment_order)
    best = paths[0]
    if len(paths) > 1:
        log.debug("%s: %d grammar parses, chose %s", word, len(paths), output_labels(best))
    return Segmentation(word, tuple(mark_segments(output_labels(best))), "grammar", ONE)


class VocabularySegmentation(NamedTuple):
    segmented: list[Segmentation]
    unsegmented: list[str]
    errors: list[tuple[int, str, str]]


def segment_vocabulary(vocab: Iterable[str], sg: Wfst, max_paths: int = DEFAULT_MAX_PATHS) -> VocabularySegmentation:
    """Split a vocabulary into grammar-segmented words and the rest.

    Malformed words, words spelled with characters outside the grammar and
    repeated entries are reported in ``errors`` as ``(index, word, reason)``.
    Words with unknown characters still go to ``unsegmented`` so the
    fallback can see them.
    """
    segmented, unsegmented, errors = [], [], []
    seen = set()
    for k, word in enumerate(vocab):
        if word in seen:
            errors.append((k, word, "duplicate word"))
            continue
        seen.add(word)
        try:
            seg = segment_word(word, sg, max_paths)
        except InvalidWord as e:
            errors.append((k, word, str(e)))
            if word and MARKER not in word and not any(ch.isspace() for ch in word):
                unsegmented.append(word)
            continue
        except TooManyPaths as e:
            errors.append((k, word, str(e)))
            unsegmented.append(word)
            continue
        if seg is None:
            unsegmented.append(word)
        else:
            segmented.append(seg)
    return VocabularySegmentation(segmented, unsegmented, errors)


def whole_word(word: str) -> Segmentation:
    check_word(word)
    return Segmentation(word, (MarkedSubword(word, "singleton"),), "whole_word", ONE)

