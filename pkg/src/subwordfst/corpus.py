"""Corpus ingestion, corpus-wide segmentation and marker post-processing."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .fallback import SubwordDict, select_segmentation
from .fst import TooManyPaths, Wfst
from .grammar import MARKER, InvalidWord, check_word, nfc
from .segmenter import DEFAULT_MAX_PATHS, Segmentation, segment_word, whole_word

log = logging.getLogger(__name__)


@dataclass
class Corpus:
    utterances: list[list[str]]

    @property
    def token_count(self) -> int:
        return sum(len(u) for u in self.utterances)

    @property
    def vocabulary(self) -> Counter:
        return Counter(t for u in self.utterances for t in u)

    def tokens(self) -> Iterable[str]:
        for u in self.utterances:
            yield from u

    def to_text(self) -> str:
        return "".join(" ".join(u) + "\n" for u in self.utterances)

    def __len__(self):
        return len(self.utterances)


def read_corpus(lines: Iterable[str] | str, allow_markers: bool = False) -> Corpus:
    """One utterance per line, NFC-normalized; blank lines stay as empty utterances."""
    if isinstance(lines, str):
        lines = lines.splitlines()
    utts = []
    for lineno, line in enumerate(lines, 1):
        tokens = nfc(line).split()
        if not allow_markers:
            for t in tokens:
                if MARKER in t:
                    raise ValueError(f"line {lineno}: token {t!r} contains the reserved marker '+'")
        utts.append(tokens)
    return Corpus(utts)


def extract_vocab(corpus: Corpus) -> list[tuple[str, int]]:
    counts = corpus.vocabulary
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


class Diagnostic(NamedTuple):
    utterance: int
    index: int
    word: str
    message: str


def segment_token(
    word: str,
    sg: Wfst | None,
    u: Wfst | None = None,
    d: SubwordDict | None = None,
    max_paths: int = DEFAULT_MAX_PATHS,
    strict_edges: bool = False,
) -> Segmentation:
    """Grammar first, then the fallback graph, then the whole word."""
    check_word(word)
    if sg is not None:
        try:
            seg = segment_word(word, sg, max_paths)
        except InvalidWord:
            seg = None  # characters outside the grammar; the fallback may still cope
        if seg is not None:
            return seg
    if u is not None:
        return select_segmentation(word, u, d, max_paths, strict_edges)
    return whole_word(word)


def segment_corpus(
    corpus: Corpus,
    sg: Wfst | None,
    u: Wfst | None = None,
    d: SubwordDict | None = None,
    max_paths: int = DEFAULT_MAX_PATHS,
    strict_edges: bool = False,
    cache: dict | None = None,
) -> tuple[Corpus, list[Diagnostic], dict[str, Segmentation]]:
    """Replace each word by its rendered marked subwords.

    Returns the segmented corpus, per-token diagnostics and the per-word
    segmentations used.  A word whose path enumeration overflows
    ``max_paths`` is kept whole and reported.
    """
    cache = {} if cache is None else cache
    out = []
    diags = []
    for i, utt in enumerate(corpus.utterances):
        row = []
        for j, word in enumerate(utt):
            seg = cache.get(word)
            if seg is None:
                try:
                    seg = segment_token(word, sg, u, d, max_paths, strict_edges)
                except TooManyPaths as e:
                    diags.append(Diagnostic(i, j, word, str(e)))
                    seg = whole_word(word)
                except InvalidWord as e:
                    diags.append(Diagnostic(i, j, word, str(e)))
                    row.append(word)
                    continue
                cache[word] = seg
            row.extend(seg.rendered())
        out.append(row)
    return Corpus(out), diags, cache


class MarkerIssue(NamedTuple):
    position: int
    message: str


def marker_issues(tokens: list[str]) -> list[MarkerIssue]:
    """Dangling or mismatched context markers in a subword sequence."""
    issues = []
    if tokens and tokens[0].startswith(MARKER):
        issues.append(MarkerIssue(0, f"sequence starts with suffix-marked {tokens[0]!r}"))
    if tokens and tokens[-1].endswith(MARKER):
        issues.append(MarkerIssue(len(tokens) - 1, f"sequence ends with prefix-marked {tokens[-1]!r}"))
    for k in range(len(tokens) - 1):
        left = tokens[k].endswith(MARKER)
        right = tokens[k + 1].startswith(MARKER)
        if left != right:
            issues.append(MarkerIssue(k, f"marker mismatch between {tokens[k]!r} and {tokens[k + 1]!r}"))
    return issues


def postprocess(tokens: list[str]) -> list[str]:
    """Glue subwords marked on both sides of a boundary, then drop markers.

    Malformed marker sequences are not fatal; see :func:`marker_issues`.
    """
    words: list[str] = []
    current = None
    for t in tokens:
        if current is not None and current.endswith(MARKER) and t.startswith(MARKER):
            current += t
            continue
        if current is not None:
            words.append(current)
        current = t
    if current is not None:
        words.append(current)
    out = []
    for w in words:
        w = w.replace(MARKER, "")
        if w:
            out.append(w)
    return out


def postprocess_corpus(corpus: Corpus) -> tuple[Corpus, list[tuple[int, MarkerIssue]]]:
    flagged = []
    utts = []
    for i, u in enumerate(corpus.utterances):
        for issue in marker_issues(u):
            flagged.append((i, issue))
        utts.append(postprocess(u))
    return Corpus(utts), flagged
