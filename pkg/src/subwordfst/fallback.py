"""Unigram fallback segmentation for words the grammar cannot parse.

The fallback transducer offers every context-marked dictionary subword at
weight log10(phi) and every single character at log10(delta), all looping
on one state.  Exception words are composed against it and the resulting
paths are merged, filtered and ranked by the selection criteria in
:func:`select_segmentation`.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

from .fst import ONE, SymbolTable, Wfst, compose, enumerate_paths, output_labels
from .grammar import MARKER, InvalidWord, build_w_wfst, check_word, nfc
from .segmenter import DEFAULT_MAX_PATHS, MarkedSubword, Segmentation, mark_segments

log = logging.getLogger(__name__)

DEFAULT_DELTA = 0.0001
SUM_TOLERANCE = 1e-9


class DictionaryError(ValueError):
    pass


@dataclass(frozen=True)
class SubwordDict:
    """Context-marked subword unigrams plus the character floor.

    ``entries`` maps rendered subwords to probabilities; ``categories``
    maps them to the categories they were seen in.
    """

    entries: Mapping[str, float]
    charset: SymbolTable
    delta: float = DEFAULT_DELTA
    categories: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        if not self.delta > 0:
            raise DictionaryError("delta must be positive")
        for token, phi in self.entries.items():
            MarkedSubword.parse(token)
            if not phi > 0:
                raise DictionaryError(f"non-positive probability for {token!r}")
        if self.entries:
            total = math.fsum(self.entries.values())
            if abs(total - 1.0) > SUM_TOLERANCE:
                raise DictionaryError(f"probabilities sum to {total!r}, not 1")

    def __len__(self):
        return len(self.entries)

    def __contains__(self, token):
        return token in self.entries

    def weighted_list(self) -> list[tuple[str, float]]:
        """(label, probability) for every subword and then every character."""
        out = [(s, self.entries[s]) for s in sorted(self.entries)]
        out.extend((c, self.delta) for c in self.charset.symbols())
        return out


def _normalized(counts: Mapping[str, float]) -> dict[str, float]:
    total = math.fsum(counts.values())
    return {s: counts[s] / total for s in sorted(counts)}


def estimate_unigrams(
    tokens: Iterable[str],
    delta: float = DEFAULT_DELTA,
    categories: Mapping[str, Iterable[str]] | None = None,
    extra_chars: Iterable[str] = (),
) -> SubwordDict:
    """Relative frequencies of rendered marked subwords in a segmented stream.

    The character set is every character of every subword text, plus
    ``extra_chars``.
    """
    counts: Counter = Counter()
    for k, token in enumerate(tokens):
        try:
            MarkedSubword.parse(token)
        except ValueError:
            raise DictionaryError(f"token {k}: malformed marked subword {token!r}") from None
        counts[token] += 1
    if not counts:
        raise DictionaryError("empty token stream")
    chars = {ch for t in counts for ch in t.strip(MARKER)} | set(extra_chars)
    cats = {}
    if categories:
        cats = {t: frozenset(categories[t]) for t in counts if t in categories}
    return SubwordDict(_normalized(counts), SymbolTable("character", sorted(chars)), delta, cats)


def build_u_wfst(d: SubwordDict) -> Wfst:
    """Loop-state transducer over the dictionary and the character floor.

    Input labels are characters (``d.charset``); output labels are the
    rendered subwords and bare characters, in a table sorted by string.
    The path weight sits on the last arc of each loop.
    """
    osyms = SymbolTable("subword", sorted(set(d.entries) | set(d.charset.symbols())))
    g = Wfst(d.charset, osyms)
    loop = g.add_state()
    g.set_start(loop)
    g.set_final(loop, ONE)
    for label, p in d.weighted_list():
        text = label.strip(MARKER) if label in d.entries else label
        try:
            ilabels = [d.charset.find(ch) for ch in text]
        except KeyError:
            raise DictionaryError(f"subword {label!r} uses characters outside the character set") from None
        q = loop
        for k, il in enumerate(ilabels):
            last = k == len(ilabels) - 1
            nxt = loop if last else g.add_state()
            g.add_arc(q, nxt, il, osyms.find(label) if last else 0, math.log10(p) if last else ONE)
            q = nxt
    return g


def is_bare_char(symbol: str) -> bool:
    return len(symbol) == 1 and symbol != MARKER


class Chunk(NamedTuple):
    text: str
    rendered: str | None  # None for a merged character run


def merge_singleton_runs(segments: Iterable[str]) -> list[str]:
    """Join each maximal run of bare single characters into one chunk."""
    out: list[str] = []
    run: list[str] = []
    for s in segments:
        if is_bare_char(s):
            run.append(s)
            continue
        if run:
            out.append("".join(run))
            run = []
        out.append(s)
    if run:
        out.append("".join(run))
    return out


def _chunks(symbols: list[str]) -> list[Chunk]:
    chunks: list[Chunk] = []
    run: list[str] = []
    for s in symbols:
        if is_bare_char(s):
            run.append(s)
            continue
        if run:
            chunks.append(Chunk("".join(run), None))
            run = []
        chunks.append(Chunk(s.strip(MARKER), s))
    if run:
        chunks.append(Chunk("".join(run), None))
    return chunks


def passes_filter(chunks: list[Chunk], strict_edges: bool = False) -> bool:
    """Intermediate chunks longer than one character must be infixes.

    With ``strict_edges`` the first chunk must also be a prefix or a
    character run and the last a suffix or a character run.
    """
    n = len(chunks)
    for k in range(1, n - 1):
        c = chunks[k]
        if len(c.text) > 1 and not (
            c.rendered is not None and c.rendered.startswith(MARKER) and c.rendered.endswith(MARKER)
        ):
            return False
    if strict_edges and n > 1:
        first, last = chunks[0], chunks[-1]
        if first.rendered is not None and MarkedSubword.parse(first.rendered).role != "prefix":
            return False
        if last.rendered is not None and MarkedSubword.parse(last.rendered).role != "suffix":
            return False
    return True


def select_segmentation(
    word: str,
    u: Wfst,
    d: SubwordDict | None = None,
    max_paths: int = DEFAULT_MAX_PATHS,
    strict_edges: bool = False,
) -> Segmentation:
    """Pick the fallback segmentation of an exception word.

    Every path of W(word) composed with ``u`` has its single-character
    outputs merged; paths with a long non-infix segment in the interior
    are dropped; the best remaining path (by its unmerged weight, ties as
    in :func:`enumerate_paths`) is re-marked by position.  With no
    survivor, or when the best survivor is one run of bare characters, the
    word becomes a single whole-word unit.  ``d`` is unused
    beyond documenting the dictionary ``u`` was built from.
    """
    check_word(word)
    try:
        w = build_w_wfst(word, u.isyms)
    except InvalidWord:
        # a character the fallback graph has never seen
        return Segmentation(word, (MarkedSubword(word, "singleton"),), "whole_word", ONE)
    paths = enumerate_paths(compose(w, u), max_paths)
    for path in paths:
        chunks = _chunks(output_labels(path))
        if passes_filter(chunks, strict_edges):
            if len(chunks) == 1 and chunks[0].rendered is None:
                # characters only: same unit as the whole word, and it must
                # reach the dictionary like one
                break
            segs = mark_segments(c.text for c in chunks)
            return Segmentation(word, tuple(segs), "fallback", path.weight)
    return Segmentation(word, (MarkedSubword(word, "singleton"),), "whole_word", ONE)


def update_dictionary(d: SubwordDict, whole_words: Iterable[str]) -> SubwordDict:
    """Add whole words as independent singletons and renormalize.

    Each new word is given the smallest existing probability before
    renormalization.  Words already present are skipped with a warning.
    """
    entries = dict(d.entries)
    cats = dict(d.categories)
    floor = min(entries.values()) if entries else 1.0
    chars = set(d.charset.symbols())
    added = False
    for word in whole_words:
        word = nfc(word)
        check_word(word)
        if word in entries:
            log.warning("%r already in the subword dictionary", word)
            continue
        entries[word] = floor
        cats[word] = frozenset({"independent"})
        chars.update(word)
        added = True
    if not added:
        return d
    return SubwordDict(_normalized(entries), SymbolTable("character", sorted(chars)), d.delta, cats)


# -- dictionary TSV -------------------------------------------------------


def dictionary_to_tsv(d: SubwordDict) -> str:
    lines = [f"#delta\t{d.delta!r}", f"#charset\t{''.join(d.charset.symbols())}"]
    for s in sorted(d.entries):
        lines.append(f"{s}\t{d.entries[s]!r}\t{','.join(sorted(d.categories.get(s, ())))}")
    return "\n".join(lines) + "\n"


def dictionary_from_tsv(text: str, delta: float | None = None) -> SubwordDict:
    entries = {}
    cats = {}
    chars: set[str] = set()
    file_delta = None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if parts[0] == "#delta":
            file_delta = float(parts[1])
            continue
        if parts[0] == "#charset":
            chars.update(parts[1] if len(parts) > 1 else "")
            continue
        if len(parts) not in (2, 3):
            raise DictionaryError(f"line {lineno}: expected 'subword<TAB>phi<TAB>categories'")
        token = nfc(parts[0])
        try:
            MarkedSubword.parse(token)
            phi = float(parts[1])
        except ValueError as e:
            raise DictionaryError(f"line {lineno}: {e}") from None
        if token in entries:
            raise DictionaryError(f"line {lineno}: duplicate entry {token!r}")
        entries[token] = phi
        if len(parts) == 3 and parts[2]:
            cats[token] = frozenset(parts[2].split(","))
        chars.update(token.strip(MARKER))
    if delta is None:
        delta = file_delta if file_delta is not None else DEFAULT_DELTA
    return SubwordDict(entries, SymbolTable("character", sorted(chars)), delta, cats)
