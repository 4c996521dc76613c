"""Declarative subword grammars and their compilation to transducers.

A category is a cascade of stages: stage 0 holds root prefixes, then the
infix groups, then the suffix groups.  Boundary node ``k`` sits in front
of stage ``k``; a skip ``(i, j)`` is an epsilon arc from node ``i`` to
node ``j`` that bypasses stages ``i .. j-1``.  Node ``N`` (the number of
stages) is the category exit.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from typing import Mapping

from .fst import ONE, SymbolTable, Wfst, connect

MARKER = "+"

CATEGORY_NAMES = (
    "past_verb",
    "present_future_verb",
    "noun",
    "pronoun",
    "number",
    "independent",
)


class GrammarError(ValueError):
    pass


class InvalidWord(ValueError):
    pass


class UnknownCharacter(InvalidWord):
    pass


def nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def check_subword(s: str, where: str = "subword") -> None:
    if not s:
        raise GrammarError(f"empty {where}")
    if MARKER in s:
        raise GrammarError(f"{where} {s!r} contains the reserved marker '+'")
    if any(ch.isspace() for ch in s):
        raise GrammarError(f"{where} {s!r} contains whitespace")


def check_word(word: str) -> None:
    if not word:
        raise InvalidWord("empty word")
    if MARKER in word:
        raise InvalidWord(f"word {word!r} contains the reserved marker '+'")
    if any(ch.isspace() for ch in word):
        raise InvalidWord(f"word {word!r} contains whitespace")


def _epsilon_through(n_stages: int, skips) -> bool:
    """True when the exit is reachable from the entry using skips alone."""
    succ: dict[int, list[int]] = {}
    for i, j in skips:
        succ.setdefault(i, []).append(j)
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in succ.get(i, ()):
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return n_stages in seen


@dataclass(frozen=True)
class CategorySpec:
    name: str
    prefixes: tuple[str, ...]
    infix_groups: tuple[tuple[str, ...], ...] = ()
    suffix_groups: tuple[tuple[str, ...], ...] = ()
    skips: frozenset = frozenset()

    @property
    def stages(self) -> tuple[tuple[str, ...], ...]:
        return (self.prefixes,) + self.infix_groups + self.suffix_groups

    def stage_role(self, k: int) -> str:
        if k == 0:
            return "prefix"
        if k <= len(self.infix_groups):
            return "infix"
        return "suffix"

    def validate(self) -> None:
        if self.name not in CATEGORY_NAMES:
            raise GrammarError(f"unknown category {self.name!r}; expected one of {CATEGORY_NAMES}")
        where = f"category {self.name!r}"
        for k, stage in enumerate(self.stages):
            if not stage:
                raise GrammarError(f"{where}: stage {k} is empty")
            seen = set()
            for s in stage:
                check_subword(s, f"{where} subword")
                if s in seen:
                    raise GrammarError(f"{where}: duplicate subword {s!r} in stage {k}")
                seen.add(s)
        n = len(self.stages)
        for pair in self.skips:
            i, j = pair
            if not (0 <= i < j <= n):
                raise GrammarError(f"{where}: skip {list(pair)} out of range for {n} stages")
        if self.name == "independent" and (self.infix_groups or self.suffix_groups or self.skips):
            raise GrammarError("category 'independent' holds singletons only: one stage, no skips")
        if _epsilon_through(n, self.skips):
            raise GrammarError(f"{where}: every stage can be skipped (epsilon-only path)")


@dataclass(frozen=True)
class GrammarSpec:
    categories: tuple[CategorySpec, ...]
    language: str = ""

    def category(self, name: str) -> CategorySpec:
        for c in self.categories:
            if c.name == name:
                return c
        raise KeyError(name)

    def subwords(self) -> list[str]:
        out = set()
        for c in self.categories:
            for stage in c.stages:
                out.update(stage)
        return sorted(out)

    def characters(self) -> list[str]:
        return sorted({ch for s in self.subwords() for ch in s})

    def provenance(self) -> dict[str, set[str]]:
        """subword text -> names of the categories using it."""
        prov: dict[str, set[str]] = {}
        for c in self.categories:
            for stage in c.stages:
                for s in stage:
                    prov.setdefault(s, set()).add(c.name)
        return prov


def _string_list(obj, where) -> tuple[str, ...]:
    if not isinstance(obj, list) or not all(isinstance(s, str) for s in obj):
        raise GrammarError(f"{where}: expected a list of strings")
    return tuple(nfc(s) for s in obj)


def _groups(obj, where) -> tuple[tuple[str, ...], ...]:
    if obj is None:
        return ()
    if not isinstance(obj, list):
        raise GrammarError(f"{where}: expected a list of lists")
    return tuple(_string_list(g, f"{where}[{k}]") for k, g in enumerate(obj))


def grammar_from_dict(doc: Mapping) -> GrammarSpec:
    if not isinstance(doc, Mapping):
        raise GrammarError("grammar document must be a JSON object")
    unknown = set(doc) - {"language", "categories"}
    if unknown:
        raise GrammarError(f"unknown top-level keys {sorted(unknown)}")
    cats_doc = doc.get("categories")
    if not isinstance(cats_doc, list) or not cats_doc:
        raise GrammarError("'categories' must be a non-empty list")
    cats = []
    names = set()
    for n, cd in enumerate(cats_doc):
        if not isinstance(cd, Mapping):
            raise GrammarError(f"categories[{n}] must be an object")
        bad = set(cd) - {"name", "prefixes", "infix_groups", "suffix_groups", "skips"}
        if bad:
            raise GrammarError(f"categories[{n}]: unknown keys {sorted(bad)}")
        name = cd.get("name")
        if not isinstance(name, str):
            raise GrammarError(f"categories[{n}]: missing 'name'")
        if name in names:
            raise GrammarError(f"duplicate category {name!r}")
        names.add(name)
        where = f"category {name!r}"
        if "prefixes" not in cd:
            raise GrammarError(f"{where}: missing 'prefixes'")
        prefixes = _string_list(cd["prefixes"], f"{where} prefixes")
        infixes = _groups(cd.get("infix_groups"), f"{where} infix_groups")
        suffixes = _groups(cd.get("suffix_groups"), f"{where} suffix_groups")
        n_stages = 1 + len(infixes) + len(suffixes)
        if "skips" in cd:
            raw = cd["skips"]
            if not isinstance(raw, list) or not all(
                isinstance(p, list) and len(p) == 2 and all(isinstance(x, int) for x in p) for p in raw
            ):
                raise GrammarError(f"{where}: 'skips' must be a list of [from, to] integer pairs")
            skips = frozenset(tuple(p) for p in raw)
        else:
            # infix and suffix stages are optional unless the grammar lists skips
            skips = frozenset((k, k + 1) for k in range(1, n_stages))
        cat = CategorySpec(name, prefixes, infixes, suffixes, skips)
        cat.validate()
        cats.append(cat)
    language = doc.get("language", "")
    if not isinstance(language, str):
        raise GrammarError("'language' must be a string")
    return GrammarSpec(tuple(cats), language)


def parse_grammar(text: str) -> GrammarSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise GrammarError(f"line {e.lineno}: invalid JSON: {e.msg}") from None
    return grammar_from_dict(doc)


def grammar_to_dict(spec: GrammarSpec) -> dict:
    return {
        "language": spec.language,
        "categories": [
            {
                "name": c.name,
                "prefixes": list(c.prefixes),
                "infix_groups": [list(g) for g in c.infix_groups],
                "suffix_groups": [list(g) for g in c.suffix_groups],
                "skips": sorted(list(p) for p in c.skips),
            }
            for c in spec.categories
        ],
    }


def character_table(chars) -> SymbolTable:
    return SymbolTable("character", sorted(set(chars)))


def subword_table(spec: GrammarSpec) -> SymbolTable:
    # sorted so that label-id order agrees with string order
    return SymbolTable("subword", spec.subwords())


def _add_chain(g: Wfst, src: int, dst: int, ilabels: list[int], olabel: int) -> None:
    q = src
    for k, il in enumerate(ilabels):
        last = k == len(ilabels) - 1
        nxt = dst if last else g.add_state()
        g.add_arc(q, nxt, il, olabel if last else 0, ONE)
        q = nxt


def _char_labels(s: str, charset: SymbolTable) -> list[int]:
    try:
        return [charset.find(ch) for ch in s]
    except KeyError:
        missing = sorted({ch for ch in s if ch not in charset})
        raise UnknownCharacter(f"{s!r}: characters {missing} not in character table") from None


def build_sg_wfst(spec: GrammarSpec, charset: SymbolTable | None = None) -> Wfst:
    """Subword-grammar transducer: characters in, grammar subwords out.

    State 0 is the loop state (start and only final).  Each category hangs
    off it through an entry and an exit epsilon arc and shares no states
    with other categories.
    """
    if charset is None:
        charset = character_table(spec.characters())
    osyms = subword_table(spec)
    g = Wfst(charset, osyms)
    loop = g.add_state()
    g.set_start(loop)
    g.set_final(loop, ONE)
    for cat in spec.categories:
        stages = cat.stages
        nodes = [g.add_state() for _ in range(len(stages) + 1)]
        g.add_arc(loop, nodes[0], 0, 0)
        for k, stage in enumerate(stages):
            for s in stage:
                _add_chain(g, nodes[k], nodes[k + 1], _char_labels(s, charset), osyms.find(s))
        for i, j in sorted(cat.skips):
            g.add_arc(nodes[i], nodes[j], 0, 0)
        g.add_arc(nodes[-1], loop, 0, 0)
    return g


def build_w_wfst(word: str, charset: SymbolTable, wordsyms: SymbolTable | None = None) -> Wfst:
    """Single-path transducer: the word symbol in, its characters out."""
    check_word(word)
    labels = _char_labels(word, charset)
    if wordsyms is None:
        wordsyms = SymbolTable("word")
    w = wordsyms.add(word)
    g = Wfst(wordsyms, charset)
    q = g.add_state()
    g.set_start(q)
    for k, label in enumerate(labels):
        nxt = g.add_state()
        g.add_arc(q, nxt, w if k == 0 else 0, label, ONE)
        q = nxt
    g.set_final(q, ONE)
    return g


# -- pronunciations and the lexicon transducer --------------------------------


def parse_pron_table(text: str) -> dict[str, tuple[str, ...]]:
    """``subword<TAB>phone phone ...`` per line; repeated subwords keep the first."""
    table: dict[str, tuple[str, ...]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[1].split():
            raise GrammarError(f"pronunciation line {lineno}: expected 'subword<TAB>phones'")
        table.setdefault(nfc(parts[0]), tuple(parts[1].split()))
    return table


def phone_table(pron: Mapping[str, tuple[str, ...]]) -> SymbolTable:
    return SymbolTable("phone", sorted({p for phones in pron.values() for p in phones}))


def render(text: str, first: bool, last: bool) -> str:
    return ("" if first else MARKER) + text + ("" if last else MARKER)


def role_of(token: str) -> str:
    left = token.startswith(MARKER)
    right = token.endswith(MARKER) and len(token) > 1
    if left and right:
        return "infix"
    if right:
        return "prefix"
    if left:
        return "suffix"
    return "singleton"


@dataclass
class _LexiconBuilder:
    g: Wfst
    pron: Mapping[str, tuple[str, ...]]
    phones: SymbolTable
    loop: int
    outputs: set = field(default_factory=set)

    def pronounce(self, rendered: str) -> list[int]:
        phones = self.pron.get(rendered)
        if phones is None:
            phones = self.pron.get(rendered.strip(MARKER))
        if not phones:
            raise GrammarError(f"no pronunciation for subword {rendered!r}")
        try:
            return [self.phones.find(p) for p in phones]
        except KeyError as e:
            raise GrammarError(f"subword {rendered!r}: {e.args[0]}") from None

    def chain(self, src: int, dst: int, rendered: str) -> None:
        self.outputs.add(rendered)
        _add_chain(self.g, src, dst, self.pronounce(rendered), self.g.osyms.add(rendered))

    def staged(self, cat: CategorySpec) -> None:
        """Category cascade where every subword carries its positional marker.

        Nodes are doubled on whether a subword has been emitted yet; an arc
        either continues the word (trailing '+') or ends it when the exit is
        reachable by skips alone.
        """
        g = self.g
        stages = cat.stages
        n = len(stages)
        fresh = [g.add_state() for _ in range(n)]
        started = [g.add_state() for _ in range(n)]
        exit_ = g.add_state()
        g.add_arc(self.loop, fresh[0], 0, 0)
        succ: dict[int, set[int]] = {}
        for i, j in cat.skips:
            succ.setdefault(i, set()).add(j)

        def can_finish(k):
            seen, stack = {k}, [k]
            while stack:
                i = stack.pop()
                for j in succ.get(i, ()):
                    if j not in seen:
                        seen.add(j)
                        stack.append(j)
            return n in seen

        for k, stage in enumerate(stages):
            ends = can_finish(k + 1)
            for layer, node in ((False, fresh[k]), (True, started[k])):
                for s in stage:
                    if k + 1 < n:
                        self.chain(node, started[k + 1], render(s, not layer, False))
                    if ends:
                        self.chain(node, exit_, render(s, not layer, True))
        for i, j in sorted(cat.skips):
            if j < n:
                g.add_arc(fresh[i], fresh[j], 0, 0)
                g.add_arc(started[i], started[j], 0, 0)
        g.add_arc(exit_, self.loop, 0, 0)

    def by_role(self, tokens: list[str]) -> None:
        """prefix (infix)* suffix | singleton, using dictionary renderings."""
        g = self.g
        groups = {"prefix": [], "infix": [], "suffix": [], "singleton": []}
        for t in tokens:
            groups[role_of(t)].append(t)
        entry, mid, exit_ = g.add_state(), g.add_state(), g.add_state()
        g.add_arc(self.loop, entry, 0, 0)
        for t in groups["prefix"]:
            self.chain(entry, mid, t)
        for t in groups["infix"]:
            self.chain(mid, mid, t)
        for t in groups["suffix"]:
            self.chain(mid, exit_, t)
        for t in groups["singleton"]:
            self.chain(entry, exit_, t)
        g.add_arc(exit_, self.loop, 0, 0)


def build_lexicon_wfst(dictionary, pron, phones: SymbolTable | None = None, spec: GrammarSpec | None = None) -> Wfst:
    """Phones in, context-marked subwords out, on the grammar's loop template.

    With ``spec``, each grammar category becomes a staged cascade whose
    outputs carry positional markers.  Dictionary categories the grammar does
    not cover (independent words, fallback pieces) get a role-driven
    subgraph built from their rendered entries.  Without ``spec`` every
    dictionary category is role-driven.
    """
    if phones is None:
        phones = phone_table(pron)
    entries = dictionary.entries if hasattr(dictionary, "entries") else dictionary
    for token in entries:
        if token not in pron and token.strip(MARKER) not in pron:
            raise GrammarError(f"no pronunciation for subword {token!r}")
    g = Wfst(phones, SymbolTable("subword"))
    loop = g.add_state()
    g.set_start(loop)
    g.set_final(loop, ONE)
    b = _LexiconBuilder(g, pron, phones, loop)
    covered = set()
    if spec is not None:
        for cat in spec.categories:
            b.staged(cat)
            covered.add(cat.name)
    by_cat: dict[str, list[str]] = {}
    for token in entries:
        cats = dictionary.categories.get(token) if hasattr(dictionary, "categories") else None
        for name in sorted(cats or {"independent"}):
            if name not in covered:
                by_cat.setdefault(name, []).append(token)
    for name in sorted(by_cat, key=lambda n: (n == "independent", n)):
        b.by_role(sorted(by_cat[name]))
    # node layers no arc enters (e.g. the started copy of stage 0) are dropped
    return connect(g)
