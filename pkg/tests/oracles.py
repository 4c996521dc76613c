"""Brute-force reference implementations used as test oracles.

None of these touch composition or path search from the package; they
work on the raw arc lists, the grammar data or the dictionary directly.
"""

import math
import random
from functools import lru_cache

from subwordfst.fst import SymbolTable, Wfst

# -- transducers -----------------------------------------------------------


def relation(g):
    """{(input ids, output ids): max weight} over every accepting path of an acyclic graph."""
    out = {}

    def walk(q, ins, outs, w, depth):
        assert depth <= 200, "cyclic graph given to oracle"
        if q in g.finals:
            key = (ins, outs)
            total = w + g.finals[q]
            if key not in out or total > out[key]:
                out[key] = total
        for a in g.arcs:
            if a.src == q:
                walk(
                    a.dst,
                    ins + ((a.ilabel,) if a.ilabel else ()),
                    outs + ((a.olabel,) if a.olabel else ()),
                    w + a.weight,
                    depth + 1,
                )

    if g.start is not None:
        walk(g.start, (), (), 0.0, 0)
    return out


def all_paths(g):
    """Every accepting path as (arcs, weight), by plain recursion."""
    found = []

    def walk(q, arcs, w):
        if q in g.finals:
            found.append((tuple(arcs), w + g.finals[q]))
        for a in g.arcs:
            if a.src == q:
                walk(a.dst, arcs + [a], w + a.weight)

    walk(g.start, [], 0.0)
    return found


def join(ra, rb):
    """Relational composition of two weighted string relations."""
    by_mid = {}
    for (y, z), w in rb.items():
        by_mid.setdefault(y, []).append((z, w))
    out = {}
    for (x, y), wa in ra.items():
        for z, wb in by_mid.get(y, ()):
            key = (x, z)
            if key not in out or wa + wb > out[key]:
                out[key] = wa + wb
    return out


def random_acyclic_fst(rng, syms_in, syms_out, max_states=5, eps_rate=0.25, max_arcs=9):
    n = rng.randint(1, max_states)
    g = Wfst(syms_in, syms_out)
    for _ in range(n):
        g.add_state()
    g.set_start(0)
    ni, no = len(syms_in) - 1, len(syms_out) - 1
    for _ in range(rng.randint(0, max_arcs)):
        i = rng.randrange(n)
        j = rng.randrange(n)
        if i == j:
            continue
        i, j = min(i, j), max(i, j)
        il = 0 if rng.random() < eps_rate else rng.randint(1, ni)
        ol = 0 if rng.random() < eps_rate else rng.randint(1, no)
        g.add_arc(i, j, il, ol, math.log10(rng.uniform(0.05, 1.0)))
    for s in range(n):
        if s == n - 1 or rng.random() < 0.3:
            g.set_final(s, math.log10(rng.uniform(0.1, 1.0)))
    return g


def alphabet(k, kind="character"):
    return SymbolTable(kind, [chr(ord("a") + i) for i in range(k)])


# -- grammars --------------------------------------------------------------


def category_sequences(cat):
    """Set of subword tuples one pass through a category can emit."""
    stages = cat.stages
    n = len(stages)
    succ = {}
    for i, j in cat.skips:
        succ.setdefault(i, []).append(j)
    out = set()

    def walk(node, acc):
        if node == n:
            out.add(tuple(acc))
            return
        for s in stages[node]:
            walk(node + 1, acc + [s])
        for j in succ.get(node, ()):
            walk(j, acc)

    walk(0, [])
    out.discard(())
    return out


def single_pass_table(spec):
    """concatenated string -> set of subword tuples, over all categories."""
    table = {}
    for cat in spec.categories:
        for seq in category_sequences(cat):
            table.setdefault("".join(seq), set()).add(seq)
    return table


def grammar_parses(word, table):
    """All subword sequences for ``word`` as one or more category passes."""
    pieces = sorted(table)

    @lru_cache(maxsize=None)
    def from_(pos):
        if pos == len(word):
            return frozenset({()})
        res = set()
        for p in pieces:
            if word.startswith(p, pos):
                for rest in from_(pos + len(p)):
                    for seq in table[p]:
                        res.add(seq + rest)
        return frozenset(res)

    return set(from_(0)) if word else set()


def positional(texts):
    if len(texts) == 1:
        return [texts[0]]
    return [texts[0] + "+"] + ["+" + t + "+" for t in texts[1:-1]] + ["+" + texts[-1]]


def oracle_grammar_segment(word, table):
    """Rendered segments by fewest subwords then string order, or None."""
    parses = grammar_parses(word, table)
    if not parses:
        return None
    best = min(parses, key=lambda seq: (len(seq), seq))
    return positional(list(best))


# -- fallback criteria -------------------------------------------------------


def tilings(word, entries, chars, delta):
    """Every (labels, weight) tiling of word by dictionary texts and characters."""
    options = []
    for token, phi in entries.items():
        options.append((token.strip("+"), token, math.log10(phi)))
    for c in chars:
        options.append((c, c, math.log10(delta)))
    out = []

    def walk(pos, labels, w):
        if pos == len(word):
            out.append((tuple(labels), w))
            return
        for text, label, lw in options:
            if word.startswith(text, pos):
                walk(pos + len(text), labels + [label], w + lw)

    walk(0, [], 0.0)
    return out


def criteria_select(word, entries, chars, delta, strict_edges=False):
    """Apply merging, the interior-infix filter, max weight and whole-word
    fall-through literally.  Returns (rendered segments, source)."""
    candidates = []
    for labels, w in tilings(word, entries, chars, delta):
        # Criterion 1
        chunks = []
        for lab in labels:
            bare = len(lab) == 1 and lab != "+"
            if bare and chunks and chunks[-1][1] is None:
                chunks[-1] = (chunks[-1][0] + lab, None)
            elif bare:
                chunks.append((lab, None))
            else:
                chunks.append((lab.strip("+"), lab))
        # Criterion 2
        ok = True
        for text, lab in chunks[1:-1]:
            if len(text) > 1 and not (lab is not None and lab.startswith("+") and lab.endswith("+")):
                ok = False
        if strict_edges and len(chunks) > 1:
            f, l = chunks[0][1], chunks[-1][1]
            if f is not None and not (f.endswith("+") and not f.startswith("+")):
                ok = False
            if l is not None and not (l.startswith("+") and not l.endswith("+")):
                ok = False
        if ok:
            candidates.append((labels, w, chunks))
    if not candidates:
        return [word], "whole_word"
    # Criterion 3: max weight; ties by label string order (all paths have len(word) arcs)
    best = min(candidates, key=lambda c: (-c[1], c[0]))
    if len(best[2]) == 1 and best[2][0][1] is None:
        return [word], "whole_word"
    return positional([t for t, _ in best[2]]), "fallback"


def random_fallback_case(r, letters="abc"):
    """(entries, characters, word): up to 8 marked subwords, a word of at most 10 characters."""
    entries = {}
    for _ in range(r.randint(0, 8)):
        text = "".join(r.choice(letters) for _ in range(r.randint(1, 3)))
        form = r.choice(["{}+", "+{}+", "+{}", "{}"]).format(text)
        entries[form] = r.uniform(0.01, 1.0)
    total = math.fsum(entries.values())
    entries = {k: v / total for k, v in sorted(entries.items())}
    texts = [t.strip("+") for t in entries] or ["a"]
    word = ""
    while len(word) < r.randint(1, 10):
        word += r.choice(texts) if r.random() < 0.7 else r.choice(letters)
    return entries, set(letters), word[:10]


# -- metrics -----------------------------------------------------------------


def edit_distance(ref, hyp):
    ref, hyp = tuple(ref), tuple(hyp)

    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            d(i - 1, j - 1) + (ref[i - 1] != hyp[j - 1]),
            d(i - 1, j) + 1,
            d(i, j - 1) + 1,
        )

    return d(len(ref), len(hyp))


def random_grammar_doc(rng, letters="abcdef", max_categories=3, max_subwords=5, max_stages=3):
    names = ["past_verb", "present_future_verb", "noun", "pronoun", "number"]
    rng.shuffle(names)
    cats = []
    for name in names[: rng.randint(1, max_categories)]:
        n_stages = rng.randint(1, max_stages)

        def group():
            k = rng.randint(1, max_subwords)
            words = set()
            while len(words) < k:
                words.add("".join(rng.choice(letters) for _ in range(rng.randint(1, 3))))
            return sorted(words)

        stages = [group() for _ in range(n_stages)]
        n_inf = rng.randint(0, n_stages - 1)
        skips = set()
        for _ in range(rng.randint(0, 3)):
            i = rng.randint(0, n_stages - 1)
            j = rng.randint(i + 1, n_stages)
            skips.add((i, j))
        if (0, n_stages) in skips or _all_skippable(n_stages, skips):
            skips = {p for p in skips if p[0] != 0}
        cats.append(
            {
                "name": name,
                "prefixes": stages[0],
                "infix_groups": stages[1 : 1 + n_inf],
                "suffix_groups": stages[1 + n_inf :],
                "skips": sorted(list(p) for p in skips),
            }
        )
    return {"language": "xx", "categories": cats}


def _all_skippable(n, skips):
    reach, stack = {0}, [0]
    while stack:
        i = stack.pop()
        for a, b in skips:
            if a == i and b not in reach:
                reach.add(b)
                stack.append(b)
    return n in reach


def rng(seed):
    return random.Random(seed)
