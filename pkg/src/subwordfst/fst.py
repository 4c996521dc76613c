"""Weighted finite-state transducers over the (max, +) log10 semiring.

Weights are base-10 log probabilities.  Alternatives combine with ``max``
and path weights accumulate with ``+``; ``IMPOSSIBLE`` (-inf) is the
additive identity and 0.0 the multiplicative one.
"""

from __future__ import annotations

import io
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple

EPSILON = "<eps>"
IMPOSSIBLE = float("-inf")
ONE = 0.0


def plus(a: float, b: float) -> float:
    return a if a >= b else b


def times(a: float, b: float) -> float:
    if a == IMPOSSIBLE or b == IMPOSSIBLE:
        return IMPOSSIBLE
    return a + b


class FstError(Exception):
    pass


class SymbolTableMismatch(FstError):
    pass


class EpsilonCycleError(FstError):
    pass


class CycleError(FstError):
    pass


class NoPathError(FstError):
    pass


class TooManyPaths(FstError):
    """Raised when enumeration passes ``max_paths``; carries the partial list."""

    def __init__(self, paths, max_paths):
        super().__init__(f"more than {max_paths} accepting paths")
        self.paths = paths
        self.truncated = True
        self.max_paths = max_paths


class SymbolTable:
    """Bijection between symbol strings and integer labels; ``<eps>`` is 0."""

    KINDS = ("character", "subword", "phone", "word")

    def __init__(self, kind: str = "character", symbols: Iterable[str] = ()):
        if kind not in self.KINDS:
            raise ValueError(f"unknown symbol table kind {kind!r}")
        self.kind = kind
        self._ids = {EPSILON: 0}
        self._syms = [EPSILON]
        for s in symbols:
            self.add(s)

    def add(self, symbol: str) -> int:
        i = self._ids.get(symbol)
        if i is None:
            i = len(self._syms)
            self._ids[symbol] = i
            self._syms.append(symbol)
        return i

    def find(self, symbol: str) -> int:
        try:
            return self._ids[symbol]
        except KeyError:
            raise KeyError(f"symbol {symbol!r} not in {self.kind} table") from None

    def symbol(self, label: int) -> str:
        if not 0 <= label < len(self._syms):
            raise KeyError(f"label {label} not in {self.kind} table")
        return self._syms[label]

    def __contains__(self, symbol) -> bool:
        return symbol in self._ids

    def __len__(self) -> int:
        return len(self._syms)

    def __iter__(self) -> Iterator[tuple[str, int]]:
        return iter((s, i) for i, s in enumerate(self._syms))

    def symbols(self) -> list[str]:
        """Non-epsilon symbols in id order."""
        return self._syms[1:]

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, SymbolTable):
            return NotImplemented
        return self._syms == other._syms

    def __hash__(self):
        return id(self)

    def __repr__(self):
        return f"SymbolTable({self.kind!r}, {len(self._syms) - 1} symbols)"

    def copy(self) -> "SymbolTable":
        return SymbolTable(self.kind, self._syms[1:])

    def to_text(self) -> str:
        return "".join(f"{s}\t{i}\n" for i, s in enumerate(self._syms))

    @classmethod
    def from_text(cls, text: str, kind: str = "character") -> "SymbolTable":
        pairs = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                sym, i = line.rsplit("\t", 1)
                pairs.append((int(i), sym))
            except ValueError:
                raise FstError(f"line {lineno}: expected 'symbol<TAB>id'") from None
        pairs.sort()
        if not pairs or pairs[0] != (0, EPSILON):
            raise FstError("symbol table must map <eps> to 0")
        if [i for i, _ in pairs] != list(range(len(pairs))):
            raise FstError("symbol ids must be dense and unique")
        table = cls(kind)
        for i, sym in pairs[1:]:
            if sym in table:
                raise FstError(f"duplicate symbol {sym!r}")
            table.add(sym)
        return table


class Arc(NamedTuple):
    src: int
    dst: int
    ilabel: int
    olabel: int
    weight: float = ONE


class Wfst:
    """Mutable during construction; treat as read-only once built."""

    def __init__(self, isyms: SymbolTable, osyms: SymbolTable | None = None):
        self.isyms = isyms
        self.osyms = osyms if osyms is not None else isyms
        self.num_states = 0
        self.start: int | None = None
        self.finals: dict[int, float] = {}
        self.arcs: list[Arc] = []
        self._out: dict[int, list[Arc]] = {}
        self._by_ilabel: dict[int, dict[int, list[Arc]]] | None = None

    def add_state(self) -> int:
        s = self.num_states
        self.num_states += 1
        return s

    def set_start(self, state: int) -> None:
        self.start = state

    def set_final(self, state: int, weight: float = ONE) -> None:
        self.finals[state] = weight

    def add_arc(self, src, dst, ilabel, olabel, weight=ONE) -> Arc:
        if isinstance(ilabel, str):
            ilabel = self.isyms.find(ilabel)
        if isinstance(olabel, str):
            olabel = self.osyms.find(olabel)
        arc = Arc(src, dst, ilabel, olabel, float(weight))
        self.arcs.append(arc)
        self._out.setdefault(src, []).append(arc)
        self._by_ilabel = None
        return arc

    def arcs_from(self, state: int) -> list[Arc]:
        return self._out.get(state, [])

    def arcs_with_ilabel(self, state: int, ilabel: int) -> list[Arc]:
        if self._by_ilabel is None:
            index: dict[int, dict[int, list[Arc]]] = {}
            for arc in self.arcs:
                index.setdefault(arc.src, {}).setdefault(arc.ilabel, []).append(arc)
            self._by_ilabel = index
        return self._by_ilabel.get(state, {}).get(ilabel, [])

    def is_final(self, state: int) -> bool:
        return state in self.finals

    def __repr__(self):
        return f"Wfst({self.num_states} states, {len(self.arcs)} arcs, {len(self.finals)} final)"


def add_state(g: Wfst) -> int:
    return g.add_state()


@dataclass(frozen=True)
class Path:
    arcs: tuple[Arc, ...]
    weight: float
    osyms: SymbolTable = field(compare=False, repr=False)

    def olabel_ids(self) -> tuple[int, ...]:
        return tuple(a.olabel for a in self.arcs if a.olabel != 0)

    def ilabel_ids(self) -> tuple[int, ...]:
        return tuple(a.ilabel for a in self.arcs if a.ilabel != 0)

    def sort_key(self):
        return (-self.weight, len(self.arcs), self.olabel_ids())


def output_labels(p: Path) -> list[str]:
    return [p.osyms.symbol(label) for label in p.olabel_ids()]


def identity(syms: SymbolTable) -> Wfst:
    """One-state acceptor looping over every non-epsilon symbol."""
    g = Wfst(syms, syms)
    s = g.add_state()
    g.set_start(s)
    g.set_final(s)
    for _, i in syms:
        if i:
            g.add_arc(s, s, i, i)
    return g


def linear_acceptor(symbols: Iterable[str], syms: SymbolTable) -> Wfst:
    g = Wfst(syms, syms)
    s = g.add_state()
    g.set_start(s)
    for sym in symbols:
        t = g.add_state()
        label = syms.find(sym)
        g.add_arc(s, t, label, label)
        s = t
    g.set_final(s)
    return g


# -- graph analysis ---------------------------------------------------------


def _strongly_connected(nodes, succ) -> list[list[int]]:
    """Iterative Tarjan; returns components in reverse topological order."""
    index = {}
    low = {}
    on_stack = set()
    stack = []
    comps = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    return comps


def _cyclic_states(g: Wfst, states, arc_filter=None) -> list[int]:
    def succ(q):
        return [a.dst for a in g.arcs_from(q) if arc_filter is None or arc_filter(a)]

    found = []
    for comp in _strongly_connected(states, succ):
        if len(comp) > 1 or comp[0] in succ(comp[0]):
            found.extend(comp)
    return sorted(found)


def reachable(g: Wfst) -> set[int]:
    if g.start is None:
        return set()
    seen = {g.start}
    queue = deque([g.start])
    while queue:
        q = queue.popleft()
        for arc in g.arcs_from(q):
            if arc.dst not in seen:
                seen.add(arc.dst)
                queue.append(arc.dst)
    return seen


def coreachable(g: Wfst) -> set[int]:
    preds: dict[int, list[int]] = {}
    for arc in g.arcs:
        preds.setdefault(arc.dst, []).append(arc.src)
    seen = set(g.finals)
    queue = deque(seen)
    while queue:
        q = queue.popleft()
        for p in preds.get(q, ()):
            if p not in seen:
                seen.add(p)
                queue.append(p)
    return seen


def is_acyclic(g: Wfst) -> bool:
    return not _cyclic_states(g, sorted(reachable(g)))


@dataclass
class ValidationReport:
    missing_start: bool = False
    missing_finals: bool = False
    invalid_finals: list[int] = field(default_factory=list)
    dangling_arcs: list[Arc] = field(default_factory=list)
    unreachable_states: list[int] = field(default_factory=list)
    epsilon_cycles: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (
            self.missing_start
            or self.missing_finals
            or self.invalid_finals
            or self.dangling_arcs
            or self.unreachable_states
            or self.epsilon_cycles
        )

    def findings(self) -> list[str]:
        out = []
        if self.missing_start:
            out.append("missing or invalid start state")
        if self.missing_finals:
            out.append("no final states")
        for s in self.invalid_finals:
            out.append(f"final state {s} does not exist")
        for a in self.dangling_arcs:
            out.append(f"dangling arc {a.src}->{a.dst}")
        if self.unreachable_states:
            out.append(f"{len(self.unreachable_states)} unreachable states: {self.unreachable_states[:10]}")
        if self.epsilon_cycles:
            out.append(f"epsilon-input cycle through states {self.epsilon_cycles[:10]}")
        return out


def validate(g: Wfst) -> ValidationReport:
    report = ValidationReport()
    n = g.num_states
    if g.start is None or not 0 <= g.start < n:
        report.missing_start = True
    if not g.finals:
        report.missing_finals = True
    report.invalid_finals = sorted(s for s in g.finals if not 0 <= s < n)
    report.dangling_arcs = [a for a in g.arcs if not (0 <= a.src < n and 0 <= a.dst < n)]
    if not report.missing_start:
        seen = reachable(g)
        report.unreachable_states = [s for s in range(n) if s not in seen]
    report.epsilon_cycles = _cyclic_states(
        g, range(n), lambda a: a.ilabel == 0 and 0 <= a.dst < n
    )
    return report


# -- composition ------------------------------------------------------------


def connect(g: Wfst) -> Wfst:
    """Copy of ``g`` keeping only states on some start-to-final path, renumbered in order."""
    keep = reachable(g) & coreachable(g)
    out = Wfst(g.isyms, g.osyms)
    if g.start not in keep:
        out.set_start(out.add_state())
        return out
    remap = {}
    for s in range(g.num_states):
        if s in keep:
            remap[s] = out.add_state()
    out.set_start(remap[g.start])
    for s, w in g.finals.items():
        if s in keep:
            out.set_final(remap[s], w)
    for a in g.arcs:
        if a.src in keep and a.dst in keep:
            out.add_arc(remap[a.src], remap[a.dst], a.ilabel, a.olabel, a.weight)
    return out


def compose(a: Wfst, b: Wfst, trim: bool = True) -> Wfst:
    """Compose ``a`` then ``b`` with a sequencing epsilon filter.

    Between two matched labels, a's output-epsilon moves are taken before
    b's input-epsilon moves, so each alignment yields exactly one path.
    """
    if a.osyms != b.isyms:
        raise SymbolTableMismatch("a.osyms and b.isyms differ")
    c = Wfst(a.isyms, b.osyms)
    if a.start is None or b.start is None:
        c.set_start(c.add_state())
        return c
    start = (a.start, b.start, 0)
    index = {start: c.add_state()}
    c.set_start(index[start])
    queue = deque([start])

    def target(key):
        s = index.get(key)
        if s is None:
            s = index[key] = c.add_state()
            queue.append(key)
        return s

    while queue:
        key = queue.popleft()
        qa, qb, filt = key
        src = index[key]
        if qa in a.finals and qb in b.finals:
            c.set_final(src, times(a.finals[qa], b.finals[qb]))
        for arc in a.arcs_from(qa):
            if arc.olabel == 0:
                if filt == 0:
                    c.add_arc(src, target((arc.dst, qb, 0)), arc.ilabel, 0, arc.weight)
                continue
            for brc in b.arcs_with_ilabel(qb, arc.olabel):
                c.add_arc(
                    src,
                    target((arc.dst, brc.dst, 0)),
                    arc.ilabel,
                    brc.olabel,
                    times(arc.weight, brc.weight),
                )
        for brc in b.arcs_with_ilabel(qb, 0):
            c.add_arc(src, target((qa, brc.dst, 1)), 0, brc.olabel, brc.weight)
    if trim:
        c = connect(c)
    cyc = _cyclic_states(c, range(c.num_states), lambda arc: arc.ilabel == 0)
    if cyc:
        raise EpsilonCycleError(f"composition has epsilon-input cycle through {cyc[:10]}")
    return c


# -- path search ------------------------------------------------------------


def _check_acyclic(g: Wfst) -> None:
    cyc = _cyclic_states(g, sorted(reachable(g)))
    if cyc:
        raise CycleError(f"graph is cyclic through states {cyc[:10]}")


def enumerate_paths(g: Wfst, max_paths: int | float = 10_000) -> list[Path]:
    """All accepting paths of an acyclic graph, best first.

    Order: weight descending, then fewer arcs, then the output-label id
    sequence (epsilons dropped) lexicographically.  Raises ``TooManyPaths``
    holding the sorted partial list once more than ``max_paths`` exist.
    """
    if g.start is None:
        return []
    _check_acyclic(g)
    useful = coreachable(g)
    if g.start not in useful:
        return []
    found: list[Path] = []
    stack: list[tuple[int, tuple[Arc, ...], float]] = [(g.start, (), ONE)]
    while stack:
        q, arcs, w = stack.pop()
        if q in g.finals:
            found.append(Path(arcs, times(w, g.finals[q]), g.osyms))
            if len(found) > max_paths:
                found.sort(key=Path.sort_key)
                raise TooManyPaths(found[: int(max_paths)], max_paths)
        for arc in reversed(g.arcs_from(q)):
            if arc.dst in useful:
                stack.append((arc.dst, arcs + (arc,), times(w, arc.weight)))
    found.sort(key=Path.sort_key)
    return found


def best_path(g: Wfst) -> Path:
    """Highest-ranked accepting path of an acyclic graph (same order as
    :func:`enumerate_paths`), found by dynamic programming."""
    if g.start is None:
        raise NoPathError("graph has no start state")
    _check_acyclic(g)
    live = reachable(g)
    order = []
    seen = set()
    # post-order DFS gives successors before predecessors
    for root in [g.start]:
        stack = [(root, iter(g.arcs_from(root)))]
        seen.add(root)
        while stack:
            q, it = stack[-1]
            for arc in it:
                if arc.dst not in seen and arc.dst in live:
                    seen.add(arc.dst)
                    stack.append((arc.dst, iter(g.arcs_from(arc.dst))))
                    break
            else:
                stack.pop()
                order.append(q)
    best: dict[int, tuple] = {}
    for q in order:
        cands = []
        if q in g.finals:
            cands.append(((-g.finals[q], 0, ()), None))
        for arc in g.arcs_from(q):
            sub = best.get(arc.dst)
            if sub is None:
                continue
            (nw, n, seq), _ = sub
            head = (arc.olabel,) if arc.olabel else ()
            cands.append(((nw - arc.weight, n + 1, head + seq), arc))
        if cands:
            best[q] = min(cands, key=lambda c: c[0])
    if g.start not in best:
        raise NoPathError("no accepting path")
    arcs = []
    q = g.start
    while True:
        _, arc = best[q]
        if arc is None:
            break
        arcs.append(arc)
        q = arc.dst
    w = ONE
    for arc in arcs:
        w = times(w, arc.weight)
    return Path(tuple(arcs), times(w, g.finals[q]), g.osyms)


# -- text serialization -----------------------------------------------------


def _fmt_weight(w: float) -> str:
    if w == IMPOSSIBLE:
        return "-inf"
    return repr(float(w))


def _parse_weight(s: str) -> float:
    w = float(s)
    if math.isnan(w) or w == math.inf:
        raise ValueError(f"bad weight {s!r}")
    return w


def write_fst(g: Wfst, stream=None) -> str | None:
    """Tab-separated text: ``#start``, then arc lines, then final lines."""
    buf = io.StringIO() if stream is None else stream
    buf.write(f"#start\t{g.start}\n")
    for a in g.arcs:
        buf.write(
            f"{a.src}\t{a.dst}\t{g.isyms.symbol(a.ilabel)}\t{g.osyms.symbol(a.olabel)}\t{_fmt_weight(a.weight)}\n"
        )
    for s in sorted(g.finals):
        buf.write(f"{s}\t{_fmt_weight(g.finals[s])}\n")
    if stream is None:
        return buf.getvalue()
    return None


def read_fst(text: str, isyms: SymbolTable, osyms: SymbolTable | None = None) -> Wfst:
    g = Wfst(isyms, osyms)
    top = -1
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        fields = line.split("\t")
        try:
            if fields[0] == "#start":
                g.set_start(int(fields[1]))
                top = max(top, g.start)
            elif len(fields) == 5:
                src, dst = int(fields[0]), int(fields[1])
                g.add_arc(src, dst, g.isyms.find(fields[2]), g.osyms.find(fields[3]), _parse_weight(fields[4]))
                top = max(top, src, dst)
            elif len(fields) == 2:
                s = int(fields[0])
                g.set_final(s, _parse_weight(fields[1]))
                top = max(top, s)
            else:
                raise ValueError(f"expected 2 or 5 fields, got {len(fields)}")
        except (ValueError, KeyError, IndexError) as e:
            raise FstError(f"line {lineno}: {e}") from None
    g.num_states = top + 1
    return g
