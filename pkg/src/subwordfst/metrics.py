"""OOV rate and word error rate."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence


@dataclass
class MetricsReport:
    wer: float = 0.0
    sub: int = 0
    ins: int = 0
    dele: int = 0
    ref_tokens: int = 0
    oov_rate: float | None = None

    @property
    def errors(self) -> int:
        return self.sub + self.ins + self.dele

    def to_json(self) -> str:
        d = asdict(self)
        d["del"] = d.pop("dele")
        keys = ["oov_rate", "wer", "sub", "ins", "del", "ref_tokens"]
        return json.dumps({k: d[k] for k in keys}, sort_keys=False)


def oov_rate(train_vocab: Iterable[str], test_tokens: Iterable[str], types: bool = False) -> float:
    """Fraction of test words never seen in training.

    Counts every occurrence by default; ``types=True`` counts distinct
    test words instead.
    """
    vocab = set(train_vocab)
    tokens = list(test_tokens)
    if types:
        tokens = sorted(set(tokens))
    if not tokens:
        raise ValueError("empty test corpus")
    missing = sum(1 for t in tokens if t not in vocab)
    return missing / len(tokens)


def align(ref: Sequence[str], hyp: Sequence[str]) -> tuple[int, int, int]:
    """Minimum edit alignment; returns (substitutions, insertions, deletions).

    Among optimal alignments the backtrace prefers a match or substitution,
    then a deletion, then an insertion.
    """
    n, m = len(ref), len(hyp)
    cost = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        cost[i][0] = i
    for j in range(1, m + 1):
        cost[0][j] = j
    for i in range(1, n + 1):
        row, prev = cost[i], cost[i - 1]
        r = ref[i - 1]
        for j in range(1, m + 1):
            row[j] = min(
                prev[j - 1] + (r != hyp[j - 1]),
                prev[j] + 1,
                row[j - 1] + 1,
            )
    s = ins = dele = 0
    i, j = n, m
    while i or j:
        if i and j and cost[i][j] == cost[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]):
            s += ref[i - 1] != hyp[j - 1]
            i, j = i - 1, j - 1
        elif i and cost[i][j] == cost[i - 1][j] + 1:
            dele += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return s, ins, dele


def wer(reference: Sequence[Sequence[str]], hypothesis: Sequence[Sequence[str]]) -> MetricsReport:
    if len(reference) != len(hypothesis):
        raise ValueError(f"{len(reference)} reference utterances but {len(hypothesis)} hypotheses")
    rep = MetricsReport()
    for ref, hyp in zip(reference, hypothesis):
        s, i, d = align(ref, hyp)
        rep.sub += s
        rep.ins += i
        rep.dele += d
        rep.ref_tokens += len(ref)
    if rep.ref_tokens:
        rep.wer = rep.errors / rep.ref_tokens
    elif rep.errors:
        rep.wer = float("inf")
    return rep
