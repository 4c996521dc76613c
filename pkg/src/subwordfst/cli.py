"""Command-line pipeline: grammar -> segmentation -> fallback -> corpus -> metrics.

Every stage reads and writes plain UTF-8 files.  Graphs are stored as three
files sharing a prefix: ``PREFIX.fst`` (arcs), ``PREFIX.isyms`` and
``PREFIX.osyms`` (symbol tables).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

from . import __version__
from .corpus import Corpus, postprocess_corpus, read_corpus, segment_corpus, segment_token
from .fallback import (
    DEFAULT_DELTA,
    DictionaryError,
    build_u_wfst,
    dictionary_from_tsv,
    dictionary_to_tsv,
    estimate_unigrams,
    update_dictionary,
)
from .fst import FstError, SymbolTable, TooManyPaths, read_fst, validate, write_fst
from .grammar import (
    GrammarError,
    InvalidWord,
    build_lexicon_wfst,
    build_sg_wfst,
    nfc,
    parse_grammar,
    parse_pron_table,
    phone_table,
)
from .metrics import oov_rate, wer
from .segmenter import DEFAULT_MAX_PATHS, parse_segmentation_line, whole_word

log = logging.getLogger("subwordfst")

EXIT_OK = 0
EXIT_IO = 1
EXIT_INPUT = 2


class CliError(Exception):
    def __init__(self, message, status=EXIT_INPUT):
        super().__init__(message)
        self.status = status


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"{path}: {e.strerror}", EXIT_IO) from None


def _write(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise CliError(f"{path}: {e.strerror}", EXIT_IO) from None


def save_graph(g, prefix) -> list[str]:
    paths = [f"{prefix}.fst", f"{prefix}.isyms", f"{prefix}.osyms"]
    _write(paths[0], write_fst(g))
    _write(paths[1], g.isyms.to_text())
    _write(paths[2], g.osyms.to_text())
    return paths


def load_graph(prefix, ikind="character", okind="subword"):
    try:
        isyms = SymbolTable.from_text(_read(f"{prefix}.isyms"), ikind)
        osyms = SymbolTable.from_text(_read(f"{prefix}.osyms"), okind)
        return read_fst(_read(f"{prefix}.fst"), isyms, osyms)
    except FstError as e:
        raise CliError(f"{prefix}: {e}", EXIT_IO) from None


def _locate(text: str, needle: str) -> str:
    """'line N: ' for the first line mentioning needle as a JSON string."""
    quoted = json.dumps(needle, ensure_ascii=False)
    for lineno, line in enumerate(text.splitlines(), 1):
        if quoted in line:
            return f"line {lineno}: "
    return ""


def _grammar_or_die(path):
    text = _read(path)
    try:
        return parse_grammar(text)
    except GrammarError as e:
        msg = str(e)
        anchor = ""
        for token in msg.split("'")[1::2]:
            anchor = _locate(text, token)
            if anchor:
                break
        raise CliError(f"{path}: {anchor}{msg}") from None


def _read_words(path) -> list[str]:
    words = []
    for line in _read(path).splitlines():
        fields = nfc(line).split()
        if fields:
            words.append(fields[0])
    return words


def _load_fallback(path, delta=None):
    if path is None:
        return None, None
    try:
        d = dictionary_from_tsv(_read(path), delta)
    except DictionaryError as e:
        raise CliError(f"{path}: {e}") from None
    return d, build_u_wfst(d)


# -- commands -----------------------------------------------------------------


def cmd_build_grammar(args) -> int:
    spec = _grammar_or_die(args.spec)
    sg = build_sg_wfst(spec)
    report = validate(sg)
    for finding in report.findings():
        print(f"{args.spec}: {finding}", file=sys.stderr)
    if not report.ok:
        return EXIT_INPUT
    written = save_graph(sg, args.out)
    print(
        f"build-grammar: {len(spec.categories)} categories, {len(sg.osyms) - 1} subwords, "
        f"{sg.num_states} states, {len(sg.arcs)} arcs; validation clean; wrote {' '.join(written)}",
        file=sys.stderr,
    )
    return EXIT_OK


def _segment_one(word, sg, u, d, max_paths, strict_edges):
    try:
        return segment_token(word, sg, u, d, max_paths, strict_edges), None
    except TooManyPaths as e:
        return whole_word(word), str(e)
    except InvalidWord as e:
        return None, str(e)


def cmd_segment(args) -> int:
    sg = load_graph(args.sg)
    d, u = _load_fallback(args.fallback, args.delta)
    words = _read_words(args.vocab)
    diags = []
    seen = set()
    unique = []
    for k, w in enumerate(words):
        if w in seen:
            diags.append(f"{k + 1}\t{w}\tduplicate word")
        else:
            seen.add(w)
            unique.append(w)
    work = partial(_segment_one, sg=sg, u=u, d=d, max_paths=args.max_paths, strict_edges=args.strict_edges)
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(work, unique, chunksize=64))
    else:
        results = [work(w) for w in unique]
    counts = Counter({"grammar": 0, "fallback": 0, "whole_word": 0})
    rows = []
    queued = []
    for w, (seg, err) in zip(unique, results):
        if err:
            diags.append(f"-\t{w}\t{err}")
        if seg is None:
            continue
        counts[seg.source] += 1
        rows.append(seg.to_tsv())
        if seg.source == "whole_word":
            queued.append(w)
    _write(args.out, "".join(r + "\n" for r in rows))
    _write(f"{args.out}.diag", "".join(x + "\n" for x in diags))
    if args.update_dict:
        if d is None:
            raise CliError("--update-dict needs --fallback")
        _write(args.update_dict, dictionary_to_tsv(update_dictionary(d, queued)))
    print(f"grammar={counts['grammar']} fallback={counts['fallback']} whole_word={counts['whole_word']}")
    if diags:
        print(f"segment: {len(diags)} diagnostics in {args.out}.diag", file=sys.stderr)
    return EXIT_OK


def cmd_build_fallback(args) -> int:
    prov = {}
    if args.grammar:
        prov = _grammar_or_die(args.grammar).provenance()
    weights = Counter()
    if args.corpus:
        weights = read_corpus(_read(args.corpus)).vocabulary
    tokens = []
    cats: dict[str, set] = {}
    for lineno, line in enumerate(_read(args.segments).splitlines(), 1):
        if not line.strip():
            continue
        try:
            seg = parse_segmentation_line(line)
        except ValueError as e:
            raise CliError(f"{args.segments}: line {lineno}: {e}") from None
        reps = weights.get(seg.word, 0) if args.corpus else 1
        for ms in seg.segments:
            token = ms.render()
            tokens.extend([token] * reps)
            if seg.source == "grammar":
                names = prov.get(ms.text, {"grammar"})
            elif seg.source == "fallback":
                names = {"fallback"}
            else:
                names = {"independent"}
            cats.setdefault(token, set()).update(names)
    if not tokens:
        raise CliError(f"{args.segments}: no segmentations")
    d = estimate_unigrams(tokens, args.delta, cats)
    u = build_u_wfst(d)
    _write(f"{args.out}.dict.tsv", dictionary_to_tsv(d))
    written = save_graph(u, args.out)
    total = sum(d.entries.values())
    print(
        f"build-fallback: {len(d)} subwords, {len(d.charset) - 1} characters, delta={d.delta}, "
        f"sum(phi)={total:.12f}; wrote {args.out}.dict.tsv {' '.join(written)}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_segment_corpus(args) -> int:
    sg = load_graph(args.sg) if args.sg else None
    d, u = _load_fallback(args.fallback, args.delta)
    try:
        corpus = read_corpus(_read(args.input))
    except ValueError as e:
        raise CliError(f"{args.input}: {e}") from None
    out, diags, cache = segment_corpus(corpus, sg, u, d, args.max_paths, args.strict_edges)
    _write(args.output, out.to_text())
    for dg in diags:
        print(f"{args.input}: line {dg.utterance + 1} word {dg.index + 1} {dg.word!r}: {dg.message}", file=sys.stderr)
    counts = Counter(s.source for s in cache.values())
    print(
        f"segment-corpus: {len(corpus)} utterances, {corpus.token_count} words -> {out.token_count} subwords "
        f"(grammar={counts['grammar']} fallback={counts['fallback']} whole_word={counts['whole_word']} types)",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_postprocess(args) -> int:
    corpus = read_corpus(_read(args.input), allow_markers=True)
    out, flagged = postprocess_corpus(corpus)
    for utt, issue in flagged:
        print(f"{args.input}: line {utt + 1} token {issue.position + 1}: {issue.message}", file=sys.stderr)
    _write(args.output, out.to_text())
    return EXIT_OK


def cmd_metrics(args) -> int:
    ref = read_corpus(_read(args.ref), allow_markers=True)
    hyp = read_corpus(_read(args.hyp), allow_markers=True)
    try:
        rep = wer(ref.utterances, hyp.utterances)
    except ValueError as e:
        raise CliError(str(e)) from None
    if args.train:
        train = read_corpus(_read(args.train), allow_markers=True)
        test = read_corpus(_read(args.test), allow_markers=True) if args.test else ref
        try:
            rep.oov_rate = oov_rate(train.vocabulary, test.tokens(), types=args.types)
        except ValueError as e:
            raise CliError(str(e)) from None
    print(rep.to_json())
    return EXIT_OK


def cmd_make_lexicon(args) -> int:
    d, _ = _load_fallback(args.dict)
    pron = parse_pron_table(_read(args.pron))
    spec = _grammar_or_die(args.grammar) if args.grammar else None
    try:
        lex = build_lexicon_wfst(d, pron, phone_table(pron), spec)
    except GrammarError as e:
        raise CliError(str(e)) from None
    report = validate(lex)
    for finding in report.findings():
        print(f"make-lexicon: {finding}", file=sys.stderr)
    written = save_graph(lex, args.out)
    print(f"make-lexicon: {lex.num_states} states, {len(lex.arcs)} arcs; wrote {' '.join(written)}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_INPUT


# -- argument parsing ---------------------------------------------------------


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _probability(s):
    v = float(s)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="subwordfst",
        description="Knowledge-driven subword segmentation with weighted finite-state transducers.",
    )
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging to stderr")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-paths", type=_positive_int, default=DEFAULT_MAX_PATHS,
                        help="cap on enumerated paths per word (default %(default)s)")
    common.add_argument("--strict-edges", action="store_true",
                        help="fallback: first segment must be a prefix or character run, last a suffix or run")
    common.add_argument("--delta", type=_probability, default=None,
                        help="character floor probability; overrides the dictionary header")
    common.add_argument("--jobs", type=_positive_int, default=1, help="worker processes (results are identical)")

    s = sub.add_parser("build-grammar", help="compile a JSON grammar into the subword grammar transducer",
                       description="Writes OUT.fst, OUT.isyms (characters) and OUT.osyms (subwords). "
                       "Exit 2 on schema or validation errors.")
    s.add_argument("spec", help="grammar JSON file")
    s.add_argument("--out", required=True, help="output prefix")
    s.set_defaults(func=cmd_build_grammar)

    s = sub.add_parser("segment", parents=[common], help="segment a vocabulary",
                       description="Vocabulary: one word per line (extra columns ignored). Writes "
                       "'word<TAB>segments<TAB>source' rows to OUT and diagnostics to OUT.diag; prints "
                       "'grammar=N fallback=N whole_word=N'.")
    s.add_argument("vocab")
    s.add_argument("--sg", required=True, help="grammar graph prefix from build-grammar")
    s.add_argument("--fallback", help="dictionary TSV from build-fallback")
    s.add_argument("--out", required=True)
    s.add_argument("--update-dict", help="write the dictionary with whole words added here")
    s.set_defaults(func=cmd_segment)

    s = sub.add_parser("build-fallback", help="estimate subword unigrams and build the fallback graph",
                       description="Reads a segmentation TSV, writes OUT.dict.tsv "
                       "('subword<TAB>phi<TAB>categories' under '#delta' and '#charset' headers) and the "
                       "fallback graph files OUT.fst/.isyms/.osyms.")
    s.add_argument("segments")
    s.add_argument("--delta", type=_probability, default=DEFAULT_DELTA,
                   help="character floor probability (default %(default)s)")
    s.add_argument("--grammar", help="grammar JSON used to record subword categories")
    s.add_argument("--corpus", help="weight each word's subwords by its count in this corpus")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_build_fallback)

    s = sub.add_parser("segment-corpus", parents=[common], help="rewrite a corpus as marked subwords",
                       description="Input and output: one utterance per line; blank lines preserved.")
    s.add_argument("input")
    s.add_argument("output")
    s.add_argument("--sg", help="grammar graph prefix")
    s.add_argument("--fallback", help="dictionary TSV")
    s.set_defaults(func=cmd_segment_corpus)

    s = sub.add_parser("postprocess", help="join marked subwords back into words",
                       description="Joins a token ending in '+' with a following token starting with '+', "
                       "then strips markers. Malformed marker sequences are reported on stderr.")
    s.add_argument("input")
    s.add_argument("output")
    s.set_defaults(func=cmd_postprocess)

    s = sub.add_parser("metrics", help="WER and OOV rate as JSON",
                       description='Prints {"oov_rate", "wer", "sub", "ins", "del", "ref_tokens"}. '
                       "oov_rate is null unless --train is given.")
    s.add_argument("--ref", required=True, help="reference corpus")
    s.add_argument("--hyp", required=True, help="hypothesis corpus, same number of lines")
    s.add_argument("--train", help="training corpus for the OOV vocabulary")
    s.add_argument("--test", help="corpus to measure OOV on (default: --ref)")
    s.add_argument("--types", action="store_true", help="count OOV over distinct words instead of occurrences")
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("make-lexicon", help="build the phone-to-subword lexicon graph",
                       description="Pronunciations: 'subword<TAB>phone phone ...'. With --grammar the "
                       "grammar categories are laid out stage by stage; other dictionary categories "
                       "use a prefix/infix*/suffix/singleton subgraph.")
    s.add_argument("--dict", required=True, help="dictionary TSV")
    s.add_argument("--pron", required=True, help="pronunciation TSV")
    s.add_argument("--grammar", help="grammar JSON")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_make_lexicon)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except CliError as e:
        print(f"subwordfst {args.command}: {e}", file=sys.stderr)
        return e.status


if __name__ == "__main__":
    sys.exit(main())
