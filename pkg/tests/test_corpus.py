import unicodedata
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from subwordfst.corpus import (
    Corpus,
    extract_vocab,
    marker_issues,
    postprocess,
    postprocess_corpus,
    read_corpus,
    segment_corpus,
    segment_token,
)
from subwordfst.fallback import build_u_wfst, estimate_unigrams
from subwordfst.grammar import InvalidWord
from subwordfst.segmenter import mark_segments

from oracles import rng


def test_read_corpus_nfc_and_blank_lines():
    nfd = unicodedata.normalize("NFD", "கொ")
    c = read_corpus(f"a b\n\n{nfd} c\n")
    assert c.utterances == [["a", "b"], [], [unicodedata.normalize("NFC", "கொ"), "c"]]
    assert c.token_count == 4
    with pytest.raises(ValueError, match="line 1"):
        read_corpus("a+ b")
    assert read_corpus("a+ +b", allow_markers=True).utterances == [["a+", "+b"]]


def test_extract_vocab():
    assert extract_vocab(Corpus([["a", "b"], ["a"]])) == [("a", 2), ("b", 1)]
    assert extract_vocab(Corpus([])) == []


def test_extract_vocab_counts():
    r = rng(3)
    types = [f"w{k}" for k in range(10)]
    tokens = [r.choice(types) for _ in range(1000)]
    c = Corpus([tokens[i : i + 7] for i in range(0, 1000, 7)])
    tally = {}
    for t in tokens:
        tally[t] = tally.get(t, 0) + 1
    got = extract_vocab(c)
    assert dict(got) == tally
    assert [n for _, n in got] == sorted(tally.values(), reverse=True)


# -- segmentation ------------------------------------------------------------------


@pytest.fixture(scope="module")
def toy_fallback(toy_sg):
    from subwordfst.segmenter import segment_word

    words = ["isaikal", "isaikalai", "enakku", "namudaiya", "keettavankalai", "seigiraan"]
    tokens = [t for w in words for t in segment_word(w, toy_sg).rendered()]
    d = estimate_unigrams(tokens, extra_chars=toy_sg.isyms.symbols())
    return d, build_u_wfst(d)


def test_segment_corpus_grammar(toy_sg, toy_fallback):
    d, u = toy_fallback
    out, diags, cache = segment_corpus(Corpus([["isaikal"]]), toy_sg, u, d)
    assert out.utterances == [["isai+", "+kal"]]
    assert diags == []


def test_segment_corpus_repeats_and_whole_words(toy_sg, toy_fallback):
    d, u = toy_fallback
    corpus = Corpus([["isaikal", "mane", "isaikal"], [], ["namkalai"]])
    out, diags, cache = segment_corpus(corpus, toy_sg, u, d)
    assert out.utterances[0] == ["isai+", "+kal", "mane", "isai+", "+kal"]
    assert out.utterances[1] == []
    assert out.utterances[2] == ["nam+", "+kal+", "+ai"]
    assert cache["mane"].source == "whole_word"
    assert cache["namkalai"].source == "fallback"
    # cache is invisible
    again, _, _ = segment_corpus(corpus, toy_sg, u, d, cache={})
    assert again.utterances == out.utterances


def test_segment_token_order(toy_sg, toy_fallback):
    d, u = toy_fallback
    assert segment_token("isaikal", toy_sg, u, d).source == "grammar"
    assert segment_token("namkalai", toy_sg, u, d).source == "fallback"
    assert segment_token("namkalai", toy_sg).source == "whole_word"
    assert segment_token("xyz", toy_sg, u, d).source == "whole_word"
    with pytest.raises(InvalidWord):
        segment_token("a+b", toy_sg)


def test_segment_corpus_collects_errors(toy_sg):
    out, diags, _ = segment_corpus(Corpus([["ok", "x+y"]]), toy_sg)
    assert [(dg.utterance, dg.index, dg.word) for dg in diags] == [(0, 1, "x+y")]


# -- postprocess ----------------------------------------------------------------


def test_postprocess_examples():
    assert postprocess(["isai+", "+kal"]) == ["isaikal"]
    assert postprocess(["mane", "isai+", "+kal"]) == ["mane", "isaikal"]
    assert postprocess(["a+", "+b+", "+c", "d"]) == ["abc", "d"]
    assert postprocess([]) == []


def test_postprocess_recovers_from_bad_markers():
    tokens = ["+kal", "isai+", "mane"]
    assert postprocess(tokens) == ["kal", "isai", "mane"]
    positions = [i.position for i in marker_issues(tokens)]
    assert positions == [0, 1]
    assert marker_issues(["isai+"])[0].message.startswith("sequence ends")
    out, flagged = postprocess_corpus(Corpus([["a+", "+b"], ["+x"]]))
    assert out.utterances == [["ab"], ["x"]]
    assert [u for u, _ in flagged] == [1]


words = st.lists(st.text(alphabet="abcdeé", min_size=1, max_size=5), min_size=1, max_size=4)


@given(st.lists(words, max_size=8))
def test_postprocess_inverts_marking(utterance):
    tokens = [m.render() for texts in utterance for m in mark_segments(texts)]
    assert postprocess(tokens) == ["".join(t) for t in utterance]
    assert marker_issues(tokens) == []


def test_inverse_property_on_corpus(toy_sg, toy_fallback):
    d, u = toy_fallback
    text = "isaikalukku enakku mane\nseigiraan namkalai isai\n\nkeettavankalai ikkalil\n"
    corpus = read_corpus(text)
    seg, _, _ = segment_corpus(corpus, toy_sg, u, d)
    back, flagged = postprocess_corpus(seg)
    assert back.utterances == corpus.utterances and flagged == []


def test_vocabulary_counter():
    c = Corpus([["a", "b", "a"]])
    assert c.vocabulary == Counter({"a": 2, "b": 1})
    assert c.to_text() == "a b a\n"
