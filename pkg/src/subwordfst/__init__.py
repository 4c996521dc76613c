"""Knowledge-driven subword segmentation with weighted finite-state transducers."""

__version__ = "0.1.0"

from .corpus import Corpus, extract_vocab, postprocess, read_corpus, segment_corpus
from .fallback import (
    SubwordDict,
    build_u_wfst,
    estimate_unigrams,
    merge_singleton_runs,
    select_segmentation,
    update_dictionary,
)
from .fst import (
    EPSILON,
    IMPOSSIBLE,
    Arc,
    Path,
    SymbolTable,
    Wfst,
    best_path,
    compose,
    connect,
    enumerate_paths,
    output_labels,
    validate,
)
from .grammar import (
    CategorySpec,
    GrammarSpec,
    build_lexicon_wfst,
    build_sg_wfst,
    build_w_wfst,
    parse_grammar,
)
from .metrics import MetricsReport, oov_rate, wer
from .segmenter import MarkedSubword, Segmentation, mark_segments, segment_vocabulary, segment_word
