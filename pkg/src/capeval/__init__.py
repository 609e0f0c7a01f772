"""Caption evaluation metrics and a meta-evaluation harness.

Metrics: smoothed sentence BLEU, ROUGE-L, tf-idf weighted CIDEr, a
METEOR-style aligner, and Word Mover's Distance over word embeddings with
an exact transportation solver. The harness adds human-correlation reports
with Williams significance testing, forced-choice accuracy, distraction
robustness, and normalized score combination.
"""

from .embeddings import EmbeddingTable, load_embeddings, save_embeddings, word_cost
from .meteor import Alignment, SynonymLexicon, align, load_lexicon, meteor
from .metastats import (
    CorrelationResult,
    ScoreVector,
    WilliamsResult,
    combine,
    kendall,
    minmax_normalize,
    pearson,
    spearman,
    t_cdf,
    williams_test,
)
from .ngram_metrics import IdfTable, MetricScore, bleu, build_idf, cider, extract_ngrams, rouge_l
from .textprep import default_stopwords, load_stopwords, remove_stopwords, stem, tokenize
from .wmd import NbowDocument, WmdResult, emd, nbow, wmd_result, wmd_similarity

__version__ = "0.1.0"

__all__ = [
    "Alignment",
    "CorrelationResult",
    "EmbeddingTable",
    "IdfTable",
    "MetricScore",
    "NbowDocument",
    "ScoreVector",
    "SynonymLexicon",
    "WilliamsResult",
    "WmdResult",
    "align",
    "bleu",
    "build_idf",
    "cider",
    "combine",
    "default_stopwords",
    "emd",
    "extract_ngrams",
    "kendall",
    "load_embeddings",
    "load_lexicon",
    "load_stopwords",
    "meteor",
    "minmax_normalize",
    "nbow",
    "pearson",
    "remove_stopwords",
    "rouge_l",
    "save_embeddings",
    "spearman",
    "stem",
    "t_cdf",
    "tokenize",
    "williams_test",
    "wmd_result",
    "wmd_similarity",
    "word_cost",
]
