"""N-gram overlap metrics: smoothed BLEU, ROUGE-L and tf-idf weighted CIDEr.

All scorers take tokenized captions (see :mod:`capeval.textprep`) and score
one candidate against a reference set. CIDEr applies Porter stemming to its
inputs internally, so callers pass plain tokenized captions everywhere.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DataFormatError
from .textprep import TokenizedCaption, stem

NGram = tuple[str, ...]
NGramProfile = dict[NGram, int]

INTERNAL_METRICS = ("bleu", "rouge_l", "cider", "meteor", "wmd")

#: Upper bound of each internal metric's range (self-comparison value).
METRIC_UPPER_BOUND = {"bleu": 1.0, "rouge_l": 1.0, "cider": 10.0, "meteor": 1.0, "wmd": 1.0}


@dataclass(frozen=True)
class MetricScore:
    value: float
    metric_id: str
    degenerate: bool = False


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def extract_ngrams(caption: TokenizedCaption, max_order: int) -> NGramProfile:
    """Sliding-window n-gram counts for all orders 1..max_order."""
    if not 1 <= max_order <= 4:
        raise ValueError(f"max_order must be in 1..4, got {max_order}")
    profile: NGramProfile = {}
    for n in range(1, max_order + 1):
        profile.update(_ngram_counts(caption, n))
    return profile


def _nonempty_references(references: Iterable[TokenizedCaption]) -> list[TokenizedCaption]:
    refs = [tuple(r) for r in references if r]
    if not refs:
        raise ValueError("at least one non-empty reference is required")
    return refs


def bleu(
    candidate: TokenizedCaption,
    references: Sequence[TokenizedCaption],
    max_order: int = 4,
) -> MetricScore:
    """Sentence-level BLEU with add-one smoothing on orders >= 2.

    Precisions are clipped against the per-n-gram maximum reference count;
    the brevity penalty uses the reference length closest to the candidate
    length (ties resolved toward the shorter reference).
    """
    refs = _nonempty_references(references)
    if not candidate:
        return MetricScore(0.0, "bleu")
    log_precision_sum = 0.0
    for n in range(1, max_order + 1):
        cand_counts = _ngram_counts(candidate, n)
        total = sum(cand_counts.values())
        max_ref: Counter = Counter()
        for ref in refs:
            for gram, count in _ngram_counts(ref, n).items():
                if count > max_ref[gram]:
                    max_ref[gram] = count
        matched = sum(min(c, max_ref[g]) for g, c in cand_counts.items())
        if n == 1:
            if matched == 0:
                return MetricScore(0.0, "bleu")
            precision = matched / total
        else:
            precision = (matched + 1) / (total + 1)
        log_precision_sum += math.log(precision) / max_order
    cand_len = len(candidate)
    ref_len = min((abs(len(r) - cand_len), len(r)) for r in refs)[1]
    brevity = min(1.0, math.exp(1.0 - ref_len / cand_len))
    return MetricScore(brevity * math.exp(log_precision_sum), "bleu")


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b):
            curr.append(prev[j] + 1 if x == y else max(curr[j], prev[j + 1]))
        prev = curr
    return prev[-1]


def rouge_l(
    candidate: TokenizedCaption,
    references: Sequence[TokenizedCaption],
    beta: float = 1.2,
) -> MetricScore:
    """ROUGE-L F-measure, maximised over references."""
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    refs = _nonempty_references(references)
    if not candidate:
        return MetricScore(0.0, "rouge_l")
    beta_sq = beta * beta
    best = 0.0
    for ref in refs:
        lcs = _lcs_length(candidate, ref)
        recall = lcs / len(ref)
        precision = lcs / len(candidate)
        if recall + precision == 0.0:
            continue
        f_score = ((1.0 + beta_sq) * recall * precision) / (recall + beta_sq * precision)
        best = max(best, f_score)
    return MetricScore(best, "rouge_l")


@dataclass(frozen=True)
class IdfTable:
    """Per-n-gram document frequencies over a corpus of |I| images.

    idf(g) = log(|I| / df(g)); n-grams absent from the table are treated as
    maximally informative (df = 1).
    """

    corpus_size: int
    df: Mapping[NGram, int] = field(default_factory=dict)

    def idf(self, gram: NGram) -> float:
        return math.log(self.corpus_size / self.df.get(gram, 1))

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"corpus_size\t{self.corpus_size}\n")
            for gram in sorted(self.df, key=lambda g: (len(g), g)):
                fh.write(f"{len(gram)}\t{' '.join(gram)}\t{self.df[gram]}\n")

    @classmethod
    def load(cls, path: str | Path) -> "IdfTable":
        df: dict[NGram, int] = {}
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n").split("\t")
            if len(header) != 2 or header[0] != "corpus_size":
                raise DataFormatError("idf file must start with 'corpus_size\\t<I>'", path=path, line=1)
            try:
                corpus_size = int(header[1])
            except ValueError:
                raise DataFormatError(f"corpus_size is not an integer: {header[1]!r}", path=path, line=1)
            for lineno, line in enumerate(fh, start=2):
                if not line.strip():
                    continue
                fields = line.rstrip("\n").split("\t")
                if len(fields) != 3:
                    raise DataFormatError("expected 'n\\tngram\\tdf'", path=path, line=lineno)
                order, gram_text, df_text = fields
                gram = tuple(gram_text.split(" "))
                try:
                    order_n, count = int(order), int(df_text)
                except ValueError:
                    raise DataFormatError("n and df must be integers", path=path, line=lineno)
                if order_n != len(gram):
                    raise DataFormatError(
                        f"declared order {order_n} != n-gram length {len(gram)}", path=path, line=lineno
                    )
                if count < 1:
                    raise DataFormatError(f"df must be >= 1, got {count}", path=path, line=lineno)
                df[gram] = count
        return cls(corpus_size=corpus_size, df=df)


def _stem_all(tokens: Sequence[str]) -> tuple[str, ...]:
    return tuple(stem(t) for t in tokens)


def build_idf(reference_corpus: Sequence[Sequence[TokenizedCaption]], max_order: int = 4) -> IdfTable:
    """Document frequencies over images' reference sets, on stemmed tokens."""
    if not reference_corpus:
        raise ValueError("reference corpus must not be empty")
    df: dict[NGram, int] = {}
    for reference_set in reference_corpus:
        seen: set[NGram] = set()
        for ref in reference_set:
            seen.update(extract_ngrams(_stem_all(ref), max_order))
        for gram in seen:
            df[gram] = df.get(gram, 0) + 1
    return IdfTable(corpus_size=len(reference_corpus), df=df)


def _tfidf_vector(stems: Sequence[str], n: int, idf: IdfTable) -> dict[NGram, float]:
    return {g: tf * idf.idf(g) for g, tf in _ngram_counts(stems, n).items()}


def _cosine(a: Mapping[NGram, float], b: Mapping[NGram, float]) -> float:
    norm_a = sum(w * w for w in a.values())
    norm_b = sum(w * w for w in b.values())
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    dot = 0.0
    for gram, weight in a.items():
        other = b.get(gram)
        if other is not None:
            dot += weight * other
    return min(1.0, dot / math.sqrt(norm_a * norm_b))


def cider_n(
    candidate: TokenizedCaption,
    references: Sequence[TokenizedCaption],
    idf: IdfTable,
    n: int,
) -> float:
    """Mean tf-idf cosine between candidate and references at one order."""
    refs = _nonempty_references(references)
    cand_stems = _stem_all(candidate)
    cand_vec = _tfidf_vector(cand_stems, n, idf)
    total = 0.0
    for ref in refs:
        total += _cosine(cand_vec, _tfidf_vector(_stem_all(ref), n, idf))
    return total / len(refs)


def cider(
    candidate: TokenizedCaption,
    references: Sequence[TokenizedCaption],
    idf: IdfTable,
    max_order: int = 4,
) -> MetricScore:
    """Base CIDEr: 10 x mean over orders 1..max_order of the tf-idf cosines."""
    value = sum(cider_n(candidate, references, idf, n) for n in range(1, max_order + 1))
    return MetricScore(10.0 * (value / max_order), "cider")
