"""Batch scoring: resource bundling, configuration checks and ScoreTable."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from ..embeddings import EmbeddingTable
from ..errors import ConfigurationError, DataFormatError
from ..meteor import SynonymLexicon, meteor
from ..metastats import ScoreVector
from ..ngram_metrics import INTERNAL_METRICS, IdfTable, MetricScore, bleu, build_idf, cider, rouge_l
from ..textprep import StopwordList, default_stopwords, tokenize
from ..wmd import EmptyDocumentError, wmd_similarity
from .datasets import EvalInstance

EXTERNAL_PREFIX = "external:"

#: score_fn(caption, references, key) -> float; ``key`` identifies the trial
#: for metrics whose scores are joined from an external file.
CaptionScorer = Callable[[str, Sequence[str], str], float]


@dataclass
class ScoringResources:
    """Immutable inputs shared by every scored instance."""

    stopwords: StopwordList | None = None
    embeddings: EmbeddingTable | None = None
    embedding_hash: str | None = None
    lexicon: SynonymLexicon | None = None
    idf: IdfTable | None = None
    external: dict[str, dict[str, float]] = field(default_factory=dict)
    bleu_max_order: int = 4
    rouge_beta: float = 1.2
    meteor_alpha: float = 0.9
    meteor_beta: float = 3.0
    meteor_gamma: float = 0.5
    wmd_scale: float = 1.0
    wmd_aggregate: str = "max"

    def stopword_list(self) -> StopwordList:
        return self.stopwords if self.stopwords is not None else default_stopwords()

    def provenance(self, metrics: Sequence[str]) -> dict:
        snapshot: dict = {
            "metrics": list(metrics),
            "tokenizer": "ptb-lite, NFC, lowercase",
            "bleu_max_order": self.bleu_max_order,
            "rouge_beta": self.rouge_beta,
            "meteor_alpha": self.meteor_alpha,
            "meteor_beta": self.meteor_beta,
            "meteor_gamma": self.meteor_gamma,
            "wmd_scale": self.wmd_scale,
            "wmd_aggregate": self.wmd_aggregate,
            "stopwords": "default" if self.stopwords is None else "custom",
            "lexicon": self.lexicon is not None,
        }
        if self.embedding_hash is not None:
            snapshot["embedding_sha256"] = self.embedding_hash
        return snapshot


@dataclass
class ScoreTable:
    """Scores for every requested (instance, metric) pair.

    Pairs that could not be scored meaningfully carry a 0 and are listed in
    ``degenerate`` rather than dropped.
    """

    instance_ids: tuple[str, ...]
    metrics: tuple[str, ...]
    scores: dict[str, dict[str, float]]
    degenerate: set[tuple[str, str]] = field(default_factory=set)
    judgments: dict[str, dict[str, float]] = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def column(self, metric: str) -> ScoreVector:
        if metric not in self.metrics:
            raise KeyError(f"no metric {metric!r} in table")
        return ScoreVector(
            [self.scores[iid][metric] for iid in self.instance_ids], self.instance_ids
        )

    def judgment_vector(self, name: str) -> ScoreVector:
        missing = [iid for iid in self.instance_ids if name not in self.judgments.get(iid, {})]
        if missing:
            raise ConfigurationError(
                f"instance {missing[0]!r} has no judgment named {name!r}"
            )
        return ScoreVector(
            [self.judgments[iid][name] for iid in self.instance_ids], self.instance_ids
        )

    def judgment_names(self) -> tuple[str, ...]:
        names: set[str] = set()
        for per_instance in self.judgments.values():
            names.update(per_instance)
        return tuple(sorted(names))


def validate_metrics(
    metrics: Sequence[str], resources: ScoringResources, *, idf_available: bool
) -> tuple[str, ...]:
    """Fail fast, before any scoring, if a requested metric lacks resources."""
    ordered: list[str] = []
    for metric in metrics:
        if metric in ordered:
            continue
        if metric in INTERNAL_METRICS:
            ordered.append(metric)
        elif metric.startswith(EXTERNAL_PREFIX):
            name = metric[len(EXTERNAL_PREFIX) :]
            if name not in resources.external:
                raise ConfigurationError(
                    f"metric {metric!r} requested but no external scores named {name!r} were supplied"
                )
            ordered.append(metric)
        else:
            raise ConfigurationError(
                f"unknown metric {metric!r}; expected one of {INTERNAL_METRICS} or external:<name>"
            )
    if not ordered:
        raise ConfigurationError("no metrics requested")
    if "wmd" in ordered and resources.embeddings is None:
        raise ConfigurationError("wmd requires an embedding table (--embeddings)")
    if "cider" in ordered and resources.idf is None and not idf_available:
        raise ConfigurationError("cider requires an idf table or a dataset to derive one from")
    return tuple(ordered)


def _score_internal(
    metric: str,
    candidate: tuple[str, ...],
    references: list[tuple[str, ...]],
    resources: ScoringResources,
    idf: IdfTable | None,
) -> MetricScore:
    if metric == "bleu":
        return bleu(candidate, references, resources.bleu_max_order)
    if metric == "rouge_l":
        return rouge_l(candidate, references, resources.rouge_beta)
    if metric == "cider":
        return cider(candidate, references, idf)
    if metric == "meteor":
        return meteor(
            candidate,
            references,
            resources.lexicon,
            resources.meteor_alpha,
            resources.meteor_beta,
            resources.meteor_gamma,
        )
    if metric == "wmd":
        try:
            return wmd_similarity(
                candidate,
                references,
                resources.embeddings,
                resources.stopword_list(),
                resources.wmd_scale,
                resources.wmd_aggregate,
            )
        except EmptyDocumentError:
            return MetricScore(0.0, "wmd", degenerate=True)
    raise ConfigurationError(f"unknown internal metric {metric!r}")


def score_dataset(
    instances: Sequence[EvalInstance],
    metrics: Sequence[str],
    resources: ScoringResources,
) -> ScoreTable:
    """Score every instance under every requested metric, deterministically."""
    if not instances:
        raise ConfigurationError("no instances to score")
    ordered = validate_metrics(metrics, resources, idf_available=True)

    idf = resources.idf
    if "cider" in ordered and idf is None:
        idf = build_idf([[tokenize(r) for r in inst.references] for inst in instances])

    table = ScoreTable(
        instance_ids=tuple(inst.instance_id for inst in instances),
        metrics=ordered,
        scores={},
        provenance=resources.provenance(ordered),
    )
    for inst in instances:
        candidate = tokenize(inst.candidate)
        references = [tokenize(r) for r in inst.references]
        row: dict[str, float] = {}
        for metric in ordered:
            if metric.startswith(EXTERNAL_PREFIX):
                name = metric[len(EXTERNAL_PREFIX) :]
                mapping = resources.external[name]
                if inst.instance_id not in mapping:
                    raise DataFormatError(
                        f"external scores {name!r} lack instance {inst.instance_id!r}"
                    )
                row[metric] = mapping[inst.instance_id]
                continue
            if not candidate or not any(references):
                row[metric] = 0.0
                table.degenerate.add((inst.instance_id, metric))
                continue
            result = _score_internal(metric, candidate, references, resources, idf)
            row[metric] = result.value
            if result.degenerate:
                table.degenerate.add((inst.instance_id, metric))
        table.scores[inst.instance_id] = row
        if inst.judgments:
            table.judgments[inst.instance_id] = dict(inst.judgments)
    return table


def make_caption_scorer(
    metric: str, resources: ScoringResources, idf: IdfTable | None = None
) -> CaptionScorer:
    """A (caption, references, trial-key) -> float scorer for the protocols.

    Internal metrics tokenize and score on the fly (degenerate trials score
    0); external metrics look the trial key up in their joined score file.
    """
    validate_metrics([metric], resources, idf_available=idf is not None)
    if metric.startswith(EXTERNAL_PREFIX):
        name = metric[len(EXTERNAL_PREFIX) :]
        mapping = resources.external[name]

        def external_scorer(caption: str, references: Sequence[str], key: str) -> float:
            if key not in mapping:
                raise DataFormatError(f"external scores {name!r} lack trial {key!r}")
            return mapping[key]

        return external_scorer

    def internal_scorer(caption: str, references: Sequence[str], key: str) -> float:
        candidate = tokenize(caption)
        tokenized_refs = [tokenize(r) for r in references]
        if not candidate or not any(tokenized_refs):
            return 0.0
        return _score_internal(metric, candidate, tokenized_refs, resources, idf).value

    return internal_scorer
