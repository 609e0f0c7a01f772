"""The three meta-evaluation protocols: correlation, forced choice, distraction.

Tie policy for the choice protocols: a trial only counts as correct when the
expected caption scores strictly higher, so ties are failures. Distraction
accuracy pools trials over images (no per-image macro-averaging).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

from ..errors import ConfigurationError
from ..metastats import (
    CorrelationResult,
    UndefinedCorrelationError,
    WilliamsResult,
    kendall,
    pearson,
    spearman,
    williams_test,
)
from .datasets import (
    DISTRACTION_CATEGORIES,
    FORCED_CHOICE_CATEGORIES,
    DistractionInstance,
    TripletInstance,
)
from .scoring import CaptionScorer, ScoreTable

_CORRELATIONS = {"pearson": pearson, "spearman": spearman, "kendall": kendall}

WIN_THRESHOLD = 0.05


@dataclass(frozen=True)
class CorrelationReport:
    """Metric-vs-human correlations plus the pairwise Williams matrix.

    ``metrics`` is ordered by descending correlation with the judgment
    (under ``williams_correlation``); matrix cells are keyed (row, column).
    """

    judgment: str
    n: int
    williams_correlation: str
    metrics: tuple[str, ...]
    human: dict[str, CorrelationResult]
    pairwise_spearman: dict[tuple[str, str], float]
    williams: dict[tuple[str, str], WilliamsResult]
    excluded: tuple[str, ...]

    def win(self, row: str, col: str) -> bool:
        return self.williams[(row, col)].p < WIN_THRESHOLD


def correlation_report(
    table: ScoreTable, judgment_name: str, williams_correlation: str = "pearson"
) -> CorrelationReport:
    """Correlate every metric column with one judgment column.

    Constant metric columns are excluded with a warning; every surviving
    pair of metrics is compared with the Williams test against the shared
    judgment column.
    """
    if williams_correlation not in _CORRELATIONS:
        raise ConfigurationError(
            f"williams correlation must be one of {sorted(_CORRELATIONS)}, got {williams_correlation!r}"
        )
    corr = _CORRELATIONS[williams_correlation]
    judgments = table.judgment_vector(judgment_name)

    human: dict[str, CorrelationResult] = {}
    ranking: dict[str, float] = {}
    excluded: list[str] = []
    for metric in table.metrics:
        column = table.column(metric)
        try:
            human[metric] = CorrelationResult(
                pearson(column, judgments),
                spearman(column, judgments),
                kendall(column, judgments),
            )
            ranking[metric] = corr(column, judgments)
        except UndefinedCorrelationError:
            warnings.warn(f"metric {metric!r} has a constant column; excluded from the report")
            excluded.append(metric)
    if not human:
        raise ConfigurationError("no metric column with non-zero variance to correlate")

    ordered = tuple(sorted(human, key=lambda m: (-ranking[m], m)))
    pairwise: dict[tuple[str, str], float] = {}
    williams: dict[tuple[str, str], WilliamsResult] = {}
    for row in ordered:
        for col in ordered:
            if row == col:
                continue
            pairwise[(row, col)] = spearman(table.column(row), table.column(col))
            williams[(row, col)] = williams_test(
                r13=ranking[row],
                r23=ranking[col],
                r12=corr(table.column(row), table.column(col)),
                n=len(judgments),
            )
    return CorrelationReport(
        judgment=judgment_name,
        n=len(judgments),
        williams_correlation=williams_correlation,
        metrics=ordered,
        human=human,
        pairwise_spearman=pairwise,
        williams=williams,
        excluded=tuple(excluded),
    )


def mean_correlations(reports: Sequence[CorrelationReport]) -> dict[str, CorrelationResult]:
    """Per-metric elementwise mean over reports (e.g. correctness+thoroughness)."""
    if not reports:
        raise ValueError("no reports to average")
    shared = set(reports[0].human)
    for report in reports[1:]:
        shared &= set(report.human)
    return {
        metric: CorrelationResult(
            sum(r.human[metric].pearson for r in reports) / len(reports),
            sum(r.human[metric].spearman for r in reports) / len(reports),
            sum(r.human[metric].kendall for r in reports) / len(reports),
        )
        for metric in sorted(shared)
    }


@dataclass(frozen=True)
class AccuracyReport:
    """Per-category (trials, correct) counts plus a summary accuracy.

    For forced choice the summary is the mean of the category accuracies
    (Table-style "Avg."); for distraction it pools every trial ("Overall").
    """

    categories: tuple[str, ...]
    trials: dict[str, int] = field(default_factory=dict)
    correct: dict[str, int] = field(default_factory=dict)
    summary_label: str = "average"

    def accuracy(self, category: str) -> float:
        return self.correct[category] / self.trials[category]

    def summary(self) -> float:
        present = [c for c in self.categories if self.trials.get(c)]
        if self.summary_label == "overall":
            total = sum(self.trials[c] for c in present)
            return sum(self.correct[c] for c in present) / total
        return sum(self.accuracy(c) for c in present) / len(present)


def forced_choice_accuracy(
    score_fn: CaptionScorer, triplets: Sequence[TripletInstance]
) -> AccuracyReport:
    """Fraction of triplets where the human-chosen candidate wins strictly.

    External trial keys: ``<instance_id>:A`` and ``<instance_id>:B``.
    """
    if not triplets:
        raise ValueError("no triplets to evaluate")
    trials = {c: 0 for c in FORCED_CHOICE_CATEGORIES}
    correct = {c: 0 for c in FORCED_CHOICE_CATEGORIES}
    for triplet in triplets:
        score_a = score_fn(triplet.candidate_a, triplet.references, f"{triplet.instance_id}:A")
        score_b = score_fn(triplet.candidate_b, triplet.references, f"{triplet.instance_id}:B")
        trials[triplet.category] += 1
        if triplet.human_choice == "A":
            won = score_a > score_b
        else:
            won = score_b > score_a
        if won:
            correct[triplet.category] += 1
    present = tuple(c for c in FORCED_CHOICE_CATEGORIES if trials[c])
    return AccuracyReport(present, trials, correct, summary_label="average")


def distraction_accuracy(
    score_fn: CaptionScorer, instances: Sequence[DistractionInstance]
) -> AccuracyReport:
    """Correct-beats-distractor rate per distraction category, pooled.

    Each correct caption is scored against the image's remaining correct
    captions; a trial succeeds when it strictly outscores a distractor
    under the same references. Images with fewer than two correct captions
    are skipped with a warning. External trial keys: ``<image_id>:c<i>``
    for the held-out correct caption and ``<image_id>:c<i>:d<k>`` for
    distractor k scored against the same references.
    """
    if not instances:
        raise ValueError("no distraction instances to evaluate")
    trials = {c: 0 for c in DISTRACTION_CATEGORIES}
    correct = {c: 0 for c in DISTRACTION_CATEGORIES}
    for inst in instances:
        if len(inst.correct) < 2:
            warnings.warn(
                f"image {inst.image_id!r} has fewer than two correct captions; skipped"
            )
            continue
        for i, caption in enumerate(inst.correct):
            references = inst.correct[:i] + inst.correct[i + 1 :]
            caption_score = score_fn(caption, references, f"{inst.image_id}:c{i}")
            for k, distractor in enumerate(inst.distractors):
                distractor_score = score_fn(
                    distractor.caption, references, f"{inst.image_id}:c{i}:d{k}"
                )
                trials[distractor.category] += 1
                if caption_score > distractor_score:
                    correct[distractor.category] += 1
    if not any(trials.values()):
        raise ValueError("every image was skipped; nothing to evaluate")
    present = tuple(c for c in DISTRACTION_CATEGORIES if trials[c])
    return AccuracyReport(present, trials, correct, summary_label="overall")
