"""JSONL dataset loaders for the three evaluation protocols.

Schemas (one JSON object per line):

- judged:      {"instance_id": str, "image_id": str, "candidate": str,
                "references": [str, ...], "judgments": {name: float, ...}?}
- triplet:     {"instance_id": str, "references": [str, ...],
                "candidate_a": str, "candidate_b": str,
                "human_choice": "A"|"B", "category": "HC"|"HI"|"HM"|"MM"}
- distraction: {"image_id": str, "correct": [str, ...],
                "distractors": [{"caption": str, "category": <kind>}, ...]}
  with <kind> one of replace_scene, replace_person, share_scene, share_person.

External score files are CSV with header ``instance_id,score``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from ..errors import DataFormatError

FORCED_CHOICE_CATEGORIES = ("HC", "HI", "HM", "MM")
DISTRACTION_CATEGORIES = (
    "replace_scene",
    "replace_person",
    "share_scene",
    "share_person",
)


@dataclass(frozen=True)
class EvalInstance:
    instance_id: str
    image_id: str
    candidate: str
    references: tuple[str, ...]
    judgments: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class TripletInstance:
    instance_id: str
    references: tuple[str, ...]
    candidate_a: str
    candidate_b: str
    human_choice: str
    category: str


@dataclass(frozen=True)
class Distractor:
    caption: str
    category: str


@dataclass(frozen=True)
class DistractionInstance:
    image_id: str
    correct: tuple[str, ...]
    distractors: tuple[Distractor, ...]


def _reject_constant(token: str):
    raise ValueError(f"non-finite JSON constant {token!r}")


def _iter_jsonl(path: str | Path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line, parse_constant=_reject_constant)
            except ValueError as exc:
                raise DataFormatError(f"invalid JSON: {exc}", path=path, line=lineno)
            if not isinstance(record, dict):
                raise DataFormatError("each line must hold a JSON object", path=path, line=lineno)
            yield lineno, record


def _require(record: dict, key: str, kind, path, lineno):
    if key not in record:
        raise DataFormatError(f"missing required field {key!r}", path=path, line=lineno)
    value = record[key]
    if not isinstance(value, kind):
        raise DataFormatError(
            f"field {key!r} must be {kind.__name__}, got {type(value).__name__}",
            path=path,
            line=lineno,
        )
    return value


def _caption_list(record: dict, key: str, path, lineno, minimum: int) -> tuple[str, ...]:
    raw = _require(record, key, list, path, lineno)
    if len(raw) < minimum:
        raise DataFormatError(f"field {key!r} needs >= {minimum} entries", path=path, line=lineno)
    captions = []
    for item in raw:
        if not isinstance(item, str) or not item.strip():
            raise DataFormatError(
                f"field {key!r} must hold non-empty strings", path=path, line=lineno
            )
        captions.append(item)
    return tuple(captions)


def _caption(record: dict, key: str, path, lineno) -> str:
    value = _require(record, key, str, path, lineno)
    if not value.strip():
        raise DataFormatError(f"field {key!r} must be a non-empty caption", path=path, line=lineno)
    return value


def load_judged_dataset(path: str | Path) -> list[EvalInstance]:
    """Load candidate/reference instances with optional human judgments."""
    instances = []
    seen: dict[str, int] = {}
    for lineno, record in _iter_jsonl(path):
        instance_id = _require(record, "instance_id", str, path, lineno)
        if instance_id in seen:
            raise DataFormatError(
                f"duplicate instance_id {instance_id!r} (first seen on line {seen[instance_id]})",
                path=path,
                line=lineno,
            )
        seen[instance_id] = lineno
        judgments = {}
        if "judgments" in record and record["judgments"] is not None:
            raw = _require(record, "judgments", dict, path, lineno)
            for name, value in raw.items():
                if not isinstance(value, (int, float)) or not math.isfinite(value):
                    raise DataFormatError(
                        f"judgment {name!r} must be a finite number", path=path, line=lineno
                    )
                judgments[str(name)] = float(value)
        instances.append(
            EvalInstance(
                instance_id=instance_id,
                image_id=_require(record, "image_id", str, path, lineno),
                candidate=_caption(record, "candidate", path, lineno),
                references=_caption_list(record, "references", path, lineno, minimum=1),
                judgments=judgments,
            )
        )
    if not instances:
        raise DataFormatError("dataset contains no instances", path=path)
    return instances


def load_triplet_dataset(path: str | Path) -> list[TripletInstance]:
    """Load forced-choice triplets (one reference set, two candidates)."""
    triplets = []
    seen: dict[str, int] = {}
    for lineno, record in _iter_jsonl(path):
        instance_id = _require(record, "instance_id", str, path, lineno)
        if instance_id in seen:
            raise DataFormatError(
                f"duplicate instance_id {instance_id!r} (first seen on line {seen[instance_id]})",
                path=path,
                line=lineno,
            )
        seen[instance_id] = lineno
        candidate_a = _caption(record, "candidate_a", path, lineno)
        candidate_b = _caption(record, "candidate_b", path, lineno)
        if candidate_a == candidate_b:
            raise DataFormatError("candidate_a and candidate_b must differ", path=path, line=lineno)
        human_choice = _require(record, "human_choice", str, path, lineno)
        if human_choice not in ("A", "B"):
            raise DataFormatError(
                f"human_choice must be 'A' or 'B', got {human_choice!r}", path=path, line=lineno
            )
        category = _require(record, "category", str, path, lineno)
        if category not in FORCED_CHOICE_CATEGORIES:
            raise DataFormatError(
                f"category must be one of {FORCED_CHOICE_CATEGORIES}, got {category!r}",
                path=path,
                line=lineno,
            )
        triplets.append(
            TripletInstance(
                instance_id=instance_id,
                references=_caption_list(record, "references", path, lineno, minimum=1),
                candidate_a=candidate_a,
                candidate_b=candidate_b,
                human_choice=human_choice,
                category=category,
            )
        )
    if not triplets:
        raise DataFormatError("dataset contains no triplets", path=path)
    return triplets


def load_distraction_dataset(path: str | Path) -> list[DistractionInstance]:
    """Load correct captions plus categorized distractors per image."""
    instances = []
    seen: dict[str, int] = {}
    for lineno, record in _iter_jsonl(path):
        image_id = _require(record, "image_id", str, path, lineno)
        if image_id in seen:
            raise DataFormatError(
                f"duplicate image_id {image_id!r} (first seen on line {seen[image_id]})",
                path=path,
                line=lineno,
            )
        seen[image_id] = lineno
        raw_distractors = _require(record, "distractors", list, path, lineno)
        if not raw_distractors:
            raise DataFormatError("at least one distractor is required", path=path, line=lineno)
        distractors = []
        for item in raw_distractors:
            if not isinstance(item, dict):
                raise DataFormatError("distractors must be objects", path=path, line=lineno)
            caption = _caption(item, "caption", path, lineno)
            category = _require(item, "category", str, path, lineno)
            if category not in DISTRACTION_CATEGORIES:
                raise DataFormatError(
                    f"distractor category must be one of {DISTRACTION_CATEGORIES}, got {category!r}",
                    path=path,
                    line=lineno,
                )
            distractors.append(Distractor(caption, category))
        instances.append(
            DistractionInstance(
                image_id=image_id,
                correct=_caption_list(record, "correct", path, lineno, minimum=1),
                distractors=tuple(distractors),
            )
        )
    if not instances:
        raise DataFormatError("dataset contains no distraction instances", path=path)
    return instances


def load_external_scores(path: str | Path) -> dict[str, float]:
    """Read an ``instance_id,score`` CSV of externally computed scores."""
    scores: dict[str, float] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["instance_id", "score"]:
            raise DataFormatError(
                "external score files need the header 'instance_id,score'", path=path, line=1
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise DataFormatError("expected exactly two columns", path=path, line=lineno)
            instance_id, raw_score = row
            if instance_id in scores:
                raise DataFormatError(
                    f"duplicate instance_id {instance_id!r}", path=path, line=lineno
                )
            try:
                value = float(raw_score)
            except ValueError:
                raise DataFormatError(f"score {raw_score!r} is not a number", path=path, line=lineno)
            if not math.isfinite(value):
                raise DataFormatError("scores must be finite", path=path, line=lineno)
            scores[instance_id] = value
    if not scores:
        raise DataFormatError("external score file is empty", path=path)
    return scores
