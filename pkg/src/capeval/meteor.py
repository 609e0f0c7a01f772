"""METEOR-style unigram alignment scoring.

A staged aligner (exact surface, stem equality, synonym lexicon) builds a
one-to-one candidate/reference alignment; the score is a weighted harmonic
mean of unigram precision and recall damped by a chunk-fragmentation
penalty. The official tool's beam-search aligner and paraphrase tables are
intentionally not reproduced.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .ngram_metrics import MetricScore, _nonempty_references
from .textprep import TokenizedCaption, stem


@dataclass(frozen=True)
class SynonymLexicon:
    """Token -> synset-id map; two tokens are synonyms iff ids match."""

    groups: Mapping[str, int]

    def synonyms(self, a: str, b: str) -> bool:
        if a == b:
            return True
        group = self.groups.get(a)
        return group is not None and group == self.groups.get(b)


def load_lexicon(path: str | Path) -> SynonymLexicon:
    """Read a lexicon file: each line is one group of mutually synonymous tokens.

    Groups sharing a token are merged so membership stays symmetric.
    """
    parent: dict[str, str] = {}

    def find(token: str) -> str:
        root = token
        while parent[root] != root:
            root = parent[root]
        while parent[token] != root:
            parent[token], token = root, parent[token]
        return root

    with open(path, encoding="utf-8") as fh:
        for line in fh:
            tokens = [t.lower() for t in line.split() if not t.startswith("#")]
            if line.lstrip().startswith("#") or not tokens:
                continue
            for token in tokens:
                parent.setdefault(token, token)
            head = find(tokens[0])
            for token in tokens[1:]:
                parent[find(token)] = head
    roots = {token: find(token) for token in parent}
    ids = {root: i for i, root in enumerate(sorted(set(roots.values())))}
    return SynonymLexicon({token: ids[root] for token, root in roots.items()})


@dataclass(frozen=True)
class Alignment:
    """One-to-one (candidate_index, reference_index) pairs, candidate-sorted."""

    pairs: tuple[tuple[int, int], ...]
    chunks: int


def _chunk_count(pairs: Sequence[tuple[int, int]]) -> int:
    if not pairs:
        return 0
    ordered = sorted(pairs)
    chunks = 1
    for (c0, r0), (c1, r1) in zip(ordered, ordered[1:]):
        if c1 != c0 + 1 or r1 != r0 + 1:
            chunks += 1
    return chunks


def align(
    candidate: TokenizedCaption,
    reference: TokenizedCaption,
    lexicon: SynonymLexicon | None = None,
) -> Alignment:
    """Staged greedy alignment minimizing the running chunk count.

    Stages run in order (exact, stem, synonym); each stage walks the
    candidate left to right and, per token, picks the unmatched reference
    position that keeps the chunk count lowest (ties to the smallest index).
    """
    stages = [
        lambda c, r: c == r,
        lambda c, r: stem(c) == stem(r),
    ]
    if lexicon is not None:
        stages.append(lexicon.synonyms)

    pairs: list[tuple[int, int]] = []
    matched_cand: set[int] = set()
    matched_ref: set[int] = set()
    for matches in stages:
        for i, cand_tok in enumerate(candidate):
            if i in matched_cand:
                continue
            options = [
                j
                for j, ref_tok in enumerate(reference)
                if j not in matched_ref and matches(cand_tok, ref_tok)
            ]
            if not options:
                continue
            best_j = min(options, key=lambda j: (_chunk_count(pairs + [(i, j)]), j))
            pairs.append((i, best_j))
            matched_cand.add(i)
            matched_ref.add(best_j)
    pairs.sort()
    return Alignment(tuple(pairs), _chunk_count(pairs))


def meteor(
    candidate: TokenizedCaption,
    references: Sequence[TokenizedCaption],
    lexicon: SynonymLexicon | None = None,
    alpha: float = 0.9,
    beta_exp: float = 3.0,
    gamma: float = 0.5,
) -> MetricScore:
    """METEOR-lite score, maximised over references."""
    refs = _nonempty_references(references)
    if not candidate:
        return MetricScore(0.0, "meteor")
    best = 0.0
    for ref in refs:
        alignment = align(candidate, ref, lexicon)
        matches = len(alignment.pairs)
        if matches == 0:
            continue
        precision = matches / len(candidate)
        recall = matches / len(ref)
        f_mean = (precision * recall) / (alpha * precision + (1.0 - alpha) * recall)
        penalty = gamma * (alignment.chunks / matches) ** beta_exp
        best = max(best, f_mean * (1.0 - penalty))
    return MetricScore(best, "meteor")
