"""Word Mover's Distance: nBOW documents, exact EMD, and similarity scores.

The earth mover's distance between two nBOW documents is solved exactly as
a balanced transportation problem with a tree-basis simplex. Entering and
leaving variables follow Bland's smallest-index rule, so the pivot sequence
cannot cycle; optimality is certified through the dual solution before any
result is returned.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .embeddings import EmbeddingTable
from .ngram_metrics import MetricScore
from .textprep import StopwordList, TokenizedCaption, remove_stopwords

FlowMatrix = dict[tuple[int, int], float]

MARGINAL_TOL = 1e-9
_ENTER_TOL = 1e-11


class EmptyDocumentError(ValueError):
    """Every token of a document was removed (stopword or out-of-vocabulary)."""


class SolverConvergenceError(RuntimeError):
    """The transportation solver failed to certify an optimum."""


@dataclass(frozen=True)
class NbowDocument:
    """Normalized bag of words over embedded tokens, in sorted word order.

    Sorting makes the document (and everything computed from it) invariant
    under token permutations of the source caption.
    """

    words: tuple[str, ...]
    weights: tuple[float, ...]
    dropped: tuple[str, ...] = ()


@dataclass(frozen=True)
class WmdResult:
    distance: float
    similarity: float
    flow: FlowMatrix


def nbow(
    caption: TokenizedCaption, table: EmbeddingTable, stop: StopwordList
) -> NbowDocument:
    """Stopword-filtered, vocabulary-restricted normalized word counts."""
    kept = remove_stopwords(caption, stop)
    dropped = tuple(t for t in kept if t not in table)
    counts = Counter(t for t in kept if t in table)
    if not counts:
        raise EmptyDocumentError(
            f"no embedded non-stopword tokens in caption {list(caption)!r}"
        )
    words = tuple(sorted(counts))
    total = sum(counts.values())
    weights = tuple(counts[w] / total for w in words)
    return NbowDocument(words, weights, dropped)


def _cost_matrix(source: NbowDocument, target: NbowDocument, table: EmbeddingTable) -> np.ndarray:
    src = np.stack([table.vector(w) for w in source.words])
    tgt = np.stack([table.vector(w) for w in target.words])
    diff = src[:, None, :] - tgt[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def _northwest_corner(a: Sequence[float], b: Sequence[float]) -> FlowMatrix:
    m, n = len(a), len(b)
    a_rem = list(a)
    b_rem = list(b)
    flows: FlowMatrix = {}
    i = j = 0
    while True:
        quantity = min(a_rem[i], b_rem[j])
        flows[(i, j)] = quantity
        a_rem[i] -= quantity
        b_rem[j] -= quantity
        if i == m - 1 and j == n - 1:
            break
        if i == m - 1:
            j += 1
        elif j == n - 1:
            i += 1
        elif a_rem[i] <= b_rem[j]:
            i += 1
        else:
            j += 1
    return flows


def _compute_duals(
    basis_rows: list[set[int]], basis_cols: list[set[int]], cost: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    m, n = cost.shape
    u = np.full(m, np.nan)
    v = np.full(n, np.nan)
    u[0] = 0.0
    stack: list[tuple[bool, int]] = [(True, 0)]
    while stack:
        is_row, idx = stack.pop()
        if is_row:
            for j in basis_rows[idx]:
                if math.isnan(v[j]):
                    v[j] = cost[idx, j] - u[idx]
                    stack.append((False, j))
        else:
            for i in basis_cols[idx]:
                if math.isnan(u[i]):
                    u[i] = cost[i, idx] - v[idx]
                    stack.append((True, i))
    if np.isnan(u).any() or np.isnan(v).any():
        raise SolverConvergenceError("basis graph is not a spanning tree")
    return u, v


def _cycle_path(
    basis_rows: list[set[int]], basis_cols: list[set[int]], enter: tuple[int, int]
) -> list[tuple[int, int]]:
    """Cells on the tree path from row-node enter[0] to column-node enter[1]."""
    start = (True, enter[0])
    goal = (False, enter[1])
    parents: dict[tuple[bool, int], tuple[bool, int]] = {start: start}
    queue = [start]
    while queue:
        node = queue.pop()
        if node == goal:
            break
        is_row, idx = node
        neighbours = basis_rows[idx] if is_row else basis_cols[idx]
        for other in neighbours:
            nxt = (not is_row, other)
            if nxt not in parents:
                parents[nxt] = node
                queue.append(nxt)
    if goal not in parents:
        raise SolverConvergenceError("entering cell cannot be closed into a cycle")
    path_nodes = [goal]
    while path_nodes[-1] != start:
        path_nodes.append(parents[path_nodes[-1]])
    path_nodes.reverse()
    cells = []
    for (is_row, idx), (_, nxt_idx) in zip(path_nodes, path_nodes[1:]):
        cells.append((idx, nxt_idx) if is_row else (nxt_idx, idx))
    return cells


def _transportation_simplex(
    a: Sequence[float], b: Sequence[float], cost: np.ndarray
) -> tuple[FlowMatrix, np.ndarray, np.ndarray]:
    m, n = cost.shape
    flows = _northwest_corner(a, b)
    basis_rows: list[set[int]] = [set() for _ in range(m)]
    basis_cols: list[set[int]] = [set() for _ in range(n)]
    for i, j in flows:
        basis_rows[i].add(j)
        basis_cols[j].add(i)

    max_pivots = 2000 + 50 * m * n
    for _ in range(max_pivots):
        u, v = _compute_duals(basis_rows, basis_cols, cost)
        reduced = cost - u[:, None] - v[None, :]
        negative = np.flatnonzero(reduced.ravel() < -_ENTER_TOL)
        if negative.size == 0:
            return flows, u, v
        enter = (int(negative[0]) // n, int(negative[0]) % n)

        path = _cycle_path(basis_rows, basis_cols, enter)
        minus = path[0::2]
        plus = [enter] + path[1::2]
        theta, leave = min((flows[c], c[0] * n + c[1]) for c in minus)
        theta = max(theta, 0.0)
        leave_cell = (leave // n, leave % n)

        for c in plus:
            flows[c] = flows.get(c, 0.0) + theta
        for c in minus:
            flows[c] = max(flows[c] - theta, 0.0)
        del flows[leave_cell]
        basis_rows[leave_cell[0]].discard(leave_cell[1])
        basis_cols[leave_cell[1]].discard(leave_cell[0])
        basis_rows[enter[0]].add(enter[1])
        basis_cols[enter[1]].add(enter[0])
    raise SolverConvergenceError(f"no optimum after {max_pivots} pivots")


def _certify(
    flows: FlowMatrix,
    u: np.ndarray,
    v: np.ndarray,
    a: Sequence[float],
    b: Sequence[float],
    cost: np.ndarray,
) -> None:
    reduced = cost - u[:, None] - v[None, :]
    if float(reduced.min()) < -MARGINAL_TOL:
        raise SolverConvergenceError("dual feasibility violated at optimum")
    slack = max((flow * abs(reduced[c]) for c, flow in flows.items()), default=0.0)
    if slack > MARGINAL_TOL:
        raise SolverConvergenceError("complementary slackness violated at optimum")
    row_sums = np.zeros(len(a))
    col_sums = np.zeros(len(b))
    for (i, j), flow in flows.items():
        if flow < -MARGINAL_TOL:
            raise SolverConvergenceError(f"negative flow at {(i, j)}")
        row_sums[i] += flow
        col_sums[j] += flow
    if np.max(np.abs(row_sums - np.asarray(a))) > MARGINAL_TOL:
        raise SolverConvergenceError("row marginals violated at optimum")
    if np.max(np.abs(col_sums - np.asarray(b))) > MARGINAL_TOL:
        raise SolverConvergenceError("column marginals violated at optimum")


def emd(
    source: NbowDocument, target: NbowDocument, table: EmbeddingTable
) -> tuple[float, FlowMatrix]:
    """Exact minimum-cost flow between two nBOW documents.

    Returns the optimal transport cost and the flow matrix realising it;
    the flow satisfies both marginal constraints within ``MARGINAL_TOL``.
    """
    if not source.words or not target.words:
        raise EmptyDocumentError("cannot transport an empty document")
    cost = _cost_matrix(source, target, table)
    flows, u, v = _transportation_simplex(source.weights, target.weights, cost)
    flows = {c: max(0.0, f) for c, f in flows.items()}
    _certify(flows, u, v, source.weights, target.weights, cost)
    positive = {c: f for c, f in flows.items() if f > 0.0}
    distance = sum(f * float(cost[c]) for c, f in positive.items())
    return distance, positive


def wmd_result(
    source: NbowDocument,
    target: NbowDocument,
    table: EmbeddingTable,
    scale: float = 1.0,
) -> WmdResult:
    distance, flow = emd(source, target, table)
    return WmdResult(distance, math.exp(-scale * distance), flow)


def wmd_similarity(
    candidate: TokenizedCaption,
    references: Sequence[TokenizedCaption],
    table: EmbeddingTable,
    stop: StopwordList,
    scale: float = 1.0,
    aggregate: str = "max",
) -> MetricScore:
    """Negative-exponential WMD similarity against a reference set.

    A candidate with an empty nBOW scores 0 and is flagged degenerate;
    references with empty nBOWs are skipped. All-degenerate reference sets
    raise :class:`EmptyDocumentError`.
    """
    if aggregate not in ("max", "mean"):
        raise ValueError(f"unknown aggregate {aggregate!r}")
    if not references:
        raise ValueError("at least one reference is required")
    try:
        cand_doc = nbow(candidate, table, stop)
    except EmptyDocumentError:
        return MetricScore(0.0, "wmd", degenerate=True)
    similarities = []
    for reference in references:
        try:
            ref_doc = nbow(reference, table, stop)
        except EmptyDocumentError:
            continue
        distance, _ = emd(cand_doc, ref_doc, table)
        similarities.append(math.exp(-scale * distance))
    if not similarities:
        raise EmptyDocumentError("every reference has an empty nBOW")
    value = max(similarities) if aggregate == "max" else sum(similarities) / len(similarities)
    return MetricScore(value, "wmd")


def export_flow_tsv(
    source: NbowDocument,
    target: NbowDocument,
    flow: FlowMatrix,
    table: EmbeddingTable,
    out: IO[str],
) -> None:
    """Write a word-level matching report: (i_token, j_token, flow, cost)."""
    from .embeddings import word_cost

    out.write("i_token\tj_token\tflow\tcost\n")
    for (i, j) in sorted(flow):
        w1, w2 = source.words[i], target.words[j]
        out.write(f"{w1}\t{w2}\t{flow[(i, j)]:.6g}\t{word_cost(table, w1, w2):.6g}\n")
