"""One-to-one node assignment between predicted and ground-truth graphs.

The cost couples label similarity, IoU, and box distance; the assignment is
the DETR-style minimum-cost bipartite matching over the rectangular cost
matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .embedding import EmbeddingTable, label_similarity
from .geometry import iou, l1_distance
from .graph import ObjectNode, SceneGraph


@dataclass(frozen=True)
class CostWeights:
    """Weights for the three matching-cost terms.

    The weights are unreported upstream; with the L1 term normalized by
    image size all three terms are O(1), so uniform defaults are neutral.
    ``normalize_l1`` switches between normalized and raw-pixel box distance.
    """

    lambda1: float = 1.0  # label similarity
    lambda2: float = 1.0  # IoU
    lambda3: float = 1.0  # L1 box distance
    normalize_l1: bool = True

    def __post_init__(self) -> None:
        if min(self.lambda1, self.lambda2, self.lambda3) < 0:
            raise ValueError("cost weights must be nonnegative")
        if self.lambda1 + self.lambda2 + self.lambda3 <= 0:
            raise ValueError("at least one cost weight must be positive")


@dataclass(frozen=True)
class MatchResult:
    """Partial injection between pred and gt node indices with per-pair costs."""

    pairs: tuple[tuple[int, int, float], ...]
    unmatched_pred: tuple[int, ...]
    unmatched_gt: tuple[int, ...]

    def pred_to_gt(self) -> dict[int, int]:
        return {p: g for p, g, _ in self.pairs}

    @property
    def total_cost(self) -> float:
        return sum(cost for _, _, cost in self.pairs)


def node_cost(
    v: ObjectNode,
    g: ObjectNode,
    weights: CostWeights,
    table: Optional[EmbeddingTable] = None,
    image_dims: Optional[tuple[float, float]] = None,
) -> float:
    """lambda1*(1 - labelsim) + lambda2*(1 - IoU) + lambda3*L1.

    Negative label similarities are passed through unclamped; the matcher
    only needs relative order. The L1 term is skipped entirely when its
    weight is zero, so image dimensions are only required when they matter.
    """
    cost = 0.0
    if weights.lambda1 > 0:
        cost += weights.lambda1 * (1.0 - label_similarity(table, v.class_label, g.class_label))
    if weights.lambda2 > 0:
        cost += weights.lambda2 * (1.0 - iou(v.box, g.box))
    if weights.lambda3 > 0:
        cost += weights.lambda3 * l1_distance(
            v.box, g.box, image_dims, normalized=weights.normalize_l1
        )
    return cost


def cost_matrix(
    pred: SceneGraph,
    gt: SceneGraph,
    weights: CostWeights,
    table: Optional[EmbeddingTable] = None,
) -> np.ndarray:
    dims = gt.image_dims or pred.image_dims
    matrix = np.empty((len(pred.nodes), len(gt.nodes)), dtype=np.float64)
    for i, v in enumerate(pred.nodes):
        for j, g in enumerate(gt.nodes):
            matrix[i, j] = node_cost(v, g, weights, table, dims)
    return matrix


def solve_assignment(matrix: np.ndarray) -> MatchResult:
    """Minimum-cost partial injection of size min(M, N) over a cost matrix.

    Among rows with byte-identical costs (duplicate-object spam) the
    assignment is canonicalized so the lowest row indices win, keeping
    rewards reproducible run to run.
    """
    m, n = matrix.shape
    if m == 0 or n == 0:
        return MatchResult((), tuple(range(m)), tuple(range(n)))
    row_ind, col_ind = linear_sum_assignment(matrix)
    assignment = dict(zip(row_ind.tolist(), col_ind.tolist()))
    assignment = _prefer_lowest_duplicate_rows(matrix, assignment)

    pairs = tuple(
        (i, assignment[i], float(matrix[i, assignment[i]])) for i in sorted(assignment)
    )
    matched_gt = set(assignment.values())
    unmatched_pred = tuple(i for i in range(m) if i not in assignment)
    unmatched_gt = tuple(j for j in range(n) if j not in matched_gt)
    return MatchResult(pairs, unmatched_pred, unmatched_gt)


def match_nodes(
    pred: SceneGraph,
    gt: SceneGraph,
    weights: CostWeights = CostWeights(),
    table: Optional[EmbeddingTable] = None,
) -> MatchResult:
    """Minimum-cost one-to-one assignment of pred nodes to gt nodes.

    Exactly min(M, N) pairs are produced; either side may be empty.
    """
    if not pred.nodes or not gt.nodes:
        return MatchResult((), tuple(range(len(pred.nodes))), tuple(range(len(gt.nodes))))
    return solve_assignment(cost_matrix(pred, gt, weights, table))


def _prefer_lowest_duplicate_rows(
    matrix: np.ndarray, assignment: dict[int, int]
) -> dict[int, int]:
    """Reassign columns within groups of identical cost rows to the lowest rows.

    Identical rows arise from repeated predicted nodes; any permutation of
    their assigned columns has equal total cost, so the solver's arbitrary
    pick is replaced by a deterministic one.
    """
    groups: dict[bytes, list[int]] = {}
    for i in range(matrix.shape[0]):
        groups.setdefault(matrix[i].tobytes(), []).append(i)
    result = dict(assignment)
    for rows in groups.values():
        if len(rows) < 2:
            continue
        cols = sorted(result[i] for i in rows if i in result)
        if not cols:
            continue
        for i in rows:
            result.pop(i, None)
        for i, col in zip(sorted(rows), cols):
            result[i] = col
    return result
