"""Scene-graph reward variants and per-candidate reward assembly.

Three recall-shaped variants are provided. Hard recall is binary credit on
exact label triples gated by IoU; the relaxed variant swaps exact label
equality for embedding-similarity products; soft recall densifies further
through optimal node matching with per-node and per-edge partial credit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .embedding import EmbeddingTable, label_similarity
from .geometry import iou, l1_distance
from .graph import SceneGraph, clamp_to_image
from .matching import CostWeights, MatchResult, match_nodes
from .parsing import ParseMode, format_reward, parse_response


class RewardVariant(str, Enum):
    HARD_RECALL = "hard"
    HARD_RECALL_RELAX = "relax"
    SOFT_RECALL = "soft"


@dataclass(frozen=True)
class RewardConfig:
    variant: RewardVariant = RewardVariant.HARD_RECALL
    iou_threshold: float = 0.5  # strict-greater comparison in rewards
    weights: CostWeights = field(default_factory=CostWeights)
    include_format: bool = True
    format_mode: ParseMode = "strict"

    def __post_init__(self) -> None:
        if not 0.0 < self.iou_threshold < 1.0:
            raise ValueError(f"iou_threshold must lie in (0, 1), got {self.iou_threshold}")


@dataclass
class RewardBreakdown:
    """Per-candidate reward components; total is their exact sum."""

    format: float = 0.0
    node_reward: float = 0.0
    edge_reward: float = 0.0
    total: float = 0.0
    matched_triplets: int = 0
    diagnostics: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "format": self.format,
            "node_reward": self.node_reward,
            "edge_reward": self.edge_reward,
            "total": self.total,
            "matched_triplets": self.matched_triplets,
            "diagnostics": list(self.diagnostics),
        }


def greedy_triplet_matches(
    pred: SceneGraph,
    gt: SceneGraph,
    iou_threshold: float,
    *,
    inclusive: bool = False,
    require_labels: bool = True,
) -> list[tuple[int, int]]:
    """Greedy one-to-one matching of predicted triplets to ground-truth ones.

    Predictions are scanned in output order; each claims the first
    still-unconsumed GT triplet whose subject and object boxes clear the IoU
    gate (strictly above the threshold, or at-least when ``inclusive``) and,
    when ``require_labels``, whose subject/predicate/object labels all match
    exactly. Consumption blocks duplicate predictions from farming one GT
    triplet.
    """
    gt_views = [(e, *gt.edge_endpoints(e)) for e in gt.edges]
    consumed = [False] * len(gt_views)
    matches: list[tuple[int, int]] = []
    gate = (lambda x: x >= iou_threshold) if inclusive else (lambda x: x > iou_threshold)

    for p_idx, p_edge in enumerate(pred.edges):
        p_subj, p_obj = pred.edge_endpoints(p_edge)
        for g_idx, (g_edge, g_subj, g_obj) in enumerate(gt_views):
            if consumed[g_idx]:
                continue
            if require_labels and (
                p_subj.class_label != g_subj.class_label
                or p_edge.predicate != g_edge.predicate
                or p_obj.class_label != g_obj.class_label
            ):
                continue
            if not gate(iou(p_subj.box, g_subj.box)):
                continue
            if not gate(iou(p_obj.box, g_obj.box)):
                continue
            consumed[g_idx] = True
            matches.append((p_idx, g_idx))
            break
    return matches


def hard_recall(
    pred: SceneGraph,
    gt: SceneGraph,
    iou_threshold: float = 0.5,
    *,
    diagnostics: Optional[list[str]] = None,
) -> float:
    """Fraction of GT triplets recovered with exact labels and IoU > threshold."""
    if not gt.edges:
        if diagnostics is not None:
            diagnostics.append("ground truth has no triplets; hard recall defined as 0")
        return 0.0
    matches = greedy_triplet_matches(pred, gt, iou_threshold)
    return len(matches) / len(gt.edges)


def hard_recall_relax(
    pred: SceneGraph,
    gt: SceneGraph,
    table: Optional[EmbeddingTable] = None,
    iou_threshold: float = 0.5,
    *,
    diagnostics: Optional[list[str]] = None,
) -> float:
    """Hard recall with the exact-label gate replaced by similarity credit.

    The matching loop is unchanged except that label equality is no longer
    required: any IoU-cleared GT triplet can be claimed, and the claim earns
    the product of the subject, predicate, and object label similarities
    (each clamped at 0 below, so two wrongs cannot multiply into a right).
    """
    if not gt.edges:
        if diagnostics is not None:
            diagnostics.append("ground truth has no triplets; relaxed recall defined as 0")
        return 0.0
    matches = greedy_triplet_matches(pred, gt, iou_threshold, require_labels=False)
    total = 0.0
    for p_idx, g_idx in matches:
        p_edge = pred.edges[p_idx]
        g_edge = gt.edges[g_idx]
        p_subj, p_obj = pred.edge_endpoints(p_edge)
        g_subj, g_obj = gt.edge_endpoints(g_edge)
        total += (
            _clamped_sim(table, p_subj.class_label, g_subj.class_label)
            * _clamped_sim(table, p_edge.predicate, g_edge.predicate)
            * _clamped_sim(table, p_obj.class_label, g_obj.class_label)
        )
    return total / len(gt.edges)


def soft_node_rewards(
    pred: SceneGraph,
    gt: SceneGraph,
    match: MatchResult,
    weights: CostWeights = CostWeights(),
    table: Optional[EmbeddingTable] = None,
    *,
    diagnostics: Optional[list[str]] = None,
) -> float:
    """Dense node credit over the matched pairs, divided by |V_gt|.

    A matched pred node earns lambda1*labelsim + lambda2*IoU +
    lambda3*exp(-L1); unmatched nodes earn 0. Label similarity is clamped
    at 0 below to keep the reward nonnegative. The denominator is the GT
    node count, so a perfect prediction set earns lambda1+lambda2+lambda3.
    """
    if not gt.nodes:
        if diagnostics is not None:
            diagnostics.append("ground truth has no nodes; node reward defined as 0")
        return 0.0
    dims = gt.image_dims or pred.image_dims
    total = 0.0
    for p_idx, g_idx, _ in match.pairs:
        v = pred.nodes[p_idx]
        g = gt.nodes[g_idx]
        term = weights.lambda1 * _clamped_sim(table, v.class_label, g.class_label)
        term += weights.lambda2 * iou(v.box, g.box)
        if weights.lambda3 > 0:
            term += weights.lambda3 * math.exp(
                -l1_distance(v.box, g.box, dims, normalized=weights.normalize_l1)
            )
        total += term
    return total / len(gt.nodes)


def soft_edge_rewards(
    pred: SceneGraph,
    gt: SceneGraph,
    match: MatchResult,
    table: Optional[EmbeddingTable] = None,
    *,
    diagnostics: Optional[list[str]] = None,
) -> float:
    """Dense edge credit over matched endpoints, divided by |E_gt|.

    A predicted edge <v_i, p, v_j> scores the product of the two endpoint
    label similarities and the predicate similarity iff both endpoints are
    matched and a GT edge exists between their matched counterparts; each
    similarity is clamped at 0 below. Every GT edge grants credit at most
    once: predictions are scanned in output order and claim the unconsumed
    GT edge with the highest predicate similarity (ties to the earliest).
    """
    if not gt.edges:
        if diagnostics is not None:
            diagnostics.append("ground truth has no triplets; edge reward defined as 0")
        return 0.0
    total, _ = _soft_edge_detail(pred, gt, match, table)
    return total / len(gt.edges)


def _soft_edge_detail(
    pred: SceneGraph,
    gt: SceneGraph,
    match: MatchResult,
    table: Optional[EmbeddingTable],
) -> tuple[float, int]:
    """Summed edge credit plus the number of predicted edges that claimed a GT edge."""
    pred_to_gt = match.pred_to_gt()

    gt_edges_at: dict[tuple[int, int], list[int]] = {}
    for idx, edge in enumerate(gt.edges):
        key = (gt.node_index(edge.subject_id), gt.node_index(edge.object_id))
        gt_edges_at.setdefault(key, []).append(idx)
    consumed = [False] * len(gt.edges)

    total = 0.0
    claimed = 0
    for p_edge in pred.edges:
        si = pred.node_index(p_edge.subject_id)
        oi = pred.node_index(p_edge.object_id)
        if si not in pred_to_gt or oi not in pred_to_gt:
            continue
        key = (pred_to_gt[si], pred_to_gt[oi])
        candidates = [g for g in gt_edges_at.get(key, ()) if not consumed[g]]
        if not candidates:
            continue
        best = max(
            candidates,
            key=lambda g: (_clamped_sim(table, p_edge.predicate, gt.edges[g].predicate), -g),
        )
        consumed[best] = True
        claimed += 1
        p_subj, p_obj = pred.edge_endpoints(p_edge)
        g_subj, g_obj = gt.edge_endpoints(gt.edges[best])
        total += (
            _clamped_sim(table, p_subj.class_label, g_subj.class_label)
            * _clamped_sim(table, p_obj.class_label, g_obj.class_label)
            * _clamped_sim(table, p_edge.predicate, gt.edges[best].predicate)
        )
    return total, claimed


def candidate_reward(
    response: str,
    gt: SceneGraph,
    config: RewardConfig = RewardConfig(),
    table: Optional[EmbeddingTable] = None,
) -> RewardBreakdown:
    """Parse a response and assemble its full reward breakdown.

    Parse failures zero the graph rewards but never raise; every failure is
    recorded in the diagnostics. The total is exactly format (when
    included) + node + edge.
    """
    breakdown = RewardBreakdown()
    outcome = parse_response(response, config.format_mode)
    breakdown.format = format_reward(outcome, config.format_mode)
    breakdown.diagnostics.extend(outcome.diagnostics)

    if outcome.ok:
        assert outcome.graph is not None
        pred = outcome.graph
        if gt.image_dims is not None:
            pred, clamp_violations = clamp_to_image(pred, *gt.image_dims)
            breakdown.diagnostics.extend(str(v) for v in clamp_violations)
        if config.variant is RewardVariant.HARD_RECALL:
            matches = greedy_triplet_matches(pred, gt, config.iou_threshold)
            breakdown.matched_triplets = len(matches)
            breakdown.edge_reward = (
                len(matches) / len(gt.edges) if gt.edges else 0.0
            )
            if not gt.edges:
                breakdown.diagnostics.append("ground truth has no triplets")
        elif config.variant is RewardVariant.HARD_RECALL_RELAX:
            matches = greedy_triplet_matches(
                pred, gt, config.iou_threshold, require_labels=False
            )
            breakdown.matched_triplets = len(matches)
            breakdown.edge_reward = hard_recall_relax(
                pred, gt, table, config.iou_threshold, diagnostics=breakdown.diagnostics
            )
        else:
            match = match_nodes(pred, gt, config.weights, table)
            breakdown.node_reward = soft_node_rewards(
                pred, gt, match, config.weights, table, diagnostics=breakdown.diagnostics
            )
            if gt.edges:
                credit, claimed = _soft_edge_detail(pred, gt, match, table)
                breakdown.edge_reward = credit / len(gt.edges)
                breakdown.matched_triplets = claimed
            else:
                breakdown.diagnostics.append("ground truth has no triplets")
    else:
        breakdown.diagnostics.append(f"parse failed: {outcome.status.value}")

    breakdown.total = (
        (breakdown.format if config.include_format else 0.0)
        + breakdown.node_reward
        + breakdown.edge_reward
    )
    return breakdown


def _clamped_sim(table: Optional[EmbeddingTable], a: str, b: str) -> float:
    return max(0.0, label_similarity(table, a, b))
