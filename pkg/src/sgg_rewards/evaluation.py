"""Corpus-level SGDET evaluation: Recall, mean Recall, AP@50, Failure Rate.

A predicted triplet counts when subject/predicate/object labels match the
ground truth and both boxes reach the IoU threshold (at-least comparison
here, per the evaluation protocol; the reward path uses strictly-greater).
Corpus Recall is micro-averaged (sum TP / sum GT); mean Recall macro-averages
per-predicate recalls.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .geometry import iou
from .graph import BBox, SceneGraph, clamp_to_image, graph_from_json_dict, normalize_label
from .parsing import ParseMode, ParseOutcome, ParseStatus, parse_response
from .rewards import greedy_triplet_matches


class EmptyCorpusError(ValueError):
    pass


@dataclass(frozen=True)
class EvalConfig:
    iou_threshold: float = 0.5       # at-least comparison
    top_k: Optional[int] = None      # None = unlimited (unordered LLM output sets)
    parse_mode: ParseMode = "lenient"
    predicate_vocabulary: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        if not 0.0 < self.iou_threshold < 1.0:
            raise ValueError(f"iou_threshold must lie in (0, 1), got {self.iou_threshold}")
        if self.top_k is not None and self.top_k < 1:
            raise ValueError(f"top_k must be >= 1 when finite, got {self.top_k}")


@dataclass
class PredicateRecall:
    recall: float
    gt_count: int


@dataclass
class EvalReport:
    recall: float
    mean_recall: float
    per_predicate_recall: dict[str, PredicateRecall]
    ap50: float
    failure_rate: float
    images_total: int
    images_failed: int
    images_empty_gt: int
    recall_image_macro: float
    diagnostics: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "recall": self.recall,
            "mean_recall": self.mean_recall,
            "ap50": self.ap50,
            "failure_rate": self.failure_rate,
            "images_total": self.images_total,
            "images_failed": self.images_failed,
            "images_empty_gt": self.images_empty_gt,
            "recall_image_macro": self.recall_image_macro,
            "per_predicate_recall": {
                pred: {"recall": pr.recall, "gt_count": pr.gt_count}
                for pred, pr in sorted(self.per_predicate_recall.items())
            },
            "diagnostics": list(self.diagnostics),
        }


@dataclass
class EvalRecord:
    """One prediction joined with its ground truth."""

    image_id: str
    outcome: ParseOutcome
    gt: SceneGraph

    @property
    def failed(self) -> bool:
        return not self.outcome.ok


def record_from_prediction(payload: dict, gt: SceneGraph, cfg: EvalConfig) -> EvalRecord:
    """Build an EvalRecord from a predictions-file entry.

    Accepts either {"image_id", "response_text"} (parsed with the configured
    mode) or {"image_id", "graph"} with an already-structured scene graph.
    """
    image_id = str(payload.get("image_id", ""))
    if "response_text" in payload:
        outcome = parse_response(str(payload["response_text"]), cfg.parse_mode)
    elif "graph" in payload and isinstance(payload["graph"], dict):
        validation = graph_from_json_dict(payload["graph"])
        if validation.graph is not None:
            outcome = ParseOutcome(ParseStatus.OK, graph=validation.graph)
            outcome.diagnostics.extend(str(v) for v in validation.violations)
        else:
            outcome = ParseOutcome(ParseStatus.SCHEMA_VIOLATION)
            outcome.diagnostics.extend(str(v) for v in validation.violations)
    else:
        outcome = ParseOutcome(ParseStatus.NO_ANSWER_BLOCK)
        outcome.diagnostics.append("prediction record has neither response_text nor graph")
    return EvalRecord(image_id, outcome, gt)


def image_recall(
    pred: SceneGraph, gt: SceneGraph, cfg: EvalConfig = EvalConfig()
) -> tuple[dict[str, int], dict[str, int]]:
    """Per-predicate true-positive and ground-truth counts for one image."""
    gt_per_predicate: dict[str, int] = {}
    for edge in gt.edges:
        gt_per_predicate[edge.predicate] = gt_per_predicate.get(edge.predicate, 0) + 1

    if cfg.top_k is not None and len(pred.edges) > cfg.top_k:
        pred = SceneGraph(
            pred.nodes, pred.edges[: cfg.top_k], pred.image_width, pred.image_height
        )
    matches = greedy_triplet_matches(pred, gt, cfg.iou_threshold, inclusive=True)

    tp_per_predicate: dict[str, int] = {}
    for _, g_idx in matches:
        predicate = gt.edges[g_idx].predicate
        tp_per_predicate[predicate] = tp_per_predicate.get(predicate, 0) + 1
    return tp_per_predicate, gt_per_predicate


_EMPTY_GRAPH = SceneGraph((), ())


def corpus_metrics(
    records: Iterable[EvalRecord], cfg: EvalConfig = EvalConfig()
) -> EvalReport:
    """Aggregate SGDET metrics over a prediction stream.

    Failed parses contribute zero true positives but keep their full GT
    counts; images whose ground truth has no triplets are excluded from the
    recall denominators yet still count toward the failure rate.
    """
    images_total = 0
    images_failed = 0
    images_empty_gt = 0
    tp_by_predicate: dict[str, int] = {}
    gt_by_predicate: dict[str, int] = {}
    per_image_recalls: list[float] = []
    pred_nodes: list[tuple[str, str, BBox]] = []
    gt_nodes: list[tuple[str, str, BBox]] = []
    diagnostics: list[str] = []

    for record in records:
        images_total += 1
        gt = record.gt
        pred = _EMPTY_GRAPH
        if record.outcome.ok and record.outcome.graph is not None:
            pred = record.outcome.graph
            if gt.image_dims is not None:
                pred, _ = clamp_to_image(pred, *gt.image_dims)
        else:
            images_failed += 1

        for node in gt.nodes:
            gt_nodes.append((record.image_id, node.class_label, node.box))
        for node in pred.nodes:
            pred_nodes.append((record.image_id, node.class_label, node.box))

        if not gt.edges:
            images_empty_gt += 1
            continue
        tp_map, gt_map = image_recall(pred, gt, cfg)
        for predicate, count in gt_map.items():
            gt_by_predicate[predicate] = gt_by_predicate.get(predicate, 0) + count
        for predicate, count in tp_map.items():
            tp_by_predicate[predicate] = tp_by_predicate.get(predicate, 0) + count
        image_tp = sum(tp_map.values())
        image_gt = sum(gt_map.values())
        per_image_recalls.append(100.0 * image_tp / image_gt)

    if images_total == 0:
        raise EmptyCorpusError("no evaluation records")

    per_predicate, mean_recall = _bin_predicates(
        tp_by_predicate, gt_by_predicate, cfg.predicate_vocabulary, diagnostics
    )

    gt_total = sum(gt_by_predicate.values())
    tp_total = sum(tp_by_predicate.values())
    if gt_total > 0:
        recall = 100.0 * tp_total / gt_total
    else:
        recall = 0.0
        diagnostics.append("corpus has no ground-truth triplets; recall defined as 0")

    recall_image_macro = (
        sum(per_image_recalls) / len(per_image_recalls) if per_image_recalls else 0.0
    )

    return EvalReport(
        recall=recall,
        mean_recall=mean_recall,
        per_predicate_recall=per_predicate,
        ap50=ap50(pred_nodes, gt_nodes, cfg),
        failure_rate=100.0 * images_failed / images_total,
        images_total=images_total,
        images_failed=images_failed,
        images_empty_gt=images_empty_gt,
        recall_image_macro=recall_image_macro,
        diagnostics=diagnostics,
    )


def _bin_predicates(
    tp_by_predicate: dict[str, int],
    gt_by_predicate: dict[str, int],
    vocabulary: Optional[tuple[str, ...]],
    diagnostics: list[str],
) -> tuple[dict[str, PredicateRecall], float]:
    if vocabulary is not None:
        bins = [normalize_label(p) for p in vocabulary]
        outside = sum(
            count for pred, count in gt_by_predicate.items() if pred not in set(bins)
        )
        if outside:
            diagnostics.append(
                f"{outside} ground-truth triplets use predicates outside the vocabulary"
            )
    else:
        bins = sorted(gt_by_predicate)

    per_predicate: dict[str, PredicateRecall] = {}
    macro_values: list[float] = []
    for predicate in bins:
        gt_count = gt_by_predicate.get(predicate, 0)
        if gt_count > 0:
            value = 100.0 * tp_by_predicate.get(predicate, 0) / gt_count
            macro_values.append(value)
        else:
            value = 0.0
        per_predicate[predicate] = PredicateRecall(value, gt_count)
    mean_recall = sum(macro_values) / len(macro_values) if macro_values else 0.0
    return per_predicate, mean_recall


def ap50(
    pred_nodes: Sequence[tuple[str, str, BBox]],
    gt_nodes: Sequence[tuple[str, str, BBox]],
    cfg: EvalConfig = EvalConfig(),
    confidences: Optional[Sequence[float]] = None,
) -> float:
    """Class-averaged average precision for object boxes at the IoU threshold.

    Node streams are (image_id, class_label, box) tuples. Confidences
    default to 1.0 (structured LLM outputs carry none), so ranking falls
    back to emission order, which keeps the metric deterministic. The
    precision-recall curve is integrated with all-points interpolation, and
    classes with at least one GT instance contribute to the mean.
    """
    if confidences is None:
        confidences = [1.0] * len(pred_nodes)
    elif len(confidences) != len(pred_nodes):
        raise ValueError("one confidence per predicted node is required")

    gt_by_class: dict[str, dict[str, list[BBox]]] = {}
    for image_id, label, box in gt_nodes:
        gt_by_class.setdefault(label, {}).setdefault(image_id, []).append(box)

    preds_by_class: dict[str, list[tuple[float, int, str, BBox]]] = {}
    for order, ((image_id, label, box), conf) in enumerate(zip(pred_nodes, confidences)):
        preds_by_class.setdefault(label, []).append((conf, order, image_id, box))

    class_aps: list[float] = []
    for label, gt_images in gt_by_class.items():
        n_gt = sum(len(boxes) for boxes in gt_images.values())
        ranked = sorted(preds_by_class.get(label, ()), key=lambda p: (-p[0], p[1]))
        matched = {image_id: [False] * len(boxes) for image_id, boxes in gt_images.items()}

        tp_flags: list[bool] = []
        for _, _, image_id, box in ranked:
            candidates = gt_images.get(image_id, ())
            best_iou, best_idx = 0.0, -1
            for idx, gt_box in enumerate(candidates):
                if matched[image_id][idx]:
                    continue
                value = iou(box, gt_box)
                if value > best_iou:
                    best_iou, best_idx = value, idx
            if best_idx >= 0 and best_iou >= cfg.iou_threshold:
                matched[image_id][best_idx] = True
                tp_flags.append(True)
            else:
                tp_flags.append(False)
        class_aps.append(_average_precision(tp_flags, n_gt))

    if not class_aps:
        return 0.0
    return 100.0 * sum(class_aps) / len(class_aps)


def _average_precision(tp_flags: Sequence[bool], n_gt: int) -> float:
    """All-points interpolated AP from ranked TP flags.

    Accumulates integer true-positive deltas against the precision envelope
    and scales by 1/n_gt once, so a perfect ranking yields exactly 1.0.
    """
    if n_gt == 0 or not tp_flags:
        return 0.0
    precisions: list[float] = []
    tp = 0
    for rank, flag in enumerate(tp_flags, start=1):
        if flag:
            tp += 1
        precisions.append(tp / rank)
    envelope = list(precisions)
    for i in range(len(envelope) - 2, -1, -1):
        envelope[i] = max(envelope[i], envelope[i + 1])
    credit = 0.0
    for flag, env in zip(tp_flags, envelope):
        if flag:
            credit += env
    return credit / n_gt
