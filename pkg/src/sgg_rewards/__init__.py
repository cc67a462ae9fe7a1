"""Reward and evaluation engine for end-to-end scene graph generation.

Parses structured scene-graph responses from multimodal LLMs, computes
graph-centric rewards (hard recall, relaxed recall, soft recall) and a
format-adherence reward, evaluates group-relative advantages with the
clipped surrogate objective, and scores predictions under the SGDET
protocol (Recall, mean Recall, AP@50, Failure Rate).
"""

from .dataset import (
    DatasetLoad,
    DatasetRecord,
    GroundTruthStore,
    MissingCategoriesError,
    PromptSpec,
    iter_dataset,
    load_class_list,
    load_dataset,
    render_prompt,
)
from .embedding import (
    DimensionMismatchError,
    EmbeddingTable,
    EmptyTableError,
    embed_label,
    label_similarity,
    load_table,
)
from .evaluation import (
    EmptyCorpusError,
    EvalConfig,
    EvalRecord,
    EvalReport,
    ap50,
    corpus_metrics,
    image_recall,
    record_from_prediction,
)
from .geometry import MissingImageDimsError, iou, l1_distance
from .graph import (
    BBox,
    GraphValidation,
    NodeIdError,
    NonNumericIndexError,
    NoSeparatorError,
    ObjectNode,
    RelationTriplet,
    SceneGraph,
    Violation,
    ViolationCode,
    clamp_to_image,
    format_node_id,
    graph_from_json_dict,
    graph_to_json_dict,
    normalize_label,
    parse_node_id,
    validate_graph,
)
from .grpo import (
    GroupSample,
    GroupTooSmallError,
    GrpoConfig,
    NonpositiveRatioError,
    advantages,
    clipped_term,
    grpo_objective,
    kl_estimate,
)
from .matching import CostWeights, MatchResult, cost_matrix, match_nodes, node_cost
from .parsing import (
    AnswerStructure,
    ParseOutcome,
    ParseStatus,
    extract_answer_block,
    format_reward,
    parse_response,
)
from .rewards import (
    RewardBreakdown,
    RewardConfig,
    RewardVariant,
    candidate_reward,
    greedy_triplet_matches,
    hard_recall,
    hard_recall_relax,
    soft_edge_rewards,
    soft_node_rewards,
)

__version__ = "0.1.0"

__all__ = [
    "AnswerStructure",
    "BBox",
    "CostWeights",
    "DatasetLoad",
    "DatasetRecord",
    "DimensionMismatchError",
    "EmbeddingTable",
    "EmptyCorpusError",
    "EmptyTableError",
    "EvalConfig",
    "EvalRecord",
    "EvalReport",
    "GraphValidation",
    "GroundTruthStore",
    "GroupSample",
    "GroupTooSmallError",
    "GrpoConfig",
    "MatchResult",
    "MissingCategoriesError",
    "MissingImageDimsError",
    "NodeIdError",
    "NonNumericIndexError",
    "NonpositiveRatioError",
    "NoSeparatorError",
    "ObjectNode",
    "ParseOutcome",
    "ParseStatus",
    "PromptSpec",
    "RelationTriplet",
    "RewardBreakdown",
    "RewardConfig",
    "RewardVariant",
    "SceneGraph",
    "Violation",
    "ViolationCode",
    "advantages",
    "ap50",
    "candidate_reward",
    "clamp_to_image",
    "clipped_term",
    "corpus_metrics",
    "cost_matrix",
    "embed_label",
    "extract_answer_block",
    "format_node_id",
    "format_reward",
    "graph_from_json_dict",
    "graph_to_json_dict",
    "greedy_triplet_matches",
    "grpo_objective",
    "hard_recall",
    "hard_recall_relax",
    "image_recall",
    "iou",
    "iter_dataset",
    "kl_estimate",
    "l1_distance",
    "label_similarity",
    "load_class_list",
    "load_dataset",
    "load_table",
    "match_nodes",
    "node_cost",
    "normalize_label",
    "parse_node_id",
    "parse_response",
    "record_from_prediction",
    "render_prompt",
    "soft_edge_rewards",
    "soft_node_rewards",
    "validate_graph",
]
