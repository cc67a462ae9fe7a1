"""In-process bindings for RL training loops.

Loads the ground-truth store and embedding table once per process and
exposes batch entry points returning plain floats — no serialization, no
subprocesses, numerically identical to the CLI on the same inputs. The
engine state is immutable after ``init``, so calls are safe from multiple
threads; per-call configs are value parameters.

    import sggr_bindings as rb

    rb.init("gt.jsonl", "vectors.txt", {"variant": "soft"})
    totals = rb.batch_reward(responses, image_ids)
    advs = rb.batch_advantages([[r.total for r in group] for group in groups])
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

from sgg_rewards import (
    CostWeights,
    EvalConfig,
    GroundTruthStore,
    GroupSample,
    GroupTooSmallError,
    GrpoConfig,
    RewardConfig,
    RewardVariant,
    advantages,
    candidate_reward,
    corpus_metrics,
    record_from_prediction,
)
from sgg_rewards import grpo_objective as _grpo_objective
from sgg_rewards import load_table
from sgg_rewards.evaluation import EmptyCorpusError

__all__ = [
    "BatchRewardRequest",
    "Engine",
    "ItemError",
    "RewardTuple",
    "batch_advantages",
    "batch_reward",
    "engine",
    "evaluate",
    "grpo_objective",
    "init",
]

#: (total, format, node, edge)
RewardTuple = tuple[float, float, float, float]


@dataclass(frozen=True)
class ItemError:
    """Per-item failure marker; batch calls never abort the process."""

    error: str


@dataclass(frozen=True)
class BatchRewardRequest:
    responses: tuple[str, ...]
    image_ids: tuple[str, ...]
    config: Optional[RewardConfig] = None

    def __post_init__(self) -> None:
        if len(self.responses) != len(self.image_ids):
            raise ValueError(
                f"{len(self.responses)} responses for {len(self.image_ids)} image ids"
            )

    @staticmethod
    def of(
        responses: Sequence[str],
        image_ids: Sequence[str],
        config: Optional[RewardConfig] = None,
    ) -> "BatchRewardRequest":
        return BatchRewardRequest(tuple(responses), tuple(image_ids), config)


def _reward_config(config: Union[RewardConfig, dict, None]) -> RewardConfig:
    if config is None:
        return RewardConfig()
    if isinstance(config, RewardConfig):
        return config
    weights = CostWeights(
        config.get("lambda1", 1.0),
        config.get("lambda2", 1.0),
        config.get("lambda3", 1.0),
    )
    return RewardConfig(
        variant=RewardVariant(config.get("variant", "hard")),
        iou_threshold=config.get("iou_threshold", 0.5),
        weights=weights,
        include_format=config.get("include_format", True),
        format_mode=config.get("format_mode", "strict"),
    )


class Engine:
    """Init-once reward/eval engine; all state is read-only after construction."""

    def __init__(
        self,
        gt_path: str,
        embeddings_path: Optional[str] = None,
        config: Union[RewardConfig, dict, None] = None,
    ):
        self.store = GroundTruthStore.from_file(gt_path)
        self.table = load_table(embeddings_path) if embeddings_path else None
        self.reward_config = _reward_config(config)

    def batch_reward(
        self, request: BatchRewardRequest
    ) -> list[Union[RewardTuple, ItemError]]:
        config = request.config or self.reward_config
        results: list[Union[RewardTuple, ItemError]] = []
        for response, image_id in zip(request.responses, request.image_ids):
            record = self.store.get(image_id)
            if record is None:
                results.append(ItemError(f"unknown image_id {image_id!r}"))
                continue
            b = candidate_reward(response, record.gt, config, self.table)
            results.append((b.total, b.format, b.node_reward, b.edge_reward))
        return results

    def batch_advantages(
        self, reward_groups: Sequence[Sequence[float]], std_floor: float = 1e-6
    ) -> list[Union[list[float], ItemError]]:
        results: list[Union[list[float], ItemError]] = []
        for group in reward_groups:
            try:
                results.append(advantages([float(r) for r in group], std_floor))
            except (GroupTooSmallError, TypeError, ValueError) as exc:
                results.append(ItemError(str(exc)))
        return results

    def grpo_objective(
        self,
        rewards: Sequence[float],
        ratios: Sequence[Sequence[float]],
        ref_ratios: Optional[Sequence[Sequence[float]]] = None,
        config: Optional[GrpoConfig] = None,
    ) -> float:
        sample = GroupSample.from_lists(rewards, ratios, ref_ratios)
        return _grpo_objective(sample, config or GrpoConfig())

    def evaluate(
        self, pred_path: str, config: Optional[EvalConfig] = None
    ) -> dict:
        cfg = config or EvalConfig()
        import json

        def _records():
            with open(pred_path, "r", encoding="utf-8") as handle:
                for line in handle:
                    if not line.strip():
                        continue
                    payload = json.loads(line)
                    record = self.store.get(str(payload.get("image_id", "")))
                    if record is None:
                        continue
                    yield record_from_prediction(payload, record.gt, cfg)

        try:
            return corpus_metrics(_records(), cfg).to_json_dict()
        except EmptyCorpusError:
            raise ValueError(f"no evaluable predictions in {pred_path}")


_engine: Optional[Engine] = None


def init(
    gt_path: str,
    embeddings_path: Optional[str] = None,
    config: Union[RewardConfig, dict, None] = None,
) -> Engine:
    """Load engine state once for this process and return the engine."""
    global _engine
    _engine = Engine(gt_path, embeddings_path, config)
    return _engine


def engine() -> Engine:
    if _engine is None:
        raise RuntimeError("call sggr_bindings.init(gt_path, ...) first")
    return _engine


def batch_reward(
    responses: Sequence[str],
    image_ids: Sequence[str],
    config: Optional[RewardConfig] = None,
) -> list[Union[RewardTuple, ItemError]]:
    return engine().batch_reward(BatchRewardRequest.of(responses, image_ids, config))


def batch_advantages(
    reward_groups: Sequence[Sequence[float]], std_floor: float = 1e-6
) -> list[Union[list[float], ItemError]]:
    return engine().batch_advantages(reward_groups, std_floor)


def grpo_objective(
    rewards: Sequence[float],
    ratios: Sequence[Sequence[float]],
    ref_ratios: Optional[Sequence[Sequence[float]]] = None,
    config: Optional[GrpoConfig] = None,
) -> float:
    return engine().grpo_objective(rewards, ratios, ref_ratios, config)


def evaluate(pred_path: str, config: Optional[EvalConfig] = None) -> dict:
    return engine().evaluate(pred_path, config)
