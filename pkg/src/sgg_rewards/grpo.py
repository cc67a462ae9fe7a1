"""Group-relative advantages and the clipped surrogate objective.

Operates purely on scalars the caller supplies (rewards and token-level
probability ratios); no model code lives here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence


class GroupTooSmallError(ValueError):
    """Advantage normalization needs at least two candidates."""


class NonpositiveRatioError(ValueError):
    """Probability ratios must be strictly positive and finite."""


@dataclass(frozen=True)
class GrpoConfig:
    epsilon: float = 0.2     # clip radius
    beta: float = 0.04       # KL weight; 0 disables the regularizer
    std_floor: float = 1e-6  # added to the advantage denominator

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.std_floor <= 0.0:
            raise ValueError(f"std_floor must be positive, got {self.std_floor}")


@dataclass(frozen=True)
class GroupSample:
    """One GRPO group: scalar rewards plus optional token-level ratios.

    ``ratios`` holds pi_theta/pi_old per token per candidate; ``ref_ratios``
    holds pi_ref/pi_theta per token, needed only when the KL term is on.
    """

    rewards: tuple[float, ...]
    ratios: Optional[tuple[tuple[float, ...], ...]] = None
    ref_ratios: Optional[tuple[tuple[float, ...], ...]] = None

    @staticmethod
    def from_lists(
        rewards: Sequence[float],
        ratios: Optional[Sequence[Sequence[float]]] = None,
        ref_ratios: Optional[Sequence[Sequence[float]]] = None,
    ) -> "GroupSample":
        return GroupSample(
            tuple(float(r) for r in rewards),
            tuple(tuple(map(float, row)) for row in ratios) if ratios is not None else None,
            tuple(tuple(map(float, row)) for row in ref_ratios)
            if ref_ratios is not None
            else None,
        )


def advantages(rewards: Sequence[float], std_floor: float = 1e-6) -> list[float]:
    """Group-normalized advantages: (r_i - mean) / (population std + floor).

    A group with identical rewards short-circuits to exact zeros instead of
    relying on floor arithmetic, which matters early in training when every
    candidate fails the format check.
    """
    g = len(rewards)
    if g < 2:
        raise GroupTooSmallError(f"need at least 2 rewards, got {g}")
    if max(rewards) == min(rewards):
        return [0.0] * g
    mean = sum(rewards) / g
    var = sum((r - mean) ** 2 for r in rewards) / g
    denom = math.sqrt(var) + std_floor
    if denom == 0.0:
        # spread so small the squared deviations underflowed: degenerate
        return [0.0] * g
    return [(r - mean) / denom for r in rewards]


def clipped_term(ratio: float, advantage: float, epsilon: float = 0.2) -> float:
    """PPO-style pessimistic term: min(ratio*A, clip(ratio, 1-eps, 1+eps)*A)."""
    clipped = min(max(ratio, 1.0 - epsilon), 1.0 + epsilon)
    return min(ratio * advantage, clipped * advantage)


def kl_estimate(ref_ratio: float) -> float:
    """Nonnegative per-token KL estimator: r - log(r) - 1 with r = pi_ref/pi_theta."""
    if not ref_ratio > 0 or math.isinf(ref_ratio):
        raise NonpositiveRatioError(f"ref ratio must be positive and finite, got {ref_ratio}")
    return ref_ratio - math.log(ref_ratio) - 1.0


def grpo_objective(sample: GroupSample, config: GrpoConfig = GrpoConfig()) -> float:
    """Evaluate the clipped group objective minus the KL penalty.

    The clipped term is averaged over tokens within each candidate, then
    over candidates; the KL estimator is averaged over the group's pooled
    tokens. Advantages are computed internally from the sample's rewards.
    """
    if sample.ratios is None:
        raise ValueError("token probability ratios are required to evaluate the objective")
    g = len(sample.rewards)
    if len(sample.ratios) != g:
        raise ValueError(
            f"got {len(sample.ratios)} ratio sequences for {g} rewards"
        )
    advs = advantages(sample.rewards, config.std_floor)

    policy_term = 0.0
    for tokens, adv in zip(sample.ratios, advs):
        if not tokens:
            raise ValueError("each candidate needs at least one token ratio")
        for ratio in tokens:
            if not ratio > 0 or math.isinf(ratio):
                raise NonpositiveRatioError(
                    f"token ratio must be positive and finite, got {ratio}"
                )
        policy_term += sum(
            clipped_term(ratio, adv, config.epsilon) for ratio in tokens
        ) / len(tokens)
    policy_term /= g

    kl_term = 0.0
    if config.beta > 0.0:
        if sample.ref_ratios is None:
            raise ValueError("ref ratios are required when the KL weight is positive")
        if len(sample.ref_ratios) != g:
            raise ValueError(
                f"got {len(sample.ref_ratios)} ref ratio sequences for {g} rewards"
            )
        for i, (tokens, ref_tokens) in enumerate(zip(sample.ratios, sample.ref_ratios)):
            if len(tokens) != len(ref_tokens):
                raise ValueError(
                    f"candidate {i}: {len(ref_tokens)} ref ratios for {len(tokens)} tokens"
                )
        flat = [r for tokens in sample.ref_ratios for r in tokens]
        if not flat:
            raise ValueError("ref ratios contain no tokens")
        kl_term = sum(kl_estimate(r) for r in flat) / len(flat)

    return policy_term - config.beta * kl_term
