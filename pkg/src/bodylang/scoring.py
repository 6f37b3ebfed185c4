"""Mask-and-fuse evaluation of a body-language performance.

A recognizer emits a softmax over action categories and independent
per-attribute probabilities. A request selects one action index and a set of
attribute indices; 0/1 masks pick out exactly those entries, and the matching
score fuses the selected log-probabilities:

    score = alpha * log(p_action) + (1 - alpha) * mean(log(p_attr) for requested attrs)

Natural log throughout; probabilities are clamped to [epsilon, 1] first, so
the score is finite and always <= 0. A performance qualifies when the score
reaches the deployment threshold theta.

Everything here is stateless and pure; callers may share it across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .domain import RequestConfig, Verdict
from .errors import InvalidConfigError

DEFAULT_ALPHA = 0.7
# Admits performances whose selected probabilities average (geometrically,
# under the alpha weighting) at least one half.
DEFAULT_THETA = math.log(0.5)
DEFAULT_EPSILON = 1e-12


@dataclass(frozen=True)
class RecognitionOutput:
    """Raw recognizer scores for one performance: softmax over actions plus
    independent per-attribute probabilities."""

    action_probs: tuple[float, ...]
    attribute_probs: tuple[float, ...]

    def violations(self, softmax_tol: float = 1e-9) -> list[str]:
        """Invariant check used at trust boundaries (gateway, wire protocol)."""
        out: list[str] = []
        if any(not 0.0 <= p <= 1.0 for p in self.action_probs):
            out.append("action probability out of [0,1]")
        if any(not 0.0 <= p <= 1.0 for p in self.attribute_probs):
            out.append("attribute probability out of [0,1]")
        total = math.fsum(self.action_probs)
        if abs(total - 1.0) > softmax_tol:
            out.append(f"action probabilities sum to {total!r}, not 1")
        return out

    def to_payload(self) -> dict:
        return {
            "action_probs": list(self.action_probs),
            "attribute_probs": list(self.attribute_probs),
        }

    @classmethod
    def from_payload(cls, payload) -> "RecognitionOutput":
        return cls(
            action_probs=tuple(payload["action_probs"]),
            attribute_probs=tuple(payload["attribute_probs"]),
        )


@dataclass(frozen=True)
class ScoringParams:
    alpha: float = DEFAULT_ALPHA
    theta: float = DEFAULT_THETA
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise InvalidConfigError("alpha must be in (0,1)")
        if self.epsilon <= 0.0:
            raise InvalidConfigError("epsilon must be positive")
        if self.theta > 0.0:
            raise InvalidConfigError("theta must be <= 0 (scores never exceed 0)")

    def to_payload(self) -> dict:
        return {"alpha": self.alpha, "theta": self.theta, "epsilon": self.epsilon}

    @classmethod
    def from_payload(cls, payload) -> "ScoringParams":
        return cls(alpha=payload["alpha"], theta=payload["theta"], epsilon=payload["epsilon"])


@dataclass(frozen=True)
class MatchResult:
    """Score plus its two-term decomposition, kept for explainability."""

    score: float
    qualified: bool
    action_term: float
    attribute_term: float


def build_masks(config: RequestConfig, k_actions: int, l_attributes: int) -> tuple[list[int], list[int]]:
    """Indicator vectors selecting the requested action and attributes."""
    if not 0 <= config.action_index < k_actions:
        raise InvalidConfigError("action index out of range")
    if not config.attribute_set:
        raise InvalidConfigError("attribute set is empty")
    if any(not 0 <= j < l_attributes for j in config.attribute_set):
        raise InvalidConfigError("attribute index out of range")
    action_mask = [1 if i == config.action_index else 0 for i in range(k_actions)]
    attribute_mask = [1 if j in config.attribute_set else 0 for j in range(l_attributes)]
    return action_mask, attribute_mask


def _clamped_log(p: float, epsilon: float) -> float:
    return math.log(min(1.0, max(epsilon, p)))


def compute_score(
    rec: RecognitionOutput,
    config: RequestConfig,
    params: ScoringParams = ScoringParams(),
) -> MatchResult:
    """Fuse the selected log-probabilities into the matching score.

    Masked-out entries are never read, so perturbing them cannot change the
    result. The fusion is evaluated as ``b + alpha*(a - b)`` rather than
    ``alpha*a + (1-alpha)*b`` so that equal terms collapse to exactly that
    value in floating point; the attribute logs are summed in sorted order so
    consistent index relabelings cannot perturb the sum.
    """
    k_actions = len(rec.action_probs)
    l_attributes = len(rec.attribute_probs)
    build_masks(config, k_actions, l_attributes)  # rejects invalid configs

    action_term = _clamped_log(rec.action_probs[config.action_index], params.epsilon)
    logs = sorted(_clamped_log(rec.attribute_probs[j], params.epsilon) for j in config.attribute_set)
    if logs[0] == logs[-1]:
        # mean of equal values is that value; keep the identity exact in floats
        attribute_term = logs[0]
    else:
        attribute_term = math.fsum(logs) / len(logs)

    score = attribute_term + params.alpha * (action_term - attribute_term)
    return MatchResult(
        score=score,
        qualified=score >= params.theta,
        action_term=action_term,
        attribute_term=attribute_term,
    )


def decide(
    rec: RecognitionOutput,
    config: RequestConfig,
    params: ScoringParams = ScoringParams(),
) -> Verdict:
    """PASS iff the matching score reaches theta (boundary inclusive)."""
    return Verdict.PASS if compute_score(rec, config, params).qualified else Verdict.FAIL
