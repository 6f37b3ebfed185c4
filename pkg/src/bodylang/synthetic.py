"""Seedable synthetic recognizer standing in for the real vision stack.

Emits plausible recognition probabilities for a performance given the ground
truth of what was enacted. Correctness events are Bernoulli draws at the
configured accuracies; the winning action mass and "confident" attribute
probabilities are drawn from a concentration-shaped band near 1, while
wrong-side probabilities fall in a low uniform band. Everything is a pure
function of (profile, entropy), so runs replay identically.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Any

from .codec import derive_seed
from .errors import BadRequestError
from .scoring import RecognitionOutput


@dataclass(frozen=True)
class SyntheticParams:
    """Tunable generator shape, shared by every profile of one deployment.

    ``concentration`` controls how peaked confident draws are (higher = closer
    to 1); the ``miss`` band bounds probabilities on the wrong side of the
    truth and is the knob calibration searches over.
    """

    action_accuracy: float = 0.9
    attribute_accuracy: float = 0.66
    concentration: float = 2.0
    winner_floor: float = 0.55
    confident_floor: float = 0.6
    miss_low: float = 0.02
    miss_high: float = 0.3

    def __post_init__(self) -> None:
        for name in ("action_accuracy", "attribute_accuracy"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise BadRequestError(f"{name} must be in [0,1]")
        if not 0.0 <= self.miss_low <= self.miss_high <= 1.0:
            raise BadRequestError("miss band must satisfy 0 <= low <= high <= 1")
        if not 0.5 < self.winner_floor <= 1.0:
            raise BadRequestError("winner_floor must exceed 0.5 so the winner is top-1")
        if self.concentration <= 0.0:
            raise BadRequestError("concentration must be positive")

    def to_payload(self) -> dict:
        return {
            "action_accuracy": self.action_accuracy,
            "attribute_accuracy": self.attribute_accuracy,
            "concentration": self.concentration,
            "winner_floor": self.winner_floor,
            "confident_floor": self.confident_floor,
            "miss_low": self.miss_low,
            "miss_high": self.miss_high,
        }

    @classmethod
    def from_payload(cls, payload) -> "SyntheticParams":
        return cls(**payload)


@dataclass(frozen=True)
class SyntheticProfile:
    """Ground truth for one performance plus the generator shape and seed."""

    ground_truth_action: int
    ground_truth_attributes: tuple[bool, ...]
    action_count: int
    params: SyntheticParams = SyntheticParams()
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.ground_truth_action < self.action_count:
            raise BadRequestError("ground-truth action index out of range")
        if self.action_count < 2:
            raise BadRequestError("need at least 2 action categories")


def _confident_draw(rng: random.Random, floor: float, concentration: float) -> float:
    # power-function draw on [floor, 1]: density ~ x^(c-1), so every draw
    # tends to 1 as concentration grows (uniform on the band at c=1)
    return floor + (1.0 - floor) * (1.0 - rng.random()) ** (1.0 / concentration)


def synth_recognize(profile: SyntheticProfile, *entropy: Any) -> RecognitionOutput:
    """Generate one RecognitionOutput; identical for identical (profile, entropy).

    Extra ``entropy`` parts (e.g. the performance id) decorrelate draws across
    attempts without any shared mutable RNG, which keeps concurrent
    evaluations order-independent.
    """
    p = profile.params
    rng = random.Random(derive_seed(profile.rng_seed, *entropy))

    action_correct = rng.random() < p.action_accuracy
    if action_correct:
        winner = profile.ground_truth_action
    else:
        others = [i for i in range(profile.action_count) if i != profile.ground_truth_action]
        winner = others[rng.randrange(len(others))]
    winner_mass = _confident_draw(rng, p.winner_floor, p.concentration)
    share = (1.0 - winner_mass) / (profile.action_count - 1)
    action_probs = tuple(winner_mass if i == winner else share for i in range(profile.action_count))

    attribute_probs = []
    for present in profile.ground_truth_attributes:
        correct = rng.random() < p.attribute_accuracy
        # high iff the emitted belief should confidently say "present"
        if present == correct:
            prob = _confident_draw(rng, p.confident_floor, p.concentration)
        else:
            prob = p.miss_low + (p.miss_high - p.miss_low) * rng.random()
        attribute_probs.append(prob)

    return RecognitionOutput(action_probs=action_probs, attribute_probs=tuple(attribute_probs))


def profile_for(
    params: SyntheticParams,
    ground_truth_action: int,
    ground_truth_attributes: tuple[bool, ...],
    action_count: int,
    rng_seed: int,
) -> SyntheticProfile:
    return SyntheticProfile(
        ground_truth_action=ground_truth_action,
        ground_truth_attributes=ground_truth_attributes,
        action_count=action_count,
        params=params,
        rng_seed=rng_seed,
    )
