"""Shared vocabulary of the platform: players, cameras, actions, attributes,
requests, performances, and the invariants every other module relies on.

All values here are immutable once constructed and safe to share across
threads; state changes produce new instances (see ``SocialRequest.with_state``).
Every type round-trips through the canonical text encoding via
``to_payload`` / ``from_payload``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Any, Mapping, Optional

from .errors import BadRequestError

# Reward bounds keep the economy small relative to the 100 EP joining grant.
MIN_REWARD = 1
MAX_REWARD = 100
INITIAL_ALLOCATION_EP = 100

DEFAULT_ACTIONS = (
    "love-sign",
    "bowing-down",
    "thanksgiving",
    "hand-waving",
    "hugging",
)

# 12 binary appearance attributes; tuples are mutually exclusive groups,
# the trailing singletons are independent accessories.
DEFAULT_ATTRIBUTES = (
    "male",
    "female",
    "upper-black",
    "upper-white",
    "upper-red",
    "upper-blue",
    "tshirt",
    "jacket",
    "dress",
    "backpack",
    "hat",
    "glasses",
)
DEFAULT_EXCLUSIVE_GROUPS = (
    ("male", "female"),
    ("upper-black", "upper-white", "upper-red", "upper-blue"),
    ("tshirt", "jacket", "dress"),
)


@dataclass(frozen=True)
class ActionVocabulary:
    """Ordered action labels; indices are stable for the deployment's lifetime."""

    actions: tuple[str, ...] = DEFAULT_ACTIONS

    def __post_init__(self) -> None:
        if len(self.actions) == 0:
            raise BadRequestError("action vocabulary must not be empty")
        if len(set(self.actions)) != len(self.actions):
            raise BadRequestError("action labels must be distinct")

    @property
    def size(self) -> int:
        return len(self.actions)

    def to_payload(self) -> dict:
        return {"actions": list(self.actions)}

    @classmethod
    def from_payload(cls, payload: Mapping[str, Any]) -> "ActionVocabulary":
        return cls(actions=tuple(payload["actions"]))


@dataclass(frozen=True)
class AttributeVocabulary:
    """Ordered binary attribute labels plus declared mutually exclusive groups."""

    attributes: tuple[str, ...] = DEFAULT_ATTRIBUTES
    exclusive_groups: tuple[tuple[str, ...], ...] = DEFAULT_EXCLUSIVE_GROUPS

    def __post_init__(self) -> None:
        if len(set(self.attributes)) != len(self.attributes):
            raise BadRequestError("attribute labels must be distinct")
        for group in self.exclusive_groups:
            unknown = set(group) - set(self.attributes)
            if unknown:
                raise BadRequestError(f"exclusive group names unknown attributes: {sorted(unknown)}")

    @property
    def size(self) -> int:
        return len(self.attributes)

    def index_of(self, label: str) -> int:
        return self.attributes.index(label)

    def exclusive_index_groups(self) -> tuple[frozenset[int], ...]:
        return tuple(
            frozenset(self.attributes.index(name) for name in group)
            for group in self.exclusive_groups
        )

    def to_payload(self) -> dict:
        return {
            "attributes": list(self.attributes),
            "exclusive_groups": [list(g) for g in self.exclusive_groups],
        }

    @classmethod
    def from_payload(cls, payload: Mapping[str, Any]) -> "AttributeVocabulary":
        return cls(
            attributes=tuple(payload["attributes"]),
            exclusive_groups=tuple(tuple(g) for g in payload["exclusive_groups"]),
        )


@dataclass(frozen=True)
class Player:
    player_id: str
    display_name: str
    ep_balance: int = 0
    medal_count: int = 0
    friend_ids: frozenset[str] = frozenset()
    joined_at: int = 0  # ms since epoch, UTC

    def __post_init__(self) -> None:
        if self.ep_balance < 0:
            raise BadRequestError("ep-balance must be non-negative")
        if self.medal_count < 0:
            raise BadRequestError("medal-count must be non-negative")

    def to_payload(self) -> dict:
        return {
            "player_id": self.player_id,
            "display_name": self.display_name,
            "ep_balance": self.ep_balance,
            "medal_count": self.medal_count,
            "friend_ids": sorted(self.friend_ids),
            "joined_at": self.joined_at,
        }

    @classmethod
    def from_payload(cls, payload: Mapping[str, Any]) -> "Player":
        return cls(
            player_id=payload["player_id"],
            display_name=payload["display_name"],
            ep_balance=payload["ep_balance"],
            medal_count=payload["medal_count"],
            friend_ids=frozenset(payload["friend_ids"]),
            joined_at=payload["joined_at"],
        )


def _segments_properly_intersect(p1, p2, p3, p4) -> bool:
    """True when segment p1p2 crosses p3p4 at an interior point of both."""

    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return (v > 0) - (v < 0)

    o1, o2 = orient(p1, p2, p3), orient(p1, p2, p4)
    o3, o4 = orient(p3, p4, p1), orient(p3, p4, p2)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


@dataclass(frozen=True)
class Camera:
    """A registered public camera with its image-space pedestrian detection zone."""

    camera_id: str
    latitude: float
    longitude: float
    indoor: bool
    detection_zone: tuple[tuple[float, float], ...]
    frame_width: int
    frame_height: int

    def __post_init__(self) -> None:
        zone = self.detection_zone
        if len(zone) < 3:
            raise BadRequestError("detection-zone needs at least 3 vertices")
        for x, y in zone:
            if not (0 <= x <= self.frame_width and 0 <= y <= self.frame_height):
                raise BadRequestError("detection-zone must lie inside the frame")
        n = len(zone)
        for i in range(n):
            for j in range(i + 1, n):
                # adjacent edges legitimately share an endpoint
                if j == i or (j + 1) % n == i or (i + 1) % n == j or (i == 0 and j == n - 1):
                    continue
                if _segments_properly_intersect(zone[i], zone[(i + 1) % n], zone[j], zone[(j + 1) % n]):
                    raise BadRequestError("detection-zone must be a simple polygon")

    def to_payload(self) -> dict:
        return {
            "camera_id": self.camera_id,
            "latitude": self.latitude,
            "longitude": self.longitude,
            "indoor": self.indoor,
            "detection_zone": [[x, y] for x, y in self.detection_zone],
            "frame_width": self.frame_width,
            "frame_height": self.frame_height,
        }

    @classmethod
    def from_payload(cls, payload: Mapping[str, Any]) -> "Camera":
        return cls(
            camera_id=payload["camera_id"],
            latitude=payload["latitude"],
            longitude=payload["longitude"],
            indoor=payload["indoor"],
            detection_zone=tuple((x, y) for x, y in payload["detection_zone"]),
            frame_width=payload["frame_width"],
            frame_height=payload["frame_height"],
        )


@dataclass(frozen=True)
class RequestConfig:
    """The pair <required action index, required attribute index set>."""

    action_index: int
    attribute_set: frozenset[int]

    def to_payload(self) -> dict:
        return {
            "action_index": self.action_index,
            "attribute_set": sorted(self.attribute_set),
        }

    @classmethod
    def from_payload(cls, payload: Mapping[str, Any]) -> "RequestConfig":
        return cls(
            action_index=payload["action_index"],
            attribute_set=frozenset(payload["attribute_set"]),
        )


def validate_config(
    config: RequestConfig,
    actions: ActionVocabulary,
    attributes: AttributeVocabulary,
) -> list[str]:
    """Return every violated invariant of a request configuration.

    Violations are data, not faults: an empty list means the config is ok.
    """
    violations: list[str] = []
    if not 0 <= config.action_index < actions.size:
        violations.append("action index out of range")
    if not config.attribute_set:
        violations.append("attribute set is empty")
    else:
        bad = [j for j in config.attribute_set if not 0 <= j < attributes.size]
        if bad:
            violations.append("attribute index out of range")
        for group in attributes.exclusive_index_groups():
            picked = config.attribute_set & group
            if len(picked) > 1:
                names = sorted(attributes.attributes[j] for j in picked)
                violations.append(f"exclusive group conflict: {names}")
    return violations


class RequestState(str, enum.Enum):
    OPEN = "OPEN"
    FULFILLED = "FULFILLED"
    REVIEWED = "REVIEWED"
    CANCELLED = "CANCELLED"


# The only legal edges of the request lifecycle.
REQUEST_TRANSITIONS: dict[RequestState, frozenset[RequestState]] = {
    RequestState.OPEN: frozenset({RequestState.FULFILLED, RequestState.CANCELLED}),
    RequestState.FULFILLED: frozenset({RequestState.REVIEWED}),
    RequestState.REVIEWED: frozenset(),
    RequestState.CANCELLED: frozenset(),
}


class Verdict(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"


@dataclass(frozen=True)
class SocialRequest:
    """A published social request and its lifecycle state."""

    request_id: str
    requester_id: str
    config: RequestConfig
    reward: int
    allowed_cameras: frozenset[str]
    state: RequestState = RequestState.OPEN
    created_at: int = 0
    fulfilled_by: Optional[str] = None

    def __post_init__(self) -> None:
        if not MIN_REWARD <= self.reward <= MAX_REWARD:
            raise BadRequestError(f"reward must be in [{MIN_REWARD}, {MAX_REWARD}]")
        if not self.allowed_cameras:
            raise BadRequestError("allowed-cameras must not be empty")
        has_fulfiller = self.fulfilled_by is not None
        should_have = self.state in (RequestState.FULFILLED, RequestState.REVIEWED)
        if has_fulfiller != should_have:
            raise BadRequestError("fulfilled-by must be set exactly in FULFILLED/REVIEWED states")

    def with_state(self, new_state: RequestState, fulfilled_by: Optional[str] = None) -> "SocialRequest":
        """Transition along a declared edge; anything else is rejected."""
        if new_state not in REQUEST_TRANSITIONS[self.state]:
            raise BadRequestError(f"illegal transition {self.state.value} -> {new_state.value}")
        if new_state == RequestState.FULFILLED:
            if fulfilled_by is None:
                raise BadRequestError("FULFILLED requires a fulfilling performance id")
            return replace(self, state=new_state, fulfilled_by=fulfilled_by)
        return replace(self, state=new_state)

    def to_payload(self) -> dict:
        return {
            "request_id": self.request_id,
            "requester_id": self.requester_id,
            "config": self.config.to_payload(),
            "reward": self.reward,
            "allowed_cameras": sorted(self.allowed_cameras),
            "state": self.state.value,
            "created_at": self.created_at,
            "fulfilled_by": self.fulfilled_by,
        }

    @classmethod
    def from_payload(cls, payload: Mapping[str, Any]) -> "SocialRequest":
        return cls(
            request_id=payload["request_id"],
            requester_id=payload["requester_id"],
            config=RequestConfig.from_payload(payload["config"]),
            reward=payload["reward"],
            allowed_cameras=frozenset(payload["allowed_cameras"]),
            state=RequestState(payload["state"]),
            created_at=payload["created_at"],
            fulfilled_by=payload["fulfilled_by"],
        )


@dataclass(frozen=True)
class Review:
    """Requester's human evaluation of a passed performance."""

    overall_score: int
    attribute_confirmed: bool
    action_confirmed: bool
    reviewed_at: int = 0

    def __post_init__(self) -> None:
        if self.overall_score not in (1, 2, 3, 4, 5):
            raise BadRequestError("overall-score must be an integer in 1..5")

    def to_payload(self) -> dict:
        return {
            "overall_score": self.overall_score,
            "attribute_confirmed": self.attribute_confirmed,
            "action_confirmed": self.action_confirmed,
            "reviewed_at": self.reviewed_at,
        }

    @classmethod
    def from_payload(cls, payload: Mapping[str, Any]) -> "Review":
        return cls(
            overall_score=payload["overall_score"],
            attribute_confirmed=payload["attribute_confirmed"],
            action_confirmed=payload["action_confirmed"],
            reviewed_at=payload["reviewed_at"],
        )


@dataclass(frozen=True)
class Performance:
    """One evaluated attempt at fulfilling a request."""

    performance_id: str
    request_id: str
    performer_id: str
    camera_id: str
    started_at: int
    action_probs: tuple[float, ...]
    attribute_probs: tuple[float, ...]
    score: float
    verdict: Verdict
    review: Optional[Review] = None

    def __post_init__(self) -> None:
        if self.score > 0:
            raise BadRequestError("matching score is never positive")
        if self.review is not None and self.verdict is not Verdict.PASS:
            raise BadRequestError("review present only on PASS performances")

    def with_review(self, review: Review) -> "Performance":
        return replace(self, review=review)

    def to_payload(self) -> dict:
        return {
            "performance_id": self.performance_id,
            "request_id": self.request_id,
            "performer_id": self.performer_id,
            "camera_id": self.camera_id,
            "started_at": self.started_at,
            "action_probs": list(self.action_probs),
            "attribute_probs": list(self.attribute_probs),
            "score": self.score,
            "verdict": self.verdict.value,
            "review": self.review.to_payload() if self.review else None,
        }

    @classmethod
    def from_payload(cls, payload: Mapping[str, Any]) -> "Performance":
        review = payload.get("review")
        return cls(
            performance_id=payload["performance_id"],
            request_id=payload["request_id"],
            performer_id=payload["performer_id"],
            camera_id=payload["camera_id"],
            started_at=payload["started_at"],
            action_probs=tuple(payload["action_probs"]),
            attribute_probs=tuple(payload["attribute_probs"]),
            score=payload["score"],
            verdict=Verdict(payload["verdict"]),
            review=Review.from_payload(review) if review else None,
        )
