"""Authoritative game state machine: request lifecycle, EP escrow economy,
medal grants, reviews, and the leaderboard.

All mutations are serialized through one lock (a single logical command
queue), which is what makes the single-fulfillment guarantee hold under
concurrent attempts. Every state change emits exactly one event record per
delta; replaying a log through ``GameEngine.replay`` reconstructs identical
state without re-running any scoring.

EPs move only between player balances and request escrow, and the engine
never mints outside ``allocate_initial``, so

    sum(balances) + sum(escrow) == mint_total

holds after every operation (integer arithmetic throughout).
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional

from .domain import (
    INITIAL_ALLOCATION_EP,
    ActionVocabulary,
    AttributeVocabulary,
    Camera,
    Performance,
    Player,
    RequestConfig,
    RequestState,
    Review,
    SocialRequest,
    Verdict,
    validate_config,
)
from .errors import (
    AlreadyAllocatedError,
    BadRequestError,
    CameraNotAllowedError,
    InsufficientEpError,
    InvalidConfigError,
    NotAFriendError,
    NotFoundError,
    NotRequesterError,
    PresenceFailedError,
    RequestNotOpenError,
    WrongStateError,
)
from .eventlog import EventRecord
from .presence import PresenceCheck
from .scoring import RecognitionOutput, ScoringParams, compute_score

EventSink = Callable[[str, str, dict], None]


@dataclass(frozen=True)
class Ledger:
    """Point-in-time snapshot of the EP economy."""

    balances: dict[str, int]
    escrow: dict[str, int]
    mint_total: int

    @property
    def conserved(self) -> bool:
        return sum(self.balances.values()) + sum(self.escrow.values()) == self.mint_total

    def to_payload(self) -> dict:
        return {
            "balances": dict(sorted(self.balances.items())),
            "escrow": dict(sorted(self.escrow.items())),
            "mint_total": self.mint_total,
        }


@dataclass(frozen=True)
class LeaderboardEntry:
    player_id: str
    display_name: str
    medal_count: int
    ep_balance: int
    rank: int

    def to_payload(self) -> dict:
        return {
            "player_id": self.player_id,
            "display_name": self.display_name,
            "medal_count": self.medal_count,
            "ep_balance": self.ep_balance,
            "rank": self.rank,
        }


class GameEngine:
    """Single-deployment game state; linearizable via one internal lock."""

    def __init__(
        self,
        actions: Optional[ActionVocabulary] = None,
        attributes: Optional[AttributeVocabulary] = None,
        scoring_params: Optional[ScoringParams] = None,
        event_sink: Optional[EventSink] = None,
    ):
        self.actions = actions or ActionVocabulary()
        self.attributes = attributes or AttributeVocabulary()
        self.scoring_params = scoring_params or ScoringParams()
        self._sink = event_sink
        self._lock = threading.RLock()
        self.players: dict[str, Player] = {}
        self.cameras: dict[str, Camera] = {}
        self.requests: dict[str, SocialRequest] = {}
        self.performances: dict[str, Performance] = {}
        self.escrow: dict[str, int] = {}
        self.mint_total = 0
        self._allocated: set[str] = set()
        self._player_seq = 0
        self._request_seq = 0
        self._performance_seq = 0
        self._clock_ms: Optional[int] = None

    # -- clock ---------------------------------------------------------------

    def now(self) -> int:
        if self._clock_ms is not None:
            return self._clock_ms
        return int(time.time() * 1000)

    def set_clock(self, now_ms: int) -> None:
        """Pin the logical clock (simulation mode); photographed in the log."""
        with self._lock:
            self._clock_ms = int(now_ms)
            self._emit("server", "clock-set", {"now_ms": self._clock_ms})

    def _emit(self, actor: str, kind: str, data: dict) -> None:
        if self._sink is not None:
            self._sink(actor, kind, data)

    # -- registration --------------------------------------------------------

    def register_camera(self, camera: Camera) -> Camera:
        with self._lock:
            if camera.camera_id in self.cameras:
                raise WrongStateError(f"camera {camera.camera_id} already registered")
            self.cameras[camera.camera_id] = camera
            self._emit("server", "camera-registered", {"camera": camera.to_payload()})
            return camera

    def register_player(self, display_name: str) -> Player:
        with self._lock:
            self._player_seq += 1
            player = Player(
                player_id=f"u{self._player_seq:05d}",
                display_name=display_name,
                ep_balance=0,
                medal_count=0,
                friend_ids=frozenset(),
                joined_at=self.now(),
            )
            self.players[player.player_id] = player
            self._emit(player.player_id, "player-registered", {"player": player.to_payload()})
            return player

    def add_friend(self, player_id: str, friend_id: str) -> bool:
        """Symmetric link; returns False when already friends (no event)."""
        with self._lock:
            a = self._player(player_id)
            b = self._player(friend_id)
            if a.player_id == b.player_id:
                raise BadRequestError("a player cannot befriend themselves")
            if b.player_id in a.friend_ids:
                return False
            self.players[a.player_id] = replace(a, friend_ids=a.friend_ids | {b.player_id})
            self.players[b.player_id] = replace(b, friend_ids=b.friend_ids | {a.player_id})
            self._emit(
                player_id,
                "friendship-added",
                {"player_id": a.player_id, "friend_id": b.player_id},
            )
            return True

    def remove_friend(self, player_id: str, friend_id: str) -> bool:
        """Symmetric unlink; returns False when not friends (no event)."""
        with self._lock:
            a = self._player(player_id)
            b = self._player(friend_id)
            if b.player_id not in a.friend_ids:
                return False
            self.players[a.player_id] = replace(a, friend_ids=a.friend_ids - {b.player_id})
            self.players[b.player_id] = replace(b, friend_ids=b.friend_ids - {a.player_id})
            self._emit(
                player_id,
                "friendship-removed",
                {"player_id": a.player_id, "friend_id": b.player_id},
            )
            return True

    # -- economy -------------------------------------------------------------

    def allocate_initial(self, player_id: str) -> int:
        """Grant the one-time joining allocation; second call is rejected."""
        with self._lock:
            player = self._player(player_id)
            if player_id in self._allocated:
                raise AlreadyAllocatedError(f"{player_id} already received the initial allocation")
            self._allocated.add(player_id)
            self.mint_total += INITIAL_ALLOCATION_EP
            self._credit(player_id, INITIAL_ALLOCATION_EP)
            self._emit(
                player_id,
                "ep-allocated",
                {"player_id": player_id, "amount": INITIAL_ALLOCATION_EP},
            )
            return INITIAL_ALLOCATION_EP

    def publish_request(
        self,
        requester_id: str,
        config: RequestConfig,
        reward: int,
        allowed_cameras: Iterable[str],
    ) -> SocialRequest:
        with self._lock:
            requester = self._player(requester_id)
            violations = validate_config(config, self.actions, self.attributes)
            if violations:
                raise InvalidConfigError("; ".join(violations))
            cameras = frozenset(allowed_cameras)
            if not cameras:
                raise BadRequestError("allowed-cameras must not be empty")
            unknown = cameras - self.cameras.keys()
            if unknown:
                raise NotFoundError(f"unknown cameras: {sorted(unknown)}")
            if not 1 <= reward:
                raise BadRequestError("reward must be positive")
            if reward > requester.ep_balance:
                raise InsufficientEpError(
                    f"reward {reward} exceeds balance {requester.ep_balance}"
                )
            self._request_seq += 1
            request = SocialRequest(
                request_id=f"r{self._request_seq:06d}",
                requester_id=requester_id,
                config=config,
                reward=reward,
                allowed_cameras=cameras,
                state=RequestState.OPEN,
                created_at=self.now(),
            )
            self._debit(requester_id, reward)
            self.escrow[request.request_id] = reward
            self.requests[request.request_id] = request
            self._emit(requester_id, "request-published", {"request": request.to_payload()})
            return request

    def cancel_request(self, caller_id: str, request_id: str) -> int:
        """Refund the escrow to the requester; only OPEN requests can cancel."""
        with self._lock:
            request = self._request(request_id)
            if caller_id != request.requester_id:
                raise NotRequesterError("only the requester may cancel")
            if request.state is not RequestState.OPEN:
                raise WrongStateError(f"cannot cancel a {request.state.value} request")
            refund = self.escrow.pop(request.request_id)
            self._credit(request.requester_id, refund)
            self.requests[request_id] = request.with_state(RequestState.CANCELLED)
            self._emit(caller_id, "request-cancelled", {"request_id": request_id, "refund": refund})
            return refund

    # -- performances ---------------------------------------------------------

    def attempt_performance(
        self,
        performer_id: str,
        request_id: str,
        camera_id: str,
        presence: PresenceCheck,
        rec: RecognitionOutput,
    ) -> Performance:
        """Score an attempt and settle its consequences atomically.

        First qualified performance wins the request; later attempts see
        request-not-open. A FAIL verdict is recorded but moves no EP.
        """
        with self._lock:
            performer = self._player(performer_id)
            request = self._request(request_id)
            if camera_id not in self.cameras:
                raise NotFoundError(f"unknown camera {camera_id}")
            if camera_id not in request.allowed_cameras:
                raise CameraNotAllowedError(f"camera {camera_id} not allowed for {request_id}")
            requester = self._player(request.requester_id)
            if performer_id not in requester.friend_ids:
                raise NotAFriendError("request not visible to this player")
            if not presence.passed:
                raise PresenceFailedError(
                    f"presence failed (within_radius={presence.within_radius}, in_zone={presence.in_zone})"
                )
            if request.state is not RequestState.OPEN:
                raise RequestNotOpenError(f"request {request_id} is {request.state.value}")
            problems = rec.violations()
            if problems:
                raise BadRequestError("invalid recognition output: " + "; ".join(problems))

            result = compute_score(rec, request.config, self.scoring_params)
            verdict = Verdict.PASS if result.qualified else Verdict.FAIL
            self._performance_seq += 1
            performance = Performance(
                performance_id=f"p{self._performance_seq:06d}",
                request_id=request_id,
                performer_id=performer_id,
                camera_id=camera_id,
                started_at=self.now(),
                action_probs=rec.action_probs,
                attribute_probs=rec.attribute_probs,
                score=result.score,
                verdict=verdict,
            )
            self.performances[performance.performance_id] = performance
            self._emit(
                performer_id,
                "performance-recorded",
                {"performance": performance.to_payload()},
            )
            if verdict is Verdict.PASS:
                reward = self.escrow.pop(request_id)
                self._credit(performer_id, reward)
                self.requests[request_id] = request.with_state(
                    RequestState.FULFILLED, fulfilled_by=performance.performance_id
                )
                self._emit(
                    performer_id,
                    "request-fulfilled",
                    {
                        "request_id": request_id,
                        "performance_id": performance.performance_id,
                        "performer_id": performer_id,
                        "reward": reward,
                    },
                )
            return performance

    def submit_review(self, caller_id: str, performance_id: str, review: Review) -> int:
        """Record the requester's review and grant them a medal."""
        with self._lock:
            performance = self.performances.get(performance_id)
            if performance is None:
                raise NotFoundError(f"unknown performance {performance_id}")
            request = self._request(performance.request_id)
            if caller_id != request.requester_id:
                raise NotRequesterError("only the requester may review")
            if performance.verdict is not Verdict.PASS:
                raise WrongStateError("only PASS performances are reviewed")
            if request.state is not RequestState.FULFILLED:
                raise WrongStateError(f"request is {request.state.value}, not FULFILLED")
            self.performances[performance_id] = performance.with_review(review)
            self.requests[request.request_id] = request.with_state(RequestState.REVIEWED)
            requester = self._player(caller_id)
            self.players[caller_id] = replace(requester, medal_count=requester.medal_count + 1)
            self._emit(
                caller_id,
                "review-submitted",
                {
                    "request_id": request.request_id,
                    "performance_id": performance_id,
                    "requester_id": caller_id,
                    "review": review.to_payload(),
                },
            )
            return self.players[caller_id].medal_count

    # -- views ----------------------------------------------------------------

    def leaderboard(self) -> list[LeaderboardEntry]:
        """Total ranking: medals desc, EP desc, joined-at asc; player id breaks
        residual ties so the order is deterministic under a logical clock."""
        with self._lock:
            ordered = sorted(
                self.players.values(),
                key=lambda p: (-p.medal_count, -p.ep_balance, p.joined_at, p.player_id),
            )
            return [
                LeaderboardEntry(
                    player_id=p.player_id,
                    display_name=p.display_name,
                    medal_count=p.medal_count,
                    ep_balance=p.ep_balance,
                    rank=i + 1,
                )
                for i, p in enumerate(ordered)
            ]

    def ledger(self) -> Ledger:
        with self._lock:
            return Ledger(
                balances={pid: p.ep_balance for pid, p in self.players.items()},
                escrow=dict(self.escrow),
                mint_total=self.mint_total,
            )

    # -- internals ------------------------------------------------------------

    def _player(self, player_id: str) -> Player:
        player = self.players.get(player_id)
        if player is None:
            raise NotFoundError(f"unknown player {player_id}")
        return player

    def _request(self, request_id: str) -> SocialRequest:
        request = self.requests.get(request_id)
        if request is None:
            raise NotFoundError(f"unknown request {request_id}")
        return request

    def _credit(self, player_id: str, amount: int) -> None:
        player = self._player(player_id)
        self.players[player_id] = replace(player, ep_balance=player.ep_balance + amount)

    def _debit(self, player_id: str, amount: int) -> None:
        player = self._player(player_id)
        if player.ep_balance < amount:
            raise InsufficientEpError(f"balance {player.ep_balance} < {amount}")
        self.players[player_id] = replace(player, ep_balance=player.ep_balance - amount)

    # -- replay ----------------------------------------------------------------

    @classmethod
    def replay(
        cls,
        records: Iterable[EventRecord],
        actions: Optional[ActionVocabulary] = None,
        attributes: Optional[AttributeVocabulary] = None,
        scoring_params: Optional[ScoringParams] = None,
    ) -> "GameEngine":
        """Rebuild state purely from the log; no scoring is re-run, so the
        reconstruction is exact even if scoring parameters later change."""
        engine = cls(actions=actions, attributes=attributes, scoring_params=scoring_params)
        for record in records:
            engine._apply(record)
        return engine

    def _apply(self, record: EventRecord) -> None:
        kind, data = record.kind, record.payload
        if kind == "camera-registered":
            camera = Camera.from_payload(data["camera"])
            self.cameras[camera.camera_id] = camera
        elif kind == "player-registered":
            player = Player.from_payload(data["player"])
            self.players[player.player_id] = player
            self._player_seq = max(self._player_seq, int(player.player_id[1:]))
        elif kind == "friendship-added":
            a = self._player(data["player_id"])
            b = self._player(data["friend_id"])
            self.players[a.player_id] = replace(a, friend_ids=a.friend_ids | {b.player_id})
            self.players[b.player_id] = replace(b, friend_ids=b.friend_ids | {a.player_id})
        elif kind == "friendship-removed":
            a = self._player(data["player_id"])
            b = self._player(data["friend_id"])
            self.players[a.player_id] = replace(a, friend_ids=a.friend_ids - {b.player_id})
            self.players[b.player_id] = replace(b, friend_ids=b.friend_ids - {a.player_id})
        elif kind == "ep-allocated":
            self._allocated.add(data["player_id"])
            self.mint_total += data["amount"]
            self._credit(data["player_id"], data["amount"])
        elif kind == "request-published":
            request = SocialRequest.from_payload(data["request"])
            self.requests[request.request_id] = request
            self._debit(request.requester_id, request.reward)
            self.escrow[request.request_id] = request.reward
            self._request_seq = max(self._request_seq, int(request.request_id[1:]))
        elif kind == "performance-recorded":
            performance = Performance.from_payload(data["performance"])
            self.performances[performance.performance_id] = performance
            self._performance_seq = max(self._performance_seq, int(performance.performance_id[1:]))
        elif kind == "request-fulfilled":
            request = self._request(data["request_id"])
            reward = self.escrow.pop(request.request_id)
            self._credit(data["performer_id"], reward)
            self.requests[request.request_id] = request.with_state(
                RequestState.FULFILLED, fulfilled_by=data["performance_id"]
            )
        elif kind == "review-submitted":
            request = self._request(data["request_id"])
            performance = self.performances[data["performance_id"]]
            self.performances[performance.performance_id] = performance.with_review(
                Review.from_payload(data["review"])
            )
            self.requests[request.request_id] = request.with_state(RequestState.REVIEWED)
            requester = self._player(data["requester_id"])
            self.players[requester.player_id] = replace(
                requester, medal_count=requester.medal_count + 1
            )
        elif kind == "request-cancelled":
            request = self._request(data["request_id"])
            refund = self.escrow.pop(request.request_id)
            self._credit(request.requester_id, refund)
            self.requests[request.request_id] = request.with_state(RequestState.CANCELLED)
        elif kind == "clock-set":
            self._clock_ms = data["now_ms"]
        else:
            raise BadRequestError(f"unknown event kind {kind!r}")
