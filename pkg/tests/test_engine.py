from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor

import pytest

from bodylang.domain import RequestConfig, RequestState, Review, Verdict
from bodylang.engine import GameEngine
from bodylang.errors import (
    AlreadyAllocatedError,
    CameraNotAllowedError,
    InsufficientEpError,
    NotAFriendError,
    NotRequesterError,
    PresenceFailedError,
    RequestNotOpenError,
    WrongStateError,
)
from bodylang.eventlog import EventLog
from bodylang.presence import BoundingBox, PresenceCheck
from bodylang.scoring import RecognitionOutput


def presence_ok() -> PresenceCheck:
    return PresenceCheck(
        gps_latitude=40.003,
        gps_longitude=116.32,
        detected_box=BoundingBox(260, 100, 340, 250),
        in_zone=True,
        within_radius=True,
    )


def presence_bad() -> PresenceCheck:
    return PresenceCheck(
        gps_latitude=41.0,
        gps_longitude=116.32,
        detected_box=None,
        in_zone=False,
        within_radius=False,
    )


def passing_rec() -> RecognitionOutput:
    return RecognitionOutput(
        action_probs=(0.02, 0.02, 0.92, 0.02, 0.02),
        attribute_probs=(0.95, 0.05, 0.9, 0.1, 0.1, 0.1, 0.85, 0.1, 0.05, 0.2, 0.2, 0.2),
    )


def failing_rec() -> RecognitionOutput:
    return RecognitionOutput(
        action_probs=(0.92, 0.02, 0.02, 0.02, 0.02),  # wrong action dominates
        attribute_probs=(0.05, 0.95, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.05, 0.2, 0.2, 0.2),
    )


CONFIG = RequestConfig(action_index=2, attribute_set=frozenset({0, 2}))


def build_engine(n_players: int = 3, sink=None) -> tuple[GameEngine, list]:
    engine = GameEngine(event_sink=sink)
    engine.set_clock(1_704_067_200_000)
    from bodylang.sim import default_cameras
    from bodylang.domain import Camera

    for payload in default_cameras(2, 0):
        engine.register_camera(Camera.from_payload(payload))
    players = [engine.register_player(f"player-{i}") for i in range(n_players)]
    for p in players:
        engine.allocate_initial(p.player_id)
    for i in range(1, n_players):
        engine.add_friend(players[0].player_id, players[i].player_id)
    return engine, players


def test_initial_allocation_and_idempotence():
    engine, players = build_engine(2)
    assert engine.players[players[0].player_id].ep_balance == 100
    with pytest.raises(AlreadyAllocatedError):
        engine.allocate_initial(players[0].player_id)
    assert engine.mint_total == 200
    assert engine.ledger().conserved


def test_publish_moves_reward_to_escrow():
    engine, players = build_engine(2)
    request = engine.publish_request(players[0].player_id, CONFIG, 20, ["cam1"])
    assert engine.players[players[0].player_id].ep_balance == 80
    assert engine.escrow[request.request_id] == 20
    assert engine.ledger().conserved


def test_publish_insufficient_ep():
    engine, players = build_engine(2)
    with pytest.raises(InsufficientEpError):
        engine.publish_request(players[0].player_id, CONFIG, 101, ["cam1"])


def test_pass_pays_performer_and_fulfills():
    engine, players = build_engine(2)
    requester, performer = players[0].player_id, players[1].player_id
    request = engine.publish_request(requester, CONFIG, 20, ["cam1"])
    performance = engine.attempt_performance(
        performer, request.request_id, "cam1", presence_ok(), passing_rec()
    )
    assert performance.verdict is Verdict.PASS
    assert engine.requests[request.request_id].state is RequestState.FULFILLED
    assert engine.players[performer].ep_balance == 120
    assert request.request_id not in engine.escrow
    assert engine.ledger().conserved


def test_fail_keeps_request_open_and_ledger_unchanged():
    engine, players = build_engine(2)
    requester, performer = players[0].player_id, players[1].player_id
    request = engine.publish_request(requester, CONFIG, 20, ["cam1"])
    performance = engine.attempt_performance(
        performer, request.request_id, "cam1", presence_ok(), failing_rec()
    )
    assert performance.verdict is Verdict.FAIL
    assert engine.requests[request.request_id].state is RequestState.OPEN
    assert engine.players[performer].ep_balance == 100
    assert engine.escrow[request.request_id] == 20
    assert performance.performance_id in engine.performances


def test_friend_gate():
    engine, players = build_engine(3)
    # players 1 and 2 are both friends of 0 but not of each other
    request = engine.publish_request(players[1].player_id, CONFIG, 10, ["cam1"])
    with pytest.raises(NotAFriendError):
        engine.attempt_performance(
            players[2].player_id, request.request_id, "cam1", presence_ok(), passing_rec()
        )


def test_camera_must_be_allowed():
    engine, players = build_engine(2)
    request = engine.publish_request(players[0].player_id, CONFIG, 10, ["cam1"])
    with pytest.raises(CameraNotAllowedError):
        engine.attempt_performance(
            players[1].player_id, request.request_id, "cam2", presence_ok(), passing_rec()
        )


def test_presence_must_pass():
    engine, players = build_engine(2)
    request = engine.publish_request(players[0].player_id, CONFIG, 10, ["cam1"])
    with pytest.raises(PresenceFailedError):
        engine.attempt_performance(
            players[1].player_id, request.request_id, "cam1", presence_bad(), passing_rec()
        )


def test_review_grants_medal_once():
    engine, players = build_engine(2)
    requester, performer = players[0].player_id, players[1].player_id
    request = engine.publish_request(requester, CONFIG, 20, ["cam1"])
    performance = engine.attempt_performance(
        performer, request.request_id, "cam1", presence_ok(), passing_rec()
    )
    review = Review(overall_score=5, attribute_confirmed=True, action_confirmed=True)
    medals = engine.submit_review(requester, performance.performance_id, review)
    assert medals == 1
    assert engine.requests[request.request_id].state is RequestState.REVIEWED
    with pytest.raises(WrongStateError):
        engine.submit_review(requester, performance.performance_id, review)


def test_review_requires_requester():
    engine, players = build_engine(3)
    requester, performer = players[0].player_id, players[1].player_id
    request = engine.publish_request(requester, CONFIG, 20, ["cam1"])
    performance = engine.attempt_performance(
        performer, request.request_id, "cam1", presence_ok(), passing_rec()
    )
    review = Review(overall_score=4, attribute_confirmed=True, action_confirmed=True)
    with pytest.raises(NotRequesterError):
        engine.submit_review(performer, performance.performance_id, review)


def test_cancel_refunds_then_rejects_repeat():
    engine, players = build_engine(2)
    requester = players[0].player_id
    request = engine.publish_request(requester, CONFIG, 20, ["cam1"])
    refund = engine.cancel_request(requester, request.request_id)
    assert refund == 20
    assert engine.players[requester].ep_balance == 100
    with pytest.raises(WrongStateError):
        engine.cancel_request(requester, request.request_id)
    with pytest.raises(RequestNotOpenError):
        engine.attempt_performance(
            players[1].player_id, request.request_id, "cam1", presence_ok(), passing_rec()
        )


def test_cancel_requires_requester():
    engine, players = build_engine(2)
    request = engine.publish_request(players[0].player_id, CONFIG, 20, ["cam1"])
    with pytest.raises(NotRequesterError):
        engine.cancel_request(players[1].player_id, request.request_id)


def test_leaderboard_keys():
    engine, players = build_engine(3)
    a, b, c = (p.player_id for p in players)
    # b earns a medal via a's review; c just has more EP
    request = engine.publish_request(b, CONFIG, 10, ["cam1"])

    engine.add_friend(b, c)
    performance = engine.attempt_performance(c, request.request_id, "cam1", presence_ok(), passing_rec())
    engine.submit_review(b, performance.performance_id, Review(5, True, True))
    board = engine.leaderboard()
    assert [e.player_id for e in board][0] == b  # medal beats any EP
    assert board[0].rank == 1 and board[1].rank == 2 and board[2].rank == 3
    # among zero-medal players, higher EP first
    rest = [e for e in board if e.player_id != b]
    assert rest[0].ep_balance >= rest[1].ep_balance


def test_leaderboard_tiebreak_join_time():
    engine = GameEngine()
    engine.set_clock(1000)
    first = engine.register_player("first")
    engine.set_clock(2000)
    second = engine.register_player("second")
    board = engine.leaderboard()
    assert [e.player_id for e in board] == [first.player_id, second.player_id]


def test_friendship_symmetry_over_random_sequences():
    engine = GameEngine()
    players = [engine.register_player(f"p{i}") for i in range(8)]
    ids = [p.player_id for p in players]
    rng = random.Random(3)
    for _ in range(300):
        a, b = rng.sample(ids, 2)
        if rng.random() < 0.6:
            engine.add_friend(a, b)
        else:
            engine.remove_friend(a, b)
        for pid in ids:
            for fid in engine.players[pid].friend_ids:
                assert pid in engine.players[fid].friend_ids


def test_medals_never_decrease():
    engine, players = build_engine(2)
    requester, performer = players[0].player_id, players[1].player_id
    history = [engine.players[requester].medal_count]
    for _ in range(3):
        request = engine.publish_request(requester, CONFIG, 5, ["cam1"])
        performance = engine.attempt_performance(
            performer, request.request_id, "cam1", presence_ok(), passing_rec()
        )
        engine.submit_review(requester, performance.performance_id, Review(4, True, True))
        history.append(engine.players[requester].medal_count)
    assert history == sorted(history)


def test_single_fulfillment_under_contention():
    engine, players = build_engine(101)
    requester = players[0].player_id
    request = engine.publish_request(requester, CONFIG, 50, ["cam1"])
    performers = [p.player_id for p in players[1:]]

    outcomes = {"pass": 0, "not_open": 0}

    def attack(performer_id: str):
        try:
            performance = engine.attempt_performance(
                performer_id, request.request_id, "cam1", presence_ok(), passing_rec()
            )
            assert performance.verdict is Verdict.PASS
            return "pass"
        except RequestNotOpenError:
            return "not_open"

    with ThreadPoolExecutor(max_workers=100) as pool:
        for result in pool.map(attack, performers):
            outcomes[result] += 1

    assert outcomes["pass"] == 1
    assert outcomes["not_open"] == len(performers) - 1
    winners = [p for p in performers if engine.players[p].ep_balance == 150]
    assert len(winners) == 1
    assert engine.ledger().conserved


def test_replay_reconstructs_identical_state():
    log = EventLog()
    sink = lambda actor, kind, data: log.append(0, actor, kind, data)
    engine, players = build_engine(3, sink=sink)
    requester, performer = players[0].player_id, players[1].player_id
    request = engine.publish_request(requester, CONFIG, 15, ["cam1", "cam2"])
    performance = engine.attempt_performance(
        performer, request.request_id, "cam1", presence_ok(), passing_rec()
    )
    engine.submit_review(requester, performance.performance_id, Review(5, True, True))
    other = engine.publish_request(requester, CONFIG, 7, ["cam2"])
    engine.cancel_request(requester, other.request_id)

    replayed = GameEngine.replay(log.records())
    assert replayed.ledger().to_payload() == engine.ledger().to_payload()
    assert [e.to_payload() for e in replayed.leaderboard()] == [
        e.to_payload() for e in engine.leaderboard()
    ]
    assert {r.request_id: r.state for r in replayed.requests.values()} == {
        r.request_id: r.state for r in engine.requests.values()
    }
    assert replayed.performances.keys() == engine.performances.keys()
