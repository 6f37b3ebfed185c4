from __future__ import annotations

import pytest

from bodylang.analysis import gameplay_stats, sri_report
from bodylang.engine import GameEngine
from bodylang.errors import BadRequestError, UnavailableError
from bodylang.eventlog import EventRecord
from bodylang.codec import canonical_dumps
from bodylang.sim import (
    BehaviorParams,
    CalibrationTargets,
    Scenario,
    calibrate,
    measure_rates,
    run_scenario,
)


def small_scenario(**overrides) -> Scenario:
    payload = Scenario().to_payload()
    payload.update({"player_count": 8, "duration_days": 3, "rng_seed": 5})
    payload.update(overrides)
    return Scenario.from_payload(payload)


@pytest.fixture(scope="module")
def small_run():
    return run_scenario(small_scenario())


def test_run_is_deterministic():
    first = run_scenario(small_scenario())
    second = run_scenario(small_scenario())
    assert first.event_lines == second.event_lines
    assert first.sri_pre == second.sri_pre
    assert first.sri_post == second.sri_post


def test_seed_changes_the_run():
    first = run_scenario(small_scenario())
    second = run_scenario(small_scenario(rng_seed=6))
    assert first.event_lines != second.event_lines


def test_zero_response_propensity_means_no_performances():
    behavior = BehaviorParams(responses_per_day=0.0)
    scenario = small_scenario(behavior=behavior.to_payload())
    result = run_scenario(scenario)
    assert result.summary.performances == 0
    records = [EventRecord.from_line(l) for l in result.event_lines]
    published = [r for r in records if r.kind == "request-published"]
    fulfilled = [r for r in records if r.kind == "request-fulfilled"]
    assert published and not fulfilled


def test_conservation_and_replay_on_scenario_log(small_run):
    records = [EventRecord.from_line(l, i + 1) for i, l in enumerate(small_run.event_lines)]
    replayed = GameEngine.replay(records)
    assert replayed.ledger().conserved
    assert replayed.mint_total == small_run.summary.mint_total
    stats = gameplay_stats(records)
    assert stats.performance_count == small_run.summary.performances
    assert stats.pass_count == small_run.summary.passes
    assert stats.medal_total == small_run.summary.medals


def test_sri_invariants(small_run):
    by_player: dict[str, int] = {}
    for row in small_run.sri_pre:
        by_player[row.player_id] = by_player.get(row.player_id, 0) + 1
        assert all(1 <= a <= 6 for a in row.answers)
        assert len(row.answers) == 6
    assert set(by_player.values()) == {6}
    pre_pairs = {(r.player_id, r.friend_id) for r in small_run.sri_pre}
    post_pairs = {(r.player_id, r.friend_id) for r in small_run.sri_post}
    assert pre_pairs == post_pairs
    for row in small_run.sri_post:
        assert all(1 <= a <= 6 for a in row.answers)


def test_sri_report_runs_on_scenario_output(small_run):
    reports = {r.group: r for r in sri_report(small_run.sri_pre, small_run.sri_post)}
    assert reports["all"].n == len(small_run.sri_pre)
    assert reports["all"].df == reports["all"].n - 1
    assert reports["all"].post_mean >= reports["all"].pre_mean


def test_scenario_round_trip_and_validation(tmp_path):
    scenario = small_scenario()
    path = tmp_path / "scenario.json"
    path.write_text(canonical_dumps(scenario.to_payload()), encoding="utf-8")
    assert Scenario.from_file(path) == scenario
    with pytest.raises(BadRequestError):
        small_scenario(friendship_density=1.5)
    with pytest.raises(BadRequestError):
        small_scenario(player_count=3)


def test_unreachable_server_reported():
    with pytest.raises(UnavailableError):
        run_scenario(small_scenario(), server_url="http://127.0.0.1:1")


def test_outputs_written(tmp_path, small_run):
    small_run.write(tmp_path)
    assert (tmp_path / "events.log").exists()
    assert (tmp_path / "sri_pre.tsv").exists()
    assert (tmp_path / "sri_post.tsv").exists()
    assert (tmp_path / "summary.json").exists()


# -- calibration --


def test_calibrate_hits_all_three_targets():
    params = calibrate(CalibrationTargets(), n=10_000, seed=2024)
    pass_rate, action_match, attribute_match = measure_rates(params, 10_000, seed=999)
    assert abs(action_match - 0.903) <= 0.02
    assert abs(attribute_match - 0.659) <= 0.02
    assert abs(pass_rate - 0.769) <= 0.02


def test_calibrate_perfect_recognizer():
    targets = CalibrationTargets(pass_rate=0.999, action_match=0.999, attribute_match=0.999)
    params = calibrate(targets, n=4000, seed=7)
    pass_rate, action_match, attribute_match = measure_rates(params, 4000, seed=8)
    assert pass_rate >= 0.99
    assert action_match >= 0.99
    assert attribute_match >= 0.99


def test_calibrate_reports_infeasible():
    # pass-rate far above the action-accuracy ceiling cannot be reached
    with pytest.raises(BadRequestError):
        calibrate(
            CalibrationTargets(pass_rate=0.95, action_match=0.6, attribute_match=0.659),
            n=3000,
        )


def test_calibration_targets_validated():
    with pytest.raises(BadRequestError):
        CalibrationTargets(pass_rate=0.0)
    with pytest.raises(BadRequestError):
        CalibrationTargets(action_match=1.0)
