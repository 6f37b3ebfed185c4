from __future__ import annotations

import math
import random

import mpmath as mp
import pytest
from hypothesis import given, settings, strategies as st

from bodylang.analysis import (
    GameplayStats,
    PairedSample,
    SriRow,
    experience_stats,
    gameplay_stats,
    paired_t,
    positivity,
    read_sri_tsv,
    sri_report,
    write_report_tsv,
    write_sri_tsv,
)
from bodylang.errors import BadRequestError, ZeroVarianceError
from bodylang.eventlog import EventRecord

mp.mp.dps = 40


def oracle_paired_t(pre, post):
    d = [mp.mpf(b) - mp.mpf(a) for a, b in zip(pre, post)]
    n = len(d)
    m = mp.fsum(d) / n
    var = mp.fsum((x - m) ** 2 for x in d) / (n - 1)
    return float(m / (mp.sqrt(var) / mp.sqrt(n)))


# -- positivity --


def test_positivity_uses_first_three_only():
    assert positivity((6, 6, 6, 1, 1, 1)) == 6.0
    assert positivity((1, 1, 1, 6, 6, 6)) == 1.0


def test_positivity_hand_example():
    assert positivity((4, 5, 3, 2, 2, 2)) == 4.0


def test_positivity_rejects_out_of_range():
    with pytest.raises(BadRequestError):
        positivity((0, 3, 3))
    with pytest.raises(BadRequestError):
        positivity((7, 3, 3))


# -- paired t --


def test_paired_t_hand_example():
    # d = [1, 0, 1, 0]: mean 0.5, sd 0.57735, se 0.28868
    sample = PairedSample(pre=(0.0, 1.0, 2.0, 3.0), post=(1.0, 1.0, 3.0, 3.0))
    result = paired_t(sample)
    assert result.df == 3
    assert abs(result.t - 1.7321) < 1e-4
    assert abs(result.t - oracle_paired_t(sample.pre, sample.post)) < 1e-9


def test_paired_t_zero_variance():
    with pytest.raises(ZeroVarianceError):
        paired_t(PairedSample(pre=(1.0, 2.0, 3.0), post=(1.0, 2.0, 3.0)))
    with pytest.raises(ZeroVarianceError):
        paired_t(PairedSample(pre=(1.0, 2.0), post=(2.0, 3.0)))  # d identical


def test_paired_t_needs_two():
    with pytest.raises(BadRequestError):
        PairedSample(pre=(1.0,), post=(2.0,))
    with pytest.raises(BadRequestError):
        PairedSample(pre=(1.0, 2.0), post=(2.0,))


def test_study_group_degrees_of_freedom():
    rng = random.Random(0)
    for n, expected_df in ((150, 149), (58, 57), (92, 91)):
        pre = tuple(rng.uniform(1, 6) for _ in range(n))
        post = tuple(v + rng.uniform(-0.5, 1.0) for v in pre)
        assert paired_t(PairedSample(pre=pre, post=post)).df == expected_df


_rating = st.floats(min_value=-100, max_value=100).map(lambda v: round(v, 6))


@given(
    st.lists(st.tuples(_rating, _rating), min_size=2, max_size=60),
    _rating,
)
@settings(max_examples=150)
def test_paired_t_antisymmetry_and_shift_invariance(pairs, shift):
    pre = tuple(a for a, _ in pairs)
    post = tuple(b for _, b in pairs)
    diffs = [b - a for a, b in pairs]
    if len(set(diffs)) == 1:
        return  # zero-variance domain excluded
    forward = paired_t(PairedSample(pre=pre, post=post))
    backward = paired_t(PairedSample(pre=post, post=pre))
    assert abs(forward.t + backward.t) <= 1e-12 * max(1.0, abs(forward.t))
    shifted = paired_t(
        PairedSample(
            pre=tuple(a + shift for a in pre),
            post=tuple(b + shift for b in post),
        )
    )
    assert shifted.df == forward.df
    # differences are semantically untouched; floats allow 1-ulp wiggle
    assert abs(shifted.t - forward.t) <= 1e-12 * max(1.0, abs(forward.t))


# -- gameplay stats --


def _performance_event(seq, verdict):
    return EventRecord(
        sequence=seq,
        timestamp=0,
        actor="u1",
        kind="performance-recorded",
        payload={"performance": {"performance_id": f"p{seq}", "verdict": verdict}},
    )


def _review_event(seq, requester, score, attr_ok, action_ok):
    return EventRecord(
        sequence=seq,
        timestamp=0,
        actor=requester,
        kind="review-submitted",
        payload={
            "request_id": "r1",
            "performance_id": "p1",
            "requester_id": requester,
            "review": {
                "overall_score": score,
                "attribute_confirmed": attr_ok,
                "action_confirmed": action_ok,
                "reviewed_at": 0,
            },
        },
    )


def test_gameplay_stats_empty_log():
    stats = gameplay_stats([])
    assert stats.performance_count == 0
    assert stats.pass_rate is None
    assert stats.review_score_mean is None
    assert stats.top_medals == 0


def test_gameplay_stats_hand_tally():
    # 10 hand-checked events: 6 performances (4 PASS), 4 reviews
    records = [
        _performance_event(1, "PASS"),
        _performance_event(2, "FAIL"),
        _performance_event(3, "PASS"),
        _review_event(4, "alice", 5, True, True),
        _performance_event(5, "PASS"),
        _review_event(6, "alice", 5, True, False),
        _performance_event(7, "FAIL"),
        _review_event(8, "bob", 3, False, True),
        _performance_event(9, "PASS"),
        _review_event(10, "alice", 4, True, True),
    ]
    stats = gameplay_stats(records)
    assert stats.performance_count == 6
    assert stats.pass_count == 4
    assert stats.pass_rate == 4 / 6
    assert stats.medal_total == 4
    assert stats.medal_holders == 2
    assert stats.top_medals == 3
    assert abs(stats.review_score_mean - 4.25) < 1e-12
    assert stats.attribute_confirm_rate == 0.75
    assert stats.action_confirm_rate == 0.75


def test_review_score_spread_matches_oracle():
    records = [
        _review_event(1, "a", 5, True, True),
        _review_event(2, "a", 5, True, True),
        _review_event(3, "a", 3, True, True),
    ]
    stats = gameplay_stats(records)
    assert abs(stats.review_score_mean - 4.3333333333333333) < 1e-12
    assert abs(stats.review_score_sd - 1.1547005383792515) < 1e-12


# -- experience stats --


def test_experience_stats_basics():
    out = experience_stats({"embodied": [3, 4], "satisfaction": [4, 4, 4]})
    assert out["embodied"][0] == 3.5
    assert abs(out["embodied"][1] - 0.7071067811865476) < 1e-12
    assert out["satisfaction"] == (4.0, 0.0)


def test_experience_stats_rejects_bad_input():
    with pytest.raises(BadRequestError):
        experience_stats({"q": []})
    with pytest.raises(BadRequestError):
        experience_stats({"q": [0, 3]})
    with pytest.raises(BadRequestError):
        experience_stats({"q": [6]})


# -- SRI files and report --


def _sri_rows(rng, n, uplift):
    pre, post = [], []
    for i in range(n):
        close = i % 3 == 0
        answers = tuple(rng.randint(1, 5) for _ in range(6))
        lifted = tuple(min(6, a + (uplift if j < 3 else 0)) for j, a in enumerate(answers))
        pre.append(SriRow(f"u{i:03d}", f"u{(i + 1) % n:03d}", close, answers))
        post.append(SriRow(f"u{i:03d}", f"u{(i + 1) % n:03d}", close, lifted))
    return pre, post


def test_sri_tsv_round_trip(tmp_path):
    rng = random.Random(5)
    pre, _ = _sri_rows(rng, 12, 1)
    path = tmp_path / "sri_pre.tsv"
    write_sri_tsv(path, pre)
    assert read_sri_tsv(path) == pre


def test_sri_report_groups_and_significance(tmp_path):
    rng = random.Random(9)
    pre, post = _sri_rows(rng, 90, 1)
    reports = {r.group: r for r in sri_report(pre, post)}
    assert set(reports) == {"all", "close", "non-close"}
    assert reports["all"].n == 90
    assert reports["all"].n == reports["close"].n + reports["non-close"].n
    assert reports["all"].df == 89
    # uniform +1 uplift on q1..q3 is a strong effect, clipped rows add variance
    assert reports["all"].post_mean > reports["all"].pre_mean
    assert reports["all"].significant
    out = tmp_path / "report.tsv"
    write_report_tsv(out, list(reports.values()))
    lines = out.read_text().strip().split("\n")
    assert lines[0].split("\t") == [
        "group", "n", "pre_mean", "post_mean", "t", "df", "t0_001", "significant",
    ]
    assert len(lines) == 4
