"""Statistical analysis of a deployment: questionnaire positivity, paired
t-tests over pre/post friendship ratings, and descriptive gameplay stats
recomputed from the event log.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .errors import BadRequestError, ParseError, ZeroVarianceError
from .eventlog import EventRecord
from .stats import mean, sample_sd, t_critical

SRI_SCALE = (1, 6)
EXPERIENCE_SCALE = (1, 5)


@dataclass(frozen=True)
class PairedSample:
    """Pre/post vectors aligned by friendship pair."""

    pre: tuple[float, ...]
    post: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.pre) != len(self.post):
            raise BadRequestError("pre and post must have equal length")
        if len(self.pre) < 2:
            raise BadRequestError("paired test needs n >= 2")


@dataclass(frozen=True)
class PositivityRecord:
    player_id: str
    friend_id: str
    close: bool
    positivity: float


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int


def positivity(answers: Sequence[float]) -> float:
    """Friendship positivity: the mean of the first three questionnaire answers."""
    if len(answers) < 3:
        raise BadRequestError("need at least the first three answers")
    lo, hi = SRI_SCALE
    head = answers[:3]
    if any(not lo <= a <= hi for a in head):
        raise BadRequestError(f"answers must be in [{lo}, {hi}]")
    return (head[0] + head[1] + head[2]) / 3


def paired_t(sample: PairedSample) -> TTestResult:
    """Paired t statistic over post - pre differences; df = n - 1.

    Sample standard deviation (n-1 denominator). All-identical differences
    have no variance to test against and raise ZeroVarianceError.
    """
    diffs = [post - pre for pre, post in zip(sample.pre, sample.post)]
    sd = sample_sd(diffs)
    if sd == 0.0:
        raise ZeroVarianceError("all differences identical; t undefined")
    n = len(diffs)
    t = mean(diffs) / (sd / math.sqrt(n))
    return TTestResult(t=t, df=n - 1)


@dataclass(frozen=True)
class GameplayStats:
    performance_count: int
    pass_count: int
    pass_rate: Optional[float]
    medal_total: int
    medal_holders: int
    top_medals: int
    review_score_mean: Optional[float]
    review_score_sd: Optional[float]
    attribute_confirm_rate: Optional[float]
    action_confirm_rate: Optional[float]

    def to_payload(self) -> dict:
        return {
            "performance_count": self.performance_count,
            "pass_count": self.pass_count,
            "pass_rate": self.pass_rate,
            "medal_total": self.medal_total,
            "medal_holders": self.medal_holders,
            "top_medals": self.top_medals,
            "review_score_mean": self.review_score_mean,
            "review_score_sd": self.review_score_sd,
            "attribute_confirm_rate": self.attribute_confirm_rate,
            "action_confirm_rate": self.action_confirm_rate,
        }


def gameplay_stats(records: Iterable[EventRecord]) -> GameplayStats:
    """Exact descriptive statistics from an event log."""
    performance_count = 0
    pass_count = 0
    review_scores: list[int] = []
    attribute_confirms: list[bool] = []
    action_confirms: list[bool] = []
    medals_per_player: dict[str, int] = {}
    for record in records:
        if record.kind == "performance-recorded":
            performance_count += 1
            if record.payload["performance"]["verdict"] == "PASS":
                pass_count += 1
        elif record.kind == "review-submitted":
            review = record.payload["review"]
            review_scores.append(review["overall_score"])
            attribute_confirms.append(bool(review["attribute_confirmed"]))
            action_confirms.append(bool(review["action_confirmed"]))
            holder = record.payload["requester_id"]
            medals_per_player[holder] = medals_per_player.get(holder, 0) + 1
    n_reviews = len(review_scores)
    return GameplayStats(
        performance_count=performance_count,
        pass_count=pass_count,
        pass_rate=pass_count / performance_count if performance_count else None,
        medal_total=n_reviews,
        medal_holders=len(medals_per_player),
        top_medals=max(medals_per_player.values()) if medals_per_player else 0,
        review_score_mean=mean(review_scores) if n_reviews else None,
        review_score_sd=sample_sd(review_scores) if n_reviews >= 2 else None,
        attribute_confirm_rate=sum(attribute_confirms) / n_reviews if n_reviews else None,
        action_confirm_rate=sum(action_confirms) / n_reviews if n_reviews else None,
    )


def experience_stats(ratings_per_question: Mapping[str, Sequence[int]]) -> dict[str, tuple[float, float]]:
    """Per-question mean and sample sd of 1-5 experience ratings."""
    out: dict[str, tuple[float, float]] = {}
    for question, ratings in ratings_per_question.items():
        if not ratings:
            raise BadRequestError(f"no ratings for question {question!r}")
        lo, hi = EXPERIENCE_SCALE
        if any(not lo <= r <= hi for r in ratings):
            raise BadRequestError(f"ratings for {question!r} outside [{lo}, {hi}]")
        sd = sample_sd(ratings) if len(ratings) >= 2 else 0.0
        out[question] = (mean(ratings), sd)
    return out


# -- SRI dataset handling -----------------------------------------------------

SRI_COLUMNS = ("player_id", "friend_id", "close", "q1", "q2", "q3", "q4", "q5", "q6")


@dataclass(frozen=True)
class SriRow:
    player_id: str
    friend_id: str
    close: bool
    answers: tuple[int, ...]  # q1..q6

    @property
    def pair(self) -> tuple[str, str]:
        return (self.player_id, self.friend_id)


def write_sri_tsv(path: Path, rows: Iterable[SriRow]) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        handle.write("\t".join(SRI_COLUMNS) + "\n")
        for row in rows:
            cells = [row.player_id, row.friend_id, "1" if row.close else "0"]
            cells += [str(a) for a in row.answers]
            handle.write("\t".join(cells) + "\n")


def read_sri_tsv(path: Path) -> list[SriRow]:
    rows: list[SriRow] = []
    with Path(path).open("r", encoding="utf-8") as handle:
        header = handle.readline().rstrip("\n").split("\t")
        if tuple(header) != SRI_COLUMNS:
            raise ParseError(f"unexpected SRI header {header}", 1)
        for number, line in enumerate(handle, start=2):
            if not line.strip():
                continue
            cells = line.rstrip("\n").split("\t")
            if len(cells) != len(SRI_COLUMNS):
                raise ParseError(f"expected {len(SRI_COLUMNS)} columns", number)
            try:
                answers = tuple(int(c) for c in cells[3:9])
            except ValueError as exc:
                raise ParseError(f"non-integer answer: {exc}", number) from exc
            rows.append(
                SriRow(
                    player_id=cells[0],
                    friend_id=cells[1],
                    close=cells[2] == "1",
                    answers=answers,
                )
            )
    return rows


@dataclass(frozen=True)
class GroupReport:
    group: str
    n: int
    pre_mean: float
    post_mean: float
    t: float
    df: int
    t0_001: float
    significant: bool


def sri_report(pre_rows: Sequence[SriRow], post_rows: Sequence[SriRow]) -> list[GroupReport]:
    """Pair pre/post rows by (player, friend) and test each friendship group.

    Close/non-close membership comes from the pre-game questionnaire.
    """
    post_by_pair = {row.pair: row for row in post_rows}
    paired: list[tuple[SriRow, SriRow]] = []
    for row in pre_rows:
        match = post_by_pair.get(row.pair)
        if match is not None:
            paired.append((row, match))
    groups = {
        "all": paired,
        "close": [p for p in paired if p[0].close],
        "non-close": [p for p in paired if not p[0].close],
    }
    reports: list[GroupReport] = []
    for name, members in groups.items():
        pre = tuple(positivity(p.answers) for p, _ in members)
        post = tuple(positivity(q.answers) for _, q in members)
        result = paired_t(PairedSample(pre=pre, post=post))
        t0 = t_critical(result.df, 0.001)
        reports.append(
            GroupReport(
                group=name,
                n=len(members),
                pre_mean=mean(pre),
                post_mean=mean(post),
                t=result.t,
                df=result.df,
                t0_001=t0,
                significant=result.t > t0,
            )
        )
    return reports


REPORT_COLUMNS = ("group", "n", "pre_mean", "post_mean", "t", "df", "t0_001", "significant")


def write_report_tsv(path: Path, reports: Sequence[GroupReport]) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        handle.write("\t".join(REPORT_COLUMNS) + "\n")
        for r in reports:
            handle.write(
                "\t".join(
                    [
                        r.group,
                        str(r.n),
                        format(r.pre_mean, ".4f"),
                        format(r.post_mean, ".4f"),
                        format(r.t, ".4f"),
                        str(r.df),
                        format(r.t0_001, ".4f"),
                        "1" if r.significant else "0",
                    ]
                )
                + "\n"
            )
