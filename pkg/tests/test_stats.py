from __future__ import annotations

import random

import mpmath as mp
import pytest

from bodylang.errors import BadRequestError
from bodylang.stats import (
    mean,
    regularized_incomplete_beta,
    sample_sd,
    student_t_cdf,
    student_t_sf,
    t_critical,
)

mp.mp.dps = 40


def oracle_sf(t: float, df: int) -> float:
    """Independent upper tail via mpmath's incomplete beta."""
    x = mp.mpf(df) / (df + mp.mpf(t) ** 2)
    tail = mp.betainc(mp.mpf(df) / 2, mp.mpf(1) / 2, 0, x, regularized=True) / 2
    return float(tail if t > 0 else 1 - tail)


def oracle_t_critical(df: int, p: float) -> float:
    lo, hi = mp.mpf(0), mp.mpf(10) ** 7  # df=1 tails are enormous
    for _ in range(120):
        mid = (lo + hi) / 2
        if oracle_sf(float(mid), df) > p:
            lo = mid
        else:
            hi = mid
    return float((lo + hi) / 2)


def test_incomplete_beta_against_oracle():
    rng = random.Random(1)
    for _ in range(200):
        a = rng.uniform(0.2, 80.0)
        b = rng.uniform(0.2, 80.0)
        x = rng.random()
        expected = float(mp.betainc(a, b, 0, x, regularized=True))
        assert abs(regularized_incomplete_beta(a, b, x) - expected) < 1e-10


def test_incomplete_beta_edges():
    assert regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0
    assert regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0
    with pytest.raises(BadRequestError):
        regularized_incomplete_beta(-1.0, 2.0, 0.5)
    with pytest.raises(BadRequestError):
        regularized_incomplete_beta(1.0, 2.0, 1.5)


def test_t_sf_against_oracle():
    for df in (1, 2, 5, 30, 149, 1000):
        for t in (-3.0, -0.5, 0.0, 0.5, 1.0, 2.5, 4.0):
            assert abs(student_t_sf(t, df) - oracle_sf(t, df)) < 1e-12 or abs(
                student_t_sf(t, df) - oracle_sf(t, df)
            ) < 1e-10


def test_t_cdf_complements_sf():
    assert abs(student_t_cdf(1.7, 12) + student_t_sf(1.7, 12) - 1.0) < 1e-14


def test_table_critical_values():
    # field-study degrees of freedom at one-tailed p = 0.001
    assert abs(t_critical(149, 0.001) - 3.15) <= 0.01
    assert abs(t_critical(57, 0.001) - 3.24) <= 0.01
    assert abs(t_critical(91, 0.001) - 3.18) <= 0.01


def test_t_critical_against_oracle_grid():
    for df in (1, 3, 10, 57, 91, 149, 500):
        for p in (0.1, 0.01, 0.001):
            assert abs(t_critical(df, p) - oracle_t_critical(df, p)) < 1e-4


def test_t_critical_monotone_in_df_and_p():
    values = [t_critical(df, 0.001) for df in (2, 5, 20, 100, 1000)]
    assert values == sorted(values, reverse=True)
    tighter = [t_critical(60, p) for p in (0.1, 0.01, 0.001)]
    assert tighter == sorted(tighter)


def test_t_critical_normal_limit():
    # df -> infinity approaches the standard normal quantile
    assert abs(t_critical(10**6, 0.001) - 3.0902) <= 0.001


def test_t_critical_rejects_invalid():
    with pytest.raises(BadRequestError):
        t_critical(0, 0.001)
    with pytest.raises(BadRequestError):
        t_critical(10, 0.6)
    with pytest.raises(BadRequestError):
        t_critical(10, 0.0)


def test_mean_and_sd_helpers():
    assert mean([3, 4]) == 3.5
    assert abs(sample_sd([3, 4]) - 0.7071067811865476) < 1e-12
    with pytest.raises(BadRequestError):
        mean([])
    with pytest.raises(BadRequestError):
        sample_sd([1.0])
