"""Welch two-sample t-tests (incomplete-beta p-values) and failure-mode analysis."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .metrics import RunTrajectory, true_rank_of

_CF_MAX_ITER = 300
_CF_EPS = 3e-16
_CF_TINY = 1e-300


@dataclass(frozen=True)
class TTestResult:
    t_stat: float
    p_value: float
    df: float
    degenerate: bool = False


@dataclass(frozen=True)
class ErrorAnalysis:
    failure_rate: float
    avg_true_rank_on_failure: float | None


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise RuntimeError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # the continued fraction converges fast only on one side of the mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for a Student-t variable with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))


def student_t_cdf(t: float, df: float) -> float:
    half_tail = 0.5 * student_t_two_sided_p(t, df)
    return half_tail if t < 0 else 1.0 - half_tail


def welch_t_test(x: Sequence[float], y: Sequence[float]) -> TTestResult:
    """Two-sided Welch test: unequal-variance SE, Welch-Satterthwaite df.

    Zero variance in both samples is flagged as degenerate: equal means give
    (t=0, p=1), unequal means (t=+/-inf, p=0).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or y.size < 2:
        raise ValueError("each sample needs at least 2 observations")
    nx, ny = x.size, y.size
    mx, my = float(x.mean()), float(y.mean())
    vx = float(x.var(ddof=1))
    vy = float(y.var(ddof=1))
    se2 = vx / nx + vy / ny
    if se2 == 0.0:
        if mx == my:
            return TTestResult(t_stat=0.0, p_value=1.0, df=float("nan"), degenerate=True)
        t = math.inf if mx > my else -math.inf
        return TTestResult(t_stat=t, p_value=0.0, df=float("nan"), degenerate=True)
    t = (mx - my) / math.sqrt(se2)
    df = se2**2 / ((vx / nx) ** 2 / (nx - 1) + (vy / ny) ** 2 / (ny - 1))
    return TTestResult(t_stat=t, p_value=student_t_two_sided_p(t, df), df=df)


def error_analysis(
    runs: Sequence[RunTrajectory], true_winner: int, true_order: np.ndarray
) -> ErrorAnalysis:
    """Failure rate plus how close to the winner the failing recommendations land."""
    if not runs:
        raise ValueError("need at least one run")
    failing = [run for run in runs if run.final_recommendation != true_winner]
    # computed as the exact complement of the recovery fraction, not as
    # len(failing)/len(runs), so the two differ by not even an ulp
    rate = 1.0 - (len(runs) - len(failing)) / len(runs)
    if not failing:
        return ErrorAnalysis(failure_rate=rate, avg_true_rank_on_failure=None)
    ranks = [true_rank_of(run.final_recommendation, true_order) for run in failing]
    return ErrorAnalysis(failure_rate=rate, avg_true_rank_on_failure=float(np.mean(ranks)))
