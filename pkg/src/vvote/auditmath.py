"""Audit statistics: probability that sampling misses ``F`` bad ballots, the
Bayesian posterior given a clean sample, and the sampling rate needed for a
target confidence.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from vvote.errors import ParameterError

SOLVER_TOL = 1e-9


def _check_prob(name: str, x: float) -> None:
    if not 0.0 <= x <= 1.0 or math.isnan(x):
        raise ParameterError(f"{name} must lie in [0, 1], got {x}")


def prob_pass_exact(N: int, S: int, F: int) -> float:
    """Probability a uniform sample of ``S`` of ``N`` ballots contains none of ``F`` bad ones.

    Uses the F-term product ``prod_{i<F} (N-S-i)/(N-i)``.
    """
    if min(N, S, F) < 0 or S > N or F > N:
        raise ParameterError("need 0 <= S, F <= N")
    p = 1.0
    for i in range(F):
        if N - S - i <= 0:
            return 0.0
        p *= (N - S - i) / (N - i)
    return p


def prob_pass_approx(r: float, F: int) -> float:
    _check_prob("r", r)
    if F < 0:
        raise ParameterError("F must be non-negative")
    return (1.0 - r) ** F


def posterior(q: float, r: float, F: int) -> float:
    """Probability of an ``F``-ballot attack given prior ``q`` and a clean sample at rate ``r``."""
    _check_prob("q", q)
    if q == 1.0:
        return 1.0
    miss = prob_pass_approx(r, F)
    return miss * q / (miss * q + (1.0 - q))


@dataclass(frozen=True)
class RateResult:
    rate: float | None
    feasible: bool
    method: str
    note: str = ""


def required_rate(q: float, F: int, confidence: float) -> RateResult:
    """Smallest ``r`` with ``posterior(q, r, F) <= 1 - confidence``.

    Closed form ``r = 1 - x**(1/F)`` with ``x = (1-q)(1-c)/(q c)``, clamped to
    [0, 1]. Infeasible when no rate suffices (``q = 1``, or ``F = 0`` with a
    prior above the target).
    """
    _check_prob("q", q)
    if not 0.0 < confidence < 1.0:
        raise ParameterError("confidence must lie strictly between 0 and 1")
    if F < 0:
        raise ParameterError("F must be non-negative")
    target = 1.0 - confidence
    if q <= target:
        return RateResult(0.0, True, "closed-form", "prior already meets the target")
    if q == 1.0:
        return RateResult(None, False, "closed-form", "a certain attack cannot be ruled out by sampling")
    if F == 0:
        return RateResult(None, False, "closed-form", "no sampling rate detects zero altered ballots")
    x = (1.0 - q) * target / (q * confidence)
    r = 1.0 - x ** (1.0 / F)
    return RateResult(min(max(r, 0.0), 1.0), True, "closed-form")


def solve_rate(fn: Callable[[float], float], target: float, tol: float = SOLVER_TOL) -> RateResult:
    """Bisection for the least ``r`` in [0, 1] with ``fn(r) <= target``; ``fn`` decreasing."""
    if fn(0.0) <= target:
        return RateResult(0.0, True, "bisection")
    if fn(1.0) > target:
        return RateResult(None, False, "bisection", "target not reached even at r = 1")
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if fn(mid) <= target:
            hi = mid
        else:
            lo = mid
    return RateResult(hi, True, "bisection")


def required_rate_no_prior(F: int, confidence: float) -> float:
    """Rate with ``(1-r)^F <= 1 - confidence`` (no prior on the attack)."""
    if not 0.0 < confidence < 1.0 or F <= 0:
        raise ParameterError("need 0 < confidence < 1 and F >= 1")
    return 1.0 - (1.0 - confidence) ** (1.0 / F)


def required_rate_exact(N: int, F: int, confidence: float) -> RateResult:
    """Without-replacement variant: least ``S/N`` with ``prob_pass_exact <= 1 - confidence``."""
    target = 1.0 - confidence
    lo, hi = 0, N
    if prob_pass_exact(N, N, F) > target:
        return RateResult(None, False, "bisection", "target not reached by a full count")
    while lo < hi:
        mid = (lo + hi) // 2
        if prob_pass_exact(N, mid, F) <= target:
            hi = mid
        else:
            lo = mid + 1
    return RateResult(lo / N, True, "bisection")


@dataclass(frozen=True)
class StageCombination:
    miss_probability: float
    bound: float
    weakest_rate: float


def combine_stages(stages: Sequence[tuple[float, int]]) -> StageCombination:
    """Miss probability across stages and its bound at the weakest stage's rate."""
    if not stages:
        raise ParameterError("need at least one stage")
    p0 = 1.0
    for r, f in stages:
        p0 *= prob_pass_approx(r, f)
    r_min = min(r for r, _ in stages)
    return StageCombination(p0, prob_pass_approx(r_min, sum(f for _, f in stages)), r_min)


MIX_STAGE_RATE = 0.25


# -- tables --------------------------------------------------------------------------

PRIORS = (0.01, 0.05, 0.10, 0.20, 0.50)
FRAUD_COUNTS = (10, 20, 50, 100, 200, 500, 1000)
RATES = (0.001, 0.005, 0.01, 0.02, 0.03, 0.05, 0.10)
CONFIDENCES = (0.90, 0.95, 0.99, 0.995, 0.999)


def posterior_table(F: int = 100, priors: Iterable[float] = PRIORS, rates: Iterable[float] = RATES) -> list[list]:
    rates = list(rates)
    rows: list[list] = [["q"] + [f"r={r}" for r in rates]]
    for q in priors:
        rows.append([q] + [round(posterior(q, r, F), 6) for r in rates])
    return rows


def rate_table(confidence: float, priors: Iterable[float] = PRIORS, counts: Iterable[int] = FRAUD_COUNTS) -> list[list]:
    priors = list(priors)
    rows: list[list] = [["F"] + [f"q={q}" for q in priors]]
    for F in counts:
        row: list = [F]
        for q in priors:
            res = required_rate(q, F, confidence)
            row.append(round(res.rate, 6) if res.feasible else "infeasible")
        rows.append(row)
    return rows


def confidence_table(q: float = 0.05, counts: Iterable[int] = FRAUD_COUNTS, rates: Iterable[float] = RATES) -> list[list]:
    rates = list(rates)
    rows: list[list] = [["F"] + [f"r={r}" for r in rates]]
    for F in counts:
        rows.append([F] + [round(1.0 - posterior(q, r, F), 6) for r in rates])
    return rows


def no_prior_confidence_table(counts: Iterable[int] = FRAUD_COUNTS, rates: Iterable[float] = RATES) -> list[list]:
    rates = list(rates)
    rows: list[list] = [["F"] + [f"r={r}" for r in rates]]
    for F in counts:
        rows.append([F] + [round(1.0 - prob_pass_approx(r, F), 6) for r in rates])
    return rows


def no_prior_rate_table(counts: Iterable[int] = FRAUD_COUNTS, confidences: Iterable[float] = CONFIDENCES) -> list[list]:
    confidences = list(confidences)
    rows: list[list] = [["F"] + [f"c={c}" for c in confidences]]
    for F in counts:
        rows.append([F] + [round(required_rate_no_prior(F, c), 6) for c in confidences])
    return rows


def emit_tables(out_dir: str | Path, delimiter: str = ",") -> list[Path]:
    """Write the standard tables as delimited text; returns the files written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tables = {
        "posterior_F100.csv": posterior_table(),
        "rates_995.csv": rate_table(0.995),
        "rates_95.csv": rate_table(0.95),
        "confidence_q05.csv": confidence_table(),
        "confidence_no_prior.csv": no_prior_confidence_table(),
        "rates_no_prior.csv": no_prior_rate_table(),
    }
    written = []
    for name, rows in tables.items():
        p = out / name
        with open(p, "w", newline="") as f:
            csv.writer(f, delimiter=delimiter).writerows(rows)
        written.append(p)
    return written
