"""Closed-form detection probability and its complement.

The correct-detection expression X*(P1*P + P2*P) is not self-normalizing:
it can exceed 1 when P1 + P2 > 1. Out-of-range results are flagged with a
warning and returned unchanged rather than clamped, so the caller sees the
model as-is.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

if TYPE_CHECKING:
    from fsdv.metrics import SimReport


class ProbabilityRangeWarning(UserWarning):
    """A probability expression left [0, 1] for the given parameters."""


@dataclass(frozen=True, slots=True)
class DetectionProbParams:
    """Component probabilities of the detection pipeline.

    x_fog: fog creation succeeds; p_reach: a beacon reaches the guard;
    p_honest_correct / p_rogue_correct: an honest / rogue identity is
    classified correctly.
    """

    x_fog: float = 1.0
    p_reach: float = 1.0
    p_honest_correct: float = 1.0
    p_rogue_correct: float = 1.0

    def __post_init__(self) -> None:
        for name in ("x_fog", "p_reach", "p_honest_correct", "p_rogue_correct"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


def _correct(p: DetectionProbParams) -> float:
    return p.x_fog * (p.p_honest_correct * p.p_reach + p.p_rogue_correct * p.p_reach)


def correct_detection_probability(p: DetectionProbParams) -> float:
    """X * (P1*P + P2*P); flagged if the result exceeds 1."""
    v = _correct(p)
    if v > 1.0:
        warnings.warn(
            f"correct-detection probability {v} exceeds 1 "
            f"(p_honest_correct + p_rogue_correct = {p.p_honest_correct + p.p_rogue_correct})",
            ProbabilityRangeWarning,
            stacklevel=2,
        )
    return v


def incorrect_detection_probability(p: DetectionProbParams) -> tuple[float, float]:
    """(exact, approximate) probability of incorrect prediction.

    exact is the strict complement 1 - [X*P1 + X*P2]*P; approx drops the
    honest term, 1 - X*P2*P. Both are returned so the approximation error
    (exactly X*P1*P) stays inspectable. exact shares the complement's float
    expression with correct_detection_probability so the two sum to 1.0
    bit-exactly.
    """
    exact = 1.0 - _correct(p)
    approx = 1.0 - p.x_fog * p.p_rogue_correct * p.p_reach
    return exact, approx


def calibrate_from_reports(reports: Iterable["SimReport"]) -> DetectionProbParams:
    """Estimate (X, P, P1, P2) from simulated runs.

    P is the delivery rate (complement of mean packet loss), P1 the honest
    correct-classification rate (complement of mean FPR), P2 the rogue
    correct-classification rate (mean TPR). Fog creation always succeeds in
    simulation, so X = 1. Runs where a rate is undefined (no honest or no
    rogue identities) are skipped for that rate; with no defined samples the
    rate defaults to 1.
    """
    plrs: list[float] = []
    fprs: list[float] = []
    tprs: list[float] = []
    for r in reports:
        plrs.append(r.plr)
        if r.fpr is not None:
            fprs.append(r.fpr)
        if r.tpr is not None:
            tprs.append(r.tpr)
    if not plrs:
        raise ValueError("calibration requires at least one report")

    def mean(xs: list[float]) -> float:
        return sum(xs) / len(xs)

    return DetectionProbParams(
        x_fog=1.0,
        p_reach=1.0 - mean(plrs),
        p_honest_correct=1.0 - mean(fprs) if fprs else 1.0,
        p_rogue_correct=mean(tprs) if tprs else 1.0,
    )
