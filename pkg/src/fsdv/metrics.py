"""Run-level evaluation metrics and report serialization.

An identity counts as detected when it was classified rogue in at least one
round of the run (detections are sticky: flagged ids are stored and
announced). TPR is computed per identity, fabricated ids included: a Sybil
attack is only defeated once the fabricated identities themselves are
flagged. A per-vehicle alternate counter is provided for comparison.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from fsdv.core import Classification
from fsdv.detector import ANNOUNCE_HEADER_BITS, ANNOUNCE_ID_BITS
from fsdv.probability import DetectionProbParams

# ledger: identity -> (ground truth, final classification)
Ledger = dict[int, tuple[Classification, Classification]]

NA = "NA"  # not-applicable sentinel in CSV output

REPORT_CSV_HEADER = (
    "config_digest,rounds,tpr,fpr,plr,avg_throughput,overhead_bits,d_c,d_q,d_p,d_t"
)


@dataclass(slots=True)
class DelayBreakdown:
    d_c: float  # communication, s
    d_q: float  # queuing, s
    d_p: float  # processing, s
    d_t: float  # total, s


@dataclass(slots=True)
class SimReport:
    """Per-run metrics plus the per-identity classification ledger."""

    config_digest: str
    rounds: int
    tpr: float | None
    fpr: float | None
    plr: float
    avg_throughput: float  # bits/s
    overhead_bits: int
    delays: DelayBreakdown
    prob_calibration: DetectionProbParams
    per_identity: Ledger
    emitted_beacons: int = 0
    dropped_beacons: int = 0
    delivered_beacons: int = 0
    speed_clamp_events: int = 0
    stale_beacons: int = 0
    skipped_rounds: int = 0
    negative_queue_delay: bool = False


def true_positive_rate(ledger: Ledger) -> float | None:
    """Detected rogue identities over total rogue identities; None if no rogues."""
    rogue_total = 0
    rogue_detected = 0
    for truth, final in ledger.values():
        if truth is Classification.ROGUE:
            rogue_total += 1
            if final is Classification.ROGUE:
                rogue_detected += 1
    if rogue_total == 0:
        return None
    return rogue_detected / rogue_total


def true_positive_rate_per_vehicle(
    ledger: Ledger, fabricated_owner: dict[int, int]
) -> float | None:
    """Alternate TPR counting each rogue vehicle once.

    fabricated_owner maps fabricated id -> owning physical id. A vehicle
    counts as detected when any of its identities was flagged.
    """
    vehicles: dict[int, bool] = {}
    for ident, (truth, final) in ledger.items():
        if truth is not Classification.ROGUE:
            continue
        owner = fabricated_owner.get(ident, ident)
        vehicles[owner] = vehicles.get(owner, False) or final is Classification.ROGUE
    if not vehicles:
        return None
    return sum(vehicles.values()) / len(vehicles)


def false_positive_rate(ledger: Ledger) -> float | None:
    """Honest identities ever flagged over total honest identities; None if no honest."""
    honest_total = 0
    honest_flagged = 0
    for truth, final in ledger.values():
        if truth is Classification.HONEST:
            honest_total += 1
            if final is Classification.ROGUE:
                honest_flagged += 1
    if honest_total == 0:
        return None
    return honest_flagged / honest_total


def packet_loss_ratio(emitted: int, dropped: int) -> float:
    """dropped / emitted; zero by convention when nothing was emitted."""
    if emitted < 0 or dropped < 0:
        raise ValueError("counts must be non-negative")
    if dropped > emitted:
        raise ValueError(f"accounting error: dropped {dropped} > emitted {emitted}")
    if emitted == 0:
        return 0.0
    return dropped / emitted


def average_throughput(delivered_bits: int, duration: float) -> float:
    """Successfully delivered beacon bits per second."""
    if duration <= 0:
        raise ValueError(f"duration must be > 0, got {duration}")
    return delivered_bits / duration


def overhead(event_log: list[tuple]) -> int:
    """Total bits of non-beacon traffic in the event log.

    Only rogue announcements cost bits; the per-round threshold record rides
    in the announcement header. Beacons themselves are not overhead.
    """
    bits = 0
    for record in event_log:
        if record[0] == "ANNOUNCE":
            ids = record[-1]
            bits += ANNOUNCE_HEADER_BITS + ANNOUNCE_ID_BITS * len(ids)
    return bits


def _scalar_fields(report: SimReport) -> dict:
    return {
        "config_digest": report.config_digest,
        "rounds": report.rounds,
        "tpr": report.tpr,
        "fpr": report.fpr,
        "plr": report.plr,
        "avg_throughput": report.avg_throughput,
        "overhead_bits": report.overhead_bits,
        "d_c": report.delays.d_c,
        "d_q": report.delays.d_q,
        "d_p": report.delays.d_p,
        "d_t": report.delays.d_t,
    }


def report_to_dict(report: SimReport) -> dict:
    """Flat key-value form of the report; ledger values become string pairs."""
    doc = _scalar_fields(report)
    doc.update(
        {
            "prob_x_fog": report.prob_calibration.x_fog,
            "prob_p_reach": report.prob_calibration.p_reach,
            "prob_p_honest_correct": report.prob_calibration.p_honest_correct,
            "prob_p_rogue_correct": report.prob_calibration.p_rogue_correct,
            "emitted_beacons": report.emitted_beacons,
            "dropped_beacons": report.dropped_beacons,
            "delivered_beacons": report.delivered_beacons,
            "speed_clamp_events": report.speed_clamp_events,
            "stale_beacons": report.stale_beacons,
            "skipped_rounds": report.skipped_rounds,
            "negative_queue_delay": report.negative_queue_delay,
            "per_identity": {
                str(ident): [truth.value, final.value]
                for ident, (truth, final) in sorted(report.per_identity.items())
            },
        }
    )
    return doc


def report_to_json(report: SimReport) -> str:
    """Deterministic JSON document for the report."""
    return json.dumps(report_to_dict(report), sort_keys=True, indent=2) + "\n"


def _csv_value(v) -> str:
    if v is None:
        return NA
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_to_csv_row(report: SimReport) -> str:
    """One CSV row of the scalar report fields, matching REPORT_CSV_HEADER."""
    return ",".join(_csv_value(v) for v in _scalar_fields(report).values())
