"""Shared domain types: positions, vehicle state, and the beacon message format."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

BEACON_PERIOD_MS = 100          # broadcast cadence
BEACON_SIZE_BITS = 2048         # 256-byte payload
FABRICATED_ID_BASE = 1_000_000  # fabricated identities allocated above this

BEACON_CSV_HEADER = "sender_id,timestamp_ms,x_m,y_m,speed_mps,size_bits"


class Classification(Enum):
    """Detector verdict for a broadcasting identity."""

    HONEST = "honest"
    ROGUE = "rogue"


@dataclass(frozen=True, slots=True)
class Position:
    """2D position, meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"position must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True, slots=True)
class VehicleState:
    """Kinematic state and identity of one physical vehicle.

    A rogue vehicle owns its physical id plus at least one fabricated id;
    honest vehicles own no fabricated ids.
    """

    physical_id: int
    position: Position
    true_speed: float  # m/s
    lane: int
    is_rogue: bool = False
    fabricated_ids: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        if self.true_speed < 0 or not math.isfinite(self.true_speed):
            raise ValueError(f"true_speed must be finite and >= 0, got {self.true_speed}")
        if self.is_rogue != bool(self.fabricated_ids):
            raise ValueError("fabricated_ids must be non-empty iff the vehicle is rogue")
        if self.physical_id in self.fabricated_ids:
            raise ValueError("fabricated ids must be disjoint from the physical id")


@dataclass(frozen=True, slots=True)
class BeaconMessage:
    """One periodic broadcast: sender id, timestamp, claimed position and speed."""

    sender: int
    timestamp: int  # ms since run start
    position: Position
    reported_speed: float  # m/s
    size_bits: int = BEACON_SIZE_BITS

    def __post_init__(self) -> None:
        if self.timestamp < 0:
            raise ValueError(f"timestamp must be >= 0, got {self.timestamp}")
        if self.reported_speed < 0 or not math.isfinite(self.reported_speed):
            raise ValueError(f"reported_speed must be finite and >= 0, got {self.reported_speed}")
        if self.size_bits <= 0:
            raise ValueError(f"size_bits must be positive, got {self.size_bits}")


def euclidean_distance(a: Position, b: Position) -> float:
    """Straight-line distance between two positions, meters."""
    return math.hypot(a.x - b.x, a.y - b.y)


def beacons_to_csv(beacons: list[BeaconMessage]) -> str:
    """Serialize beacons to the line-per-record wire form, header first.

    Floats are written with repr so decoding round-trips bit-exactly.
    """
    lines = [BEACON_CSV_HEADER]
    for b in beacons:
        lines.append(
            f"{b.sender},{b.timestamp},{b.position.x!r},{b.position.y!r},"
            f"{b.reported_speed!r},{b.size_bits}"
        )
    return "\n".join(lines) + "\n"


def beacons_from_csv(text: str) -> list[BeaconMessage]:
    """Parse the wire form produced by :func:`beacons_to_csv`."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != BEACON_CSV_HEADER:
        raise ValueError(f"expected header {BEACON_CSV_HEADER!r}")
    beacons = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 6:
            raise ValueError(f"line {lineno}: expected 6 fields, got {len(parts)}")
        sender, ts, x, y, speed, bits = parts
        beacons.append(
            BeaconMessage(
                sender=int(sender),
                timestamp=int(ts),
                position=Position(float(x), float(y)),
                reported_speed=float(speed),
                size_bits=int(bits),
            )
        )
    return beacons
