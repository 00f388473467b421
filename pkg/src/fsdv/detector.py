"""Per-round detection loop at the guard node.

The guard maintains a neighbor table from incoming beacons, derives the
regional model speed once per round, sets a threshold, and flags every
identity whose reported speed falls too far below the model speed. Equality
with the threshold counts as rogue: the honest branch requires a strictly
smaller deviation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from fsdv.core import BeaconMessage, Classification, VehicleState
from fsdv.guard import GuardElection, select_guard
from fsdv.traffic import GreenshieldParams, density, guard_speed, is_over_jam

ANNOUNCE_HEADER_BITS = 64  # carries round threshold/speed info
ANNOUNCE_ID_BITS = 32      # per flagged identity


class StaleBeaconError(Exception):
    """Beacon timestamp is older than the stored entry; the beacon is dropped."""


@dataclass(slots=True)
class NeighborEntry:
    sender: int
    last_timestamp: int          # ms
    last_reported_speed: float   # m/s


class NeighborTable:
    """Per-identity record of last-seen timestamp and last reported speed."""

    def __init__(self) -> None:
        self.entries: dict[int, NeighborEntry] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, sender: int) -> bool:
        return sender in self.entries

    def get(self, sender: int) -> NeighborEntry | None:
        return self.entries.get(sender)


def update_neighbors(table: NeighborTable, beacon: BeaconMessage) -> NeighborTable:
    """Add the sender on first contact, otherwise overwrite timestamp and speed.

    Raises StaleBeaconError for a beacon older than the stored entry, so
    last_timestamp never decreases.
    """
    entry = table.entries.get(beacon.sender)
    if entry is None:
        table.entries[beacon.sender] = NeighborEntry(
            sender=beacon.sender,
            last_timestamp=beacon.timestamp,
            last_reported_speed=beacon.reported_speed,
        )
    else:
        if beacon.timestamp < entry.last_timestamp:
            raise StaleBeaconError(
                f"beacon from {beacon.sender} at t={beacon.timestamp} older than "
                f"stored t={entry.last_timestamp}"
            )
        entry.last_timestamp = beacon.timestamp
        entry.last_reported_speed = beacon.reported_speed
    return table


@dataclass(frozen=True, slots=True)
class ThresholdPolicy:
    """Threshold rule: a fixed speed gap, or a fraction of the regional speed.

    The speed-proportional mode tracks traffic: as the regional speed drops
    the threshold drops with it.
    """

    mode: str                 # "fixed" | "speed_proportional"
    fixed_value: float = 0.0  # m/s, fixed mode
    alpha: float = 0.0        # fraction in (0, 1], speed-proportional mode

    def __post_init__(self) -> None:
        if self.mode == "fixed":
            if self.fixed_value < 0:
                raise ValueError(f"fixed_value must be >= 0, got {self.fixed_value}")
        elif self.mode == "speed_proportional":
            if not 0.0 < self.alpha <= 1.0:
                raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        else:
            raise ValueError(f"unknown threshold mode {self.mode!r}")

    @classmethod
    def fixed(cls, value: float) -> "ThresholdPolicy":
        return cls(mode="fixed", fixed_value=value)

    @classmethod
    def speed_proportional(cls, alpha: float) -> "ThresholdPolicy":
        return cls(mode="speed_proportional", alpha=alpha)


def dynamic_threshold(s_g: float, policy: ThresholdPolicy) -> float:
    """Threshold for this round given the regional model speed."""
    if s_g < 0:
        raise ValueError(f"s_g must be >= 0, got {s_g}")
    if policy.mode == "fixed":
        return policy.fixed_value
    return policy.alpha * s_g


def classify(s_g: float, s_rcvd: float, s_th: float) -> Classification:
    """Honest iff (s_g - s_rcvd) < s_th; equality and larger gaps are rogue.

    Reporting faster than the model speed gives a negative gap, which is
    always honest: the attack of interest is a congestion illusion, i.e.
    depressed speed reports.
    """
    if s_g - s_rcvd < s_th:
        return Classification.HONEST
    return Classification.ROGUE


@dataclass(slots=True)
class DetectionRound:
    """Result of one detection round at the guard."""

    guard: int
    s_g: float
    s_th: float
    classifications: dict[int, Classification] = field(default_factory=dict)
    rogue_list: list[int] = field(default_factory=list)
    rho: float = 0.0
    speed_clamped: bool = False
    stale_beacons: int = 0


def run_detection_round(
    beacons: list[BeaconMessage],
    vehicles: list[VehicleState],
    policy: ThresholdPolicy,
    params: GreenshieldParams,
    *,
    density_from_ground_truth: bool = False,
) -> DetectionRound:
    """One full detection round: elect, aggregate, threshold, classify.

    The guard is elected from the physical vehicles (needs at least two).
    Beacons are applied to the neighbor table in timestamp order; stale
    beacons are dropped and counted. Density, model speed and threshold are
    computed once per round from the round's aggregates, then every fresh
    beacon is classified against them. An identity is rogue for the round if
    any of its beacons deviates by at least the threshold.

    density_from_ground_truth switches the vehicle count in the density
    product from distinct observed sender ids (all the guard can know; Sybil
    identities inflate it) to the physical vehicle count, for sensitivity
    studies.
    """
    election: GuardElection = select_guard(vehicles)

    table = NeighborTable()
    ordered = sorted(beacons, key=lambda b: b.timestamp)
    fresh: list[BeaconMessage] = []
    beacon_counts: dict[int, int] = {}
    stale = 0
    for b in ordered:
        try:
            update_neighbors(table, b)
        except StaleBeaconError:
            stale += 1
            continue
        fresh.append(b)
        beacon_counts[b.sender] = beacon_counts.get(b.sender, 0) + 1

    per_id = max(beacon_counts.values(), default=0)
    n_ids = len(vehicles) if density_from_ground_truth else len(beacon_counts)
    sample = density(per_id, n_ids)
    s_g = guard_speed(sample.rho, params)
    s_th = dynamic_threshold(s_g, policy)

    flagged: set[int] = set()
    for b in fresh:
        if classify(s_g, b.reported_speed, s_th) is Classification.ROGUE:
            flagged.add(b.sender)

    classifications = {
        sender: (Classification.ROGUE if sender in flagged else Classification.HONEST)
        for sender in beacon_counts
    }
    return DetectionRound(
        guard=election.guard,
        s_g=s_g,
        s_th=s_th,
        classifications=classifications,
        rogue_list=sorted(flagged),
        rho=sample.rho,
        speed_clamped=is_over_jam(sample.rho, params),
        stale_beacons=stale,
    )


def announcement_bits(rogue_count: int) -> int:
    """Size of the rogue-announcement broadcast; zero when nothing to announce."""
    if rogue_count < 0:
        raise ValueError(f"rogue_count must be >= 0, got {rogue_count}")
    if rogue_count == 0:
        return 0
    return ANNOUNCE_HEADER_BITS + ANNOUNCE_ID_BITS * rogue_count


def format_announcement(round_index: int, result: DetectionRound) -> str:
    """Announcement record: round_index, guard_id, s_g, s_th, rogue ids."""
    ids = ",".join(str(i) for i in result.rogue_list)
    return f"{round_index},{result.guard},{result.s_g!r},{result.s_th!r},{ids}"
