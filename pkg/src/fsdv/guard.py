"""Guard-node election: the vehicle nearest the centroid of all current positions."""

from __future__ import annotations

from dataclasses import dataclass

from fsdv.core import Position, VehicleState, euclidean_distance


class GuardUnavailable(Exception):
    """Fewer than two vehicles in the region; detection aborts for this round."""


@dataclass(frozen=True, slots=True)
class GuardElection:
    """Outcome of one election round."""

    centroid: Position
    guard: int
    distances: dict[int, float]  # physical_id -> distance to centroid, meters


def centroid(positions: list[Position]) -> Position:
    """Component-wise mean of the position vectors."""
    if not positions:
        raise ValueError("centroid requires a non-empty position list")
    n = len(positions)
    return Position(
        sum(p.x for p in positions) / n,
        sum(p.y for p in positions) / n,
    )


def select_guard(vehicles: list[VehicleState]) -> GuardElection:
    """Elect the vehicle whose position minimizes distance to the centroid.

    Ties are broken by lowest physical_id so elections are reproducible.
    Only physical vehicles participate; fabricated identities have no
    physical position to contribute.
    """
    if len(vehicles) < 2:
        raise GuardUnavailable(f"need at least 2 vehicles, got {len(vehicles)}")
    center = centroid([v.position for v in vehicles])
    distances: dict[int, float] = {}
    best_id = -1
    best_d = float("inf")
    for v in vehicles:
        d = euclidean_distance(center, v.position)
        distances[v.physical_id] = d
        if d < best_d or (d == best_d and v.physical_id < best_id):
            best_d = d
            best_id = v.physical_id
    return GuardElection(centroid=center, guard=best_id, distances=distances)
