"""Floating-car-data trace ingestion (SUMO FCD XML) for mobility playback.

A trace replaces the synthetic ring mobility: each <timestep> becomes one
simulation round and each <vehicle id x y speed> element becomes one
physical vehicle state. Rogue marking is still applied per config, so a
recorded honest trace can be replayed with injected Sybil behavior.
"""

from __future__ import annotations

import random
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from fsdv.core import FABRICATED_ID_BASE, Position, VehicleState
from fsdv.sim import ScenarioConfig, World


class TraceImportError(Exception):
    """The trace file is malformed; the message names the offending element."""


@dataclass(slots=True)
class TraceVehicle:
    vid: str
    x: float
    y: float
    speed: float


@dataclass
class TracePlayback:
    """Parsed trace: one frame per timestep, plus identity and rogue maps."""

    frames: list[list[TraceVehicle]]
    id_map: dict[str, int]            # trace id -> physical id
    rogue_ids: set[int]               # physical ids marked rogue
    fabricated: dict[int, frozenset[int]] = field(default_factory=dict)

    @property
    def n_vehicles(self) -> int:
        return len(self.id_map)

    def apply_frame(self, world: World, index: int, config: ScenarioConfig) -> None:
        """Replace the world's vehicles with frame `index` and advance the clock."""
        vehicles = []
        for tv in self.frames[index]:
            pid = self.id_map[tv.vid]
            is_rogue = pid in self.rogue_ids
            vehicles.append(
                VehicleState(
                    physical_id=pid,
                    position=Position(tv.x, tv.y),
                    true_speed=tv.speed,
                    lane=0,
                    is_rogue=is_rogue,
                    fabricated_ids=self.fabricated.get(pid, frozenset())
                    if is_rogue
                    else frozenset(),
                )
            )
        world.vehicles = vehicles
        world.clock_ms += config.beacon_period_ms


def _parse_frames(path: str) -> list[list[TraceVehicle]]:
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as e:
        raise TraceImportError(f"malformed XML in {path}: {e}") from e

    frames: list[list[TraceVehicle]] = []
    for t_idx, timestep in enumerate(root.iter("timestep")):
        frame: list[TraceVehicle] = []
        for v_idx, vehicle in enumerate(timestep.iter("vehicle")):
            where = f"timestep[{t_idx}]/vehicle[{v_idx}]"
            values: dict[str, float | str] = {}
            vid = vehicle.get("id")
            if vid is None:
                raise TraceImportError(f"{where}: missing attribute 'id'")
            for attr in ("x", "y", "speed"):
                raw = vehicle.get(attr)
                if raw is None:
                    raise TraceImportError(f"{where}: missing attribute {attr!r}")
                try:
                    values[attr] = float(raw)
                except ValueError as e:
                    raise TraceImportError(
                        f"{where}: attribute {attr!r} is not a number: {raw!r}"
                    ) from e
            if values["speed"] < 0:
                raise TraceImportError(f"{where}: negative speed {values['speed']}")
            frame.append(
                TraceVehicle(vid=vid, x=values["x"], y=values["y"], speed=values["speed"])
            )
        frames.append(frame)
    return frames


def import_trace(path: str, config: ScenarioConfig) -> TracePlayback:
    """Parse an FCD trace and build a mobility override for `run`.

    Physical ids are assigned in first-appearance order. floor(rogue_fraction
    * n) vehicles are marked rogue, chosen deterministically from the config
    seed, and allocated sybil_ids_per_rogue fabricated ids each.
    """
    frames = _parse_frames(path)
    if not frames:
        raise TraceImportError(f"{path}: trace contains no timestep elements")

    id_map: dict[str, int] = {}
    for frame in frames:
        for tv in frame:
            if tv.vid not in id_map:
                id_map[tv.vid] = len(id_map)

    n = len(id_map)
    if n < 2:
        raise TraceImportError(f"{path}: trace has {n} vehicles, need at least 2")
    if n > 4000:
        raise TraceImportError(f"{path}: trace has {n} vehicles, limit is 4000")

    rng = random.Random(config.seed)
    n_rogues = int(config.rogue_fraction * n)
    rogue_ids = set(rng.sample(range(n), n_rogues)) if n_rogues else set()
    fabricated: dict[int, frozenset[int]] = {}
    for idx, pid in enumerate(sorted(rogue_ids)):
        base = FABRICATED_ID_BASE + idx * config.sybil_ids_per_rogue
        fabricated[pid] = frozenset(range(base, base + config.sybil_ids_per_rogue))

    return TracePlayback(
        frames=frames, id_map=id_map, rogue_ids=rogue_ids, fabricated=fabricated
    )


def initial_world(trace: TracePlayback, config: ScenarioConfig) -> World:
    """World seeded for trace playback; frame 0 is applied on the first round."""
    world = World(clock_ms=0, vehicles=[], rng=random.Random(config.seed))
    # populate initial vehicles from frame 0 so identity ground truth is known
    trace.apply_frame(world, 0, config)
    world.clock_ms = 0
    return world
