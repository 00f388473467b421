"""Guard-node Sybil-attack detection simulator for vehicular networks."""

from fsdv.core import (
    BeaconMessage,
    Classification,
    Position,
    VehicleState,
    euclidean_distance,
)
from fsdv.detector import ThresholdPolicy, classify, run_detection_round
from fsdv.guard import GuardUnavailable, centroid, select_guard
from fsdv.metrics import SimReport
from fsdv.sim import ScenarioConfig, World, initialize, run
from fsdv.traffic import GreenshieldParams, density, guard_speed

__all__ = [
    "BeaconMessage",
    "Classification",
    "GreenshieldParams",
    "GuardUnavailable",
    "Position",
    "ScenarioConfig",
    "SimReport",
    "ThresholdPolicy",
    "VehicleState",
    "World",
    "centroid",
    "classify",
    "density",
    "euclidean_distance",
    "guard_speed",
    "initialize",
    "run",
    "run_detection_round",
    "select_guard",
]

__version__ = "0.1.0"
