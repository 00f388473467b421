"""Deterministic discrete-time traffic and channel simulation.

Vehicles move on a two-lane ring segment; every beacon period the world
steps, in-range identities broadcast through a lossy channel, and the guard
runs one detection round. All randomness flows from a single seeded
generator, so a run is a pure function of its config. The random stream is
consumed in a fixed order per round (mobility jitter per vehicle, then one
claimed-position draw per fabricated id and one loss draw per emitted
beacon), which keeps paired runs comparable: raising the density loss
coefficient at a fixed seed can only turn deliveries into drops.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

from fsdv.core import (
    BEACON_PERIOD_MS,
    BEACON_SIZE_BITS,
    FABRICATED_ID_BASE,
    BeaconMessage,
    Classification,
    Position,
    VehicleState,
    euclidean_distance,
)
from fsdv.delays import (
    ChannelParams,
    Complexity,
    ComputeParams,
    QueueParams,
    communication_delay,
    processing_delay,
    queuing_delay,
)
from fsdv.detector import (
    ThresholdPolicy,
    announcement_bits,
    run_detection_round,
)
from fsdv.guard import GuardUnavailable, select_guard
from fsdv.metrics import (
    DelayBreakdown,
    SimReport,
    false_positive_rate,
    packet_loss_ratio,
    true_positive_rate,
)
from fsdv.probability import DetectionProbParams
from fsdv.traffic import GreenshieldParams, guard_speed

if TYPE_CHECKING:
    from fsdv.trace import TracePlayback

MILE_M = 1609.34
MPH_MPS = 0.44704
LANE_WIDTH_M = 3.7
JAM_SPACING_M = 7.5          # road meters consumed per vehicle per lane at jam
MAX_LOSS_PROBABILITY = 0.95  # Bernoulli drop probability cap
FABRICATED_POSITION_JITTER_M = 10.0

DEFAULT_ROAD_LENGTH_M = 5 * MILE_M          # 8046.7
DEFAULT_SPEED_MIN_MPS = 30 * MPH_MPS        # 13.4112
DEFAULT_SPEED_MAX_MPS = 65 * MPH_MPS        # 29.0576


class ConfigError(ValueError):
    """A scenario field violates its allowed range."""


def default_jam_density(road_length: float, lanes: int) -> float:
    """Jam vehicle count for a segment: one vehicle per 7.5 m per lane."""
    return road_length * lanes / JAM_SPACING_M


@dataclass
class ScenarioConfig:
    """Complete description of one run; identical configs give identical runs."""

    road_length: float = DEFAULT_ROAD_LENGTH_M  # meters
    lanes: int = 2
    n_vehicles: int = 200
    speed_min: float = DEFAULT_SPEED_MIN_MPS    # m/s
    speed_max: float = DEFAULT_SPEED_MAX_MPS    # m/s
    tx_range: float = 500.0                     # meters
    beacon_period_ms: int = BEACON_PERIOD_MS
    beacon_size_bits: int = BEACON_SIZE_BITS
    rogue_fraction: float = 0.0                 # in [0, 0.4]
    sybil_ids_per_rogue: int = 3
    rogue_speed_factor: float = 0.2             # fraction of regional mean speed
    speed_jitter: float = 0.05                  # honest speed jitter, +-fraction
    base_loss: float = 0.02
    density_loss_coeff: float = 0.2             # adds coeff * N / rho_max
    duration: float = 30.0                      # seconds
    seed: int = 1
    log_events: bool = False                    # full BEACON/DROP event log
    density_from_ground_truth: bool = False
    threshold: ThresholdPolicy = field(
        default_factory=lambda: ThresholdPolicy.speed_proportional(0.3)
    )
    greenshield: GreenshieldParams | None = None  # None: calibrate from geometry
    bandwidth_hz: float = 1e7
    tx_power: float = 3.0
    channel_coeff: float = 1.0
    noise_power: float = 1.0
    arrival_rate: float = 1.0                   # per second
    service_rate: float = 2.0                   # per second
    queue_standard_form: bool = False
    cycles_per_bit: float = 10.0
    per_obu_capability: float = 1e6             # cycles/s per on-board unit
    fog_aggregation: bool = True                # c_fl = n_vehicles * per_obu_capability
    complexity: Complexity = field(default_factory=Complexity)
    prob_params: DetectionProbParams = field(default_factory=DetectionProbParams)

    def validate(self) -> None:
        checks = [
            (self.road_length > 0, "road_length", "must be > 0"),
            (self.lanes in (1, 2), "lanes", "must be 1 or 2"),
            (2 <= self.n_vehicles <= 4000, "n_vehicles", "must be in [2, 4000]"),
            (self.speed_min >= 0, "speed_min", "must be >= 0"),
            (self.speed_max >= self.speed_min, "speed_max", "must be >= speed_min"),
            (self.speed_max > 0, "speed_max", "must be > 0"),
            (self.tx_range > 0, "tx_range", "must be > 0"),
            (self.beacon_period_ms > 0, "beacon_period_ms", "must be > 0"),
            (self.beacon_size_bits > 0, "beacon_size_bits", "must be > 0"),
            (0.0 <= self.rogue_fraction <= 0.4, "rogue_fraction", "must be in [0, 0.4]"),
            (self.sybil_ids_per_rogue >= 1, "sybil_ids_per_rogue", "must be >= 1"),
            (
                0.0 <= self.rogue_speed_factor < 1.0,
                "rogue_speed_factor",
                "must be in [0, 1)",
            ),
            (0.0 <= self.speed_jitter < 1.0, "speed_jitter", "must be in [0, 1)"),
            (0.0 <= self.base_loss <= 1.0, "base_loss", "must be in [0, 1]"),
            (self.density_loss_coeff >= 0, "density_loss_coeff", "must be >= 0"),
            (self.duration > 0, "duration", "must be > 0"),
        ]
        for ok, name, msg in checks:
            if not ok:
                raise ConfigError(f"{name} {msg}, got {getattr(self, name)}")

    def resolved_greenshield(self) -> GreenshieldParams:
        if self.greenshield is not None:
            return self.greenshield
        return GreenshieldParams(
            s_max=self.speed_max,
            rho_max=default_jam_density(self.road_length, self.lanes),
        )

    def channel_params(self) -> ChannelParams:
        return ChannelParams(
            x_bits=self.beacon_size_bits,
            bandwidth_hz=self.bandwidth_hz,
            tx_power=self.tx_power,
            channel_coeff=self.channel_coeff,
            noise_power=self.noise_power,
        )

    def queue_params(self) -> QueueParams:
        return QueueParams(arrival_rate=self.arrival_rate, service_rate=self.service_rate)

    def compute_params(self) -> ComputeParams:
        c_fl = self.per_obu_capability
        if self.fog_aggregation:
            c_fl = self.n_vehicles * self.per_obu_capability
        return ComputeParams(
            cycles_per_bit=self.cycles_per_bit,
            fog_capability_cycles_per_s=c_fl,
            complexity=self.complexity,
        )

    def rounds(self) -> int:
        return max(1, round(self.duration * 1000.0 / self.beacon_period_ms))

    def digest(self) -> str:
        """Stable hash of every field, for report provenance."""
        doc: dict = {}
        for name, value in sorted(vars(self).items()):
            if isinstance(value, (ThresholdPolicy, GreenshieldParams, Complexity,
                                  DetectionProbParams)):
                doc[name] = {k: getattr(value, k) for k in value.__dataclass_fields__}
            else:
                doc[name] = value
        blob = json.dumps(doc, sort_keys=True, default=repr).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class World:
    """Mutable simulation state: clock, vehicles, RNG, and the event log.

    Event-log records are tuples with a leading tag:
      ("BEACON", round, sender, ts_ms, x, y, speed, bits)   when log_events
      ("DROP",   round, sender, ts_ms, x, y, speed, bits)   always
      ("DETECT", round, guard, s_g, s_th)                   always
      ("ANNOUNCE", round, guard, s_g, s_th, (ids...))       always
    """

    clock_ms: int
    vehicles: list[VehicleState]
    rng: random.Random
    event_log: list[tuple] = field(default_factory=list)
    round_index: int = 0
    emitted_total: int = 0
    dropped_total: int = 0


def initialize(config: ScenarioConfig) -> World:
    """Place vehicles uniformly on the segment and mark rogues, all from the seed.

    Rogue count is floor(rogue_fraction * n); each rogue gets
    sybil_ids_per_rogue fabricated ids from a reserved high range so ground
    truth stays recoverable for metrics.
    """
    config.validate()
    rng = random.Random(config.seed)
    n = config.n_vehicles

    draws = []
    for _ in range(n):
        x = rng.uniform(0.0, config.road_length)
        lane = rng.randrange(config.lanes)
        speed = rng.uniform(config.speed_min, config.speed_max)
        draws.append((x, lane, speed))

    n_rogues = int(config.rogue_fraction * n)
    rogue_ids = set(rng.sample(range(n), n_rogues)) if n_rogues else set()

    vehicles = []
    rogue_index = 0
    for pid in range(n):
        x, lane, speed = draws[pid]
        is_rogue = pid in rogue_ids
        fabricated: frozenset[int] = frozenset()
        if is_rogue:
            base = FABRICATED_ID_BASE + rogue_index * config.sybil_ids_per_rogue
            fabricated = frozenset(range(base, base + config.sybil_ids_per_rogue))
            rogue_index += 1
        vehicles.append(
            VehicleState(
                physical_id=pid,
                position=Position(x, lane * LANE_WIDTH_M),
                true_speed=speed,
                lane=lane,
                is_rogue=is_rogue,
                fabricated_ids=fabricated,
            )
        )
    return World(clock_ms=0, vehicles=vehicles, rng=rng)


def regional_mean_speed(world: World) -> float:
    """Mean true speed over the physical vehicles."""
    vs = world.vehicles
    if not vs:
        return 0.0
    return sum(v.true_speed for v in vs) / len(vs)


def step_mobility(world: World, config: ScenarioConfig) -> World:
    """Advance one beacon period on the ring.

    Positions advance by true_speed * dt and wrap, which keeps density
    stationary. Speeds then relax to the flow-model equilibrium for the
    current ground-truth density with bounded uniform jitter, clamped to
    [0, speed_max].
    """
    dt = config.beacon_period_ms / 1000.0
    gs = config.resolved_greenshield()
    equilibrium = guard_speed(float(len(world.vehicles)), gs)
    road = config.road_length
    j = config.speed_jitter
    rng = world.rng
    cap = config.speed_max

    vehicles = []
    for v in world.vehicles:
        x = (v.position.x + v.true_speed * dt) % road
        speed = equilibrium * (1.0 + rng.uniform(-j, j))
        if speed < 0.0:
            speed = 0.0
        elif speed > cap:
            speed = cap
        vehicles.append(
            replace(v, position=Position(x, v.position.y), true_speed=speed)
        )
    world.vehicles = vehicles
    world.clock_ms += config.beacon_period_ms
    return world


def broadcast_round(world: World, config: ScenarioConfig) -> list[BeaconMessage]:
    """Emit one beacon per in-range identity and push each through the loss channel.

    Honest vehicles report their true speed; a rogue reports
    rogue_speed_factor * regional mean speed under every identity it owns,
    fabricated identities claiming the rogue's position with a small jitter.
    Only identities within tx_range of the guard reach it; each emitted
    beacon drops independently with probability
    base_loss + density_loss_coeff * N / rho_max (capped), where N is the
    number of identities transmitting this round. Drops are logged for PLR.
    """
    vehicles = world.vehicles
    try:
        election = select_guard(vehicles)
    except GuardUnavailable:
        return []
    guard_pos = next(
        v.position for v in vehicles if v.physical_id == election.guard
    )
    mean_speed = regional_mean_speed(world)
    rogue_report = config.rogue_speed_factor * mean_speed

    # first pass: who is in range, and how many identities will transmit
    in_range = []
    n_transmitting = 0
    for v in vehicles:
        if euclidean_distance(v.position, guard_pos) > config.tx_range:
            continue
        in_range.append(v)
        n_transmitting += 1 + len(v.fabricated_ids)

    rho_max = config.resolved_greenshield().rho_max
    p_loss = config.base_loss + config.density_loss_coeff * n_transmitting / rho_max
    if p_loss > MAX_LOSS_PROBABILITY:
        p_loss = MAX_LOSS_PROBABILITY

    rng = world.rng
    rnd = world.round_index
    ts = world.clock_ms
    bits = config.beacon_size_bits
    road = config.road_length
    log = world.event_log
    log_all = config.log_events
    delivered: list[BeaconMessage] = []

    def emit(sender: int, pos: Position, speed: float) -> None:
        world.emitted_total += 1
        if log_all:
            log.append(("BEACON", rnd, sender, ts, pos.x, pos.y, speed, bits))
        if rng.random() < p_loss:
            world.dropped_total += 1
            log.append(("DROP", rnd, sender, ts, pos.x, pos.y, speed, bits))
            return
        delivered.append(
            BeaconMessage(sender=sender, timestamp=ts, position=pos,
                          reported_speed=speed, size_bits=bits)
        )

    for v in in_range:
        if not v.is_rogue:
            emit(v.physical_id, v.position, v.true_speed)
            continue
        emit(v.physical_id, v.position, rogue_report)
        for fid in sorted(v.fabricated_ids):
            dx = rng.uniform(-FABRICATED_POSITION_JITTER_M, FABRICATED_POSITION_JITTER_M)
            claimed = Position((v.position.x + dx) % road, v.position.y)
            emit(fid, claimed, rogue_report)
    return delivered


def _identity_truth(vehicles: list[VehicleState]) -> dict[int, Classification]:
    truth: dict[int, Classification] = {}
    for v in vehicles:
        truth[v.physical_id] = (
            Classification.ROGUE if v.is_rogue else Classification.HONEST
        )
        for fid in v.fabricated_ids:
            truth[fid] = Classification.ROGUE
    return truth


def run(
    config: ScenarioConfig,
    trace: "TracePlayback | None" = None,
    event_sink: list | None = None,
) -> SimReport:
    """Execute one full scenario and aggregate its report.

    With a trace, mobility is replaced by trace playback (one round per
    timestep); otherwise the world steps duration / beacon_period rounds of
    synthetic ring mobility. Analytic delays and the calibrated probability
    estimate are attached to the report at the end. Passing a list as
    event_sink hands the caller the run's event log.
    """
    config.validate()

    if trace is None:
        world = initialize(config)
        rounds = config.rounds()
    else:
        from fsdv.trace import initial_world  # local import avoids a cycle

        world = initial_world(trace, config)
        rounds = len(trace.frames)
    if event_sink is not None:
        world.event_log = event_sink

    truth = _identity_truth(world.vehicles)
    flagged: set[int] = set()
    overhead_bits = 0
    delivered_beacons = 0
    delivered_bits = 0
    clamp_events = 0
    stale_total = 0
    skipped_rounds = 0
    round_bits: list[int] = []

    compute = config.compute_params()
    gs = config.resolved_greenshield()

    for r in range(rounds):
        world.round_index = r
        if trace is None:
            world = step_mobility(world, config)
        else:
            trace.apply_frame(world, r, config)
            for ident, t in _identity_truth(world.vehicles).items():
                truth.setdefault(ident, t)

        if len(world.vehicles) < 2:
            skipped_rounds += 1
            continue

        beacons = broadcast_round(world, config)
        result = run_detection_round(
            beacons,
            world.vehicles,
            config.threshold,
            gs,
            density_from_ground_truth=config.density_from_ground_truth,
        )
        world.event_log.append(("DETECT", r, result.guard, result.s_g, result.s_th))
        if result.rogue_list:
            world.event_log.append(
                ("ANNOUNCE", r, result.guard, result.s_g, result.s_th,
                 tuple(result.rogue_list))
            )
            overhead_bits += announcement_bits(len(result.rogue_list))
            flagged.update(result.rogue_list)
        if result.speed_clamped:
            clamp_events += 1
        stale_total += result.stale_beacons

        bits = sum(b.size_bits for b in beacons)
        delivered_beacons += len(beacons)
        delivered_bits += bits
        round_bits.append(bits)

    ledger = {
        ident: (t, Classification.ROGUE if ident in flagged else Classification.HONEST)
        for ident, t in truth.items()
    }

    duration = rounds * config.beacon_period_ms / 1000.0
    d_c = communication_delay(config.channel_params())
    d_q = queuing_delay(config.queue_params(), standard_form=config.queue_standard_form)
    mean_bits = round(sum(round_bits) / len(round_bits)) if round_bits else 0
    d_p = processing_delay(compute, mean_bits)
    d_t = d_c + d_q + d_p  # plain sum; d_q may be negative under the as-written form

    plr = packet_loss_ratio(world.emitted_total, world.dropped_total)
    tpr = true_positive_rate(ledger)
    fpr = false_positive_rate(ledger)
    calibration = DetectionProbParams(
        x_fog=1.0,
        p_reach=1.0 - plr,
        p_honest_correct=1.0 - fpr if fpr is not None else 1.0,
        p_rogue_correct=tpr if tpr is not None else 1.0,
    )

    return SimReport(
        config_digest=config.digest(),
        rounds=rounds,
        tpr=tpr,
        fpr=fpr,
        plr=plr,
        avg_throughput=delivered_bits / duration,
        overhead_bits=overhead_bits,
        delays=DelayBreakdown(d_c=d_c, d_q=d_q, d_p=d_p, d_t=d_t),
        prob_calibration=calibration,
        per_identity=ledger,
        emitted_beacons=world.emitted_total,
        dropped_beacons=world.dropped_total,
        delivered_beacons=delivered_beacons,
        speed_clamp_events=clamp_events,
        stale_beacons=stale_total,
        skipped_rounds=skipped_rounds,
        negative_queue_delay=d_q < 0,
    )


def dump_event_records(records: list[tuple]) -> str:
    """Line-oriented event-log dump; fields joined by commas after the tag."""
    lines = []
    for record in records:
        tag, *rest = record
        parts = [tag]
        for item in rest:
            if isinstance(item, tuple):
                parts.extend(str(i) for i in item)
            elif isinstance(item, float):
                parts.append(repr(item))
            else:
                parts.append(str(item))
        lines.append(",".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")
