"""Analytic delay pipeline: channel, queue, and fog processing delays.

All three components are closed-form evaluation quantities attached to run
reports; nothing here schedules events on a virtual clock.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field


class ZeroCapacityError(Exception):
    """SNR <= 0 gives zero channel capacity; communication delay is undefined."""


class UnstableQueueError(Exception):
    """Service rate must strictly exceed arrival rate for a stable queue."""


class NegativeQueueDelayWarning(UserWarning):
    """The as-written queue formula went negative (physically meaningless)."""


@dataclass(frozen=True, slots=True)
class ChannelParams:
    """Link between the guard and the fog layer, Shannon-capacity model."""

    x_bits: int             # beacon payload bits
    bandwidth_hz: float
    tx_power: float
    channel_coeff: float
    noise_power: float

    def __post_init__(self) -> None:
        if self.x_bits < 0:
            raise ValueError(f"x_bits must be >= 0, got {self.x_bits}")
        if self.bandwidth_hz <= 0:
            raise ValueError(f"bandwidth_hz must be > 0, got {self.bandwidth_hz}")
        if self.tx_power <= 0:
            raise ValueError(f"tx_power must be > 0, got {self.tx_power}")
        if self.noise_power <= 0:
            raise ValueError(f"noise_power must be > 0, got {self.noise_power}")
        if not math.isfinite(self.snr):
            raise ValueError("snr must be finite")

    @property
    def snr(self) -> float:
        return self.tx_power * self.channel_coeff**2 / self.noise_power


def communication_delay(p: ChannelParams) -> float:
    """x / (b * log2(1 + snr)), seconds."""
    snr = p.snr
    if snr <= 0:
        raise ZeroCapacityError(f"snr must be > 0 for a positive rate, got {snr}")
    rate = p.bandwidth_hz * math.log2(1.0 + snr)
    return p.x_bits / rate


@dataclass(frozen=True, slots=True)
class QueueParams:
    """M/M/1 queue feeding the fog layer."""

    arrival_rate: float  # per second
    service_rate: float  # per second

    def __post_init__(self) -> None:
        if self.arrival_rate <= 0:
            raise ValueError(f"arrival_rate must be > 0, got {self.arrival_rate}")
        if self.service_rate <= 0:
            raise ValueError(f"service_rate must be > 0, got {self.service_rate}")


def queuing_delay(p: QueueParams, *, standard_form: bool = False) -> float:
    """Queue delay, seconds.

    Default is the as-written closed form
        1 - 1/lam + lam^2 / (mu^2 * (mu - lam)),
    which can go negative for small arrival rates; a
    NegativeQueueDelayWarning is emitted in that case rather than silently
    using the value. standard_form=True substitutes the textbook M/M/1
    waiting time lam / (mu * (mu - lam)) for sensitivity analysis.
    """
    lam, mu = p.arrival_rate, p.service_rate
    if mu <= lam:
        raise UnstableQueueError(f"service_rate {mu} must exceed arrival_rate {lam}")
    if standard_form:
        return lam / (mu * (mu - lam))
    d = 1.0 - 1.0 / lam + lam**2 / (mu**2 * (mu - lam))
    if d < 0.0:
        warnings.warn(
            f"queue delay {d} is negative for arrival_rate={lam}, service_rate={mu}; "
            "consider standard_form=True",
            NegativeQueueDelayWarning,
            stacklevel=2,
        )
    return d


@dataclass(frozen=True, slots=True)
class Complexity:
    """Work units for x bits: linear (x) by default, or affine (scale*x + offset)."""

    kind: str = "linear"   # "linear" | "affine"
    scale: float = 1.0
    offset: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("linear", "affine"):
            raise ValueError(f"unknown complexity kind {self.kind!r}")
        if self.scale < 0 or self.offset < 0:
            raise ValueError("complexity must be non-decreasing: scale, offset >= 0")

    def work(self, x_bits: int) -> float:
        if self.kind == "linear":
            return float(x_bits)
        return self.scale * x_bits + self.offset


@dataclass(frozen=True, slots=True)
class ComputeParams:
    """Fog-layer processing capability."""

    cycles_per_bit: float
    fog_capability_cycles_per_s: float
    complexity: Complexity = field(default_factory=Complexity)

    def __post_init__(self) -> None:
        if self.cycles_per_bit <= 0:
            raise ValueError(f"cycles_per_bit must be > 0, got {self.cycles_per_bit}")
        if self.fog_capability_cycles_per_s <= 0:
            raise ValueError(
                f"fog_capability_cycles_per_s must be > 0, got {self.fog_capability_cycles_per_s}"
            )


def processing_delay(p: ComputeParams, x_bits: int) -> float:
    """TC(x) * f / c_fl, seconds."""
    if x_bits < 0:
        raise ValueError(f"x_bits must be >= 0, got {x_bits}")
    return p.complexity.work(x_bits) * p.cycles_per_bit / p.fog_capability_cycles_per_s


def total_delay(d_c: float, d_q: float, d_p: float) -> float:
    """Sum of the three delay components, seconds."""
    if d_c < 0 or d_q < 0 or d_p < 0:
        raise ValueError(f"delay components must be >= 0, got ({d_c}, {d_q}, {d_p})")
    return d_c + d_q + d_p
