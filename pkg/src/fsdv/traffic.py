"""Greenshield traffic-flow model: regional density and the model-derived guard speed."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, slots=True)
class GreenshieldParams:
    """Linear speed-density calibration.

    s_max is the free-flow speed (density zero); rho_max is the jam density
    at which speed reaches zero.
    """

    s_max: float    # m/s
    rho_max: float  # vehicles (identity count at jam)

    def __post_init__(self) -> None:
        if self.s_max <= 0:
            raise ValueError(f"s_max must be > 0, got {self.s_max}")
        if self.rho_max <= 0:
            raise ValueError(f"rho_max must be > 0, got {self.rho_max}")


@dataclass(frozen=True, slots=True)
class DensitySample:
    """Regional density as beacon-count-per-id times vehicle count."""

    beacon_count_per_id: int
    vehicle_count: int
    rho: float

    def __post_init__(self) -> None:
        if self.beacon_count_per_id < 0 or self.vehicle_count < 0:
            raise ValueError("density inputs must be non-negative")
        if self.rho != self.beacon_count_per_id * self.vehicle_count:
            raise ValueError("rho must equal beacon_count_per_id * vehicle_count")


def density(beacon_count_per_id: int, vehicle_count: int) -> DensitySample:
    """Regional density from per-id beacon count and vehicle count."""
    return DensitySample(
        beacon_count_per_id=beacon_count_per_id,
        vehicle_count=vehicle_count,
        rho=beacon_count_per_id * vehicle_count,
    )


def guard_speed(rho: float, params: GreenshieldParams) -> float:
    """Model speed at density rho: s_max - (rho/rho_max) * s_max, floored at 0.

    Densities above rho_max (e.g. Sybil-inflated identity counts) clamp to
    zero speed rather than going negative; use :func:`is_over_jam` to detect
    the clamp.
    """
    if rho < 0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    s = params.s_max - (rho / params.rho_max) * params.s_max
    return s if s > 0.0 else 0.0


def is_over_jam(rho: float, params: GreenshieldParams) -> bool:
    """True when rho exceeds jam density, i.e. guard_speed clamped to zero."""
    return rho > params.rho_max
