import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsdv.core import BeaconMessage, Classification, Position, VehicleState
from fsdv.detector import (
    DetectionRound,
    NeighborTable,
    StaleBeaconError,
    ThresholdPolicy,
    announcement_bits,
    classify,
    dynamic_threshold,
    format_announcement,
    run_detection_round,
    update_neighbors,
)
from fsdv.guard import GuardUnavailable
from fsdv.traffic import GreenshieldParams


def beacon(sender, ts=100, speed=20.0, x=0.0, y=0.0):
    return BeaconMessage(sender=sender, timestamp=ts, position=Position(x, y), reported_speed=speed)


def vehicle(pid, x, y=0.0, speed=20.0, rogue=False, fabricated=()):
    return VehicleState(
        physical_id=pid,
        position=Position(x, y),
        true_speed=speed,
        lane=0,
        is_rogue=rogue,
        fabricated_ids=frozenset(fabricated),
    )


class TestUpdateNeighbors:
    def test_first_contact_adds_entry(self):
        table = NeighborTable()
        update_neighbors(table, beacon(5, ts=100, speed=12.0))
        assert len(table) == 1
        assert table.get(5).last_timestamp == 100
        assert table.get(5).last_reported_speed == 12.0

    def test_newer_beacon_overwrites(self):
        table = NeighborTable()
        update_neighbors(table, beacon(5, ts=100, speed=12.0))
        update_neighbors(table, beacon(5, ts=200, speed=14.0))
        assert len(table) == 1
        assert table.get(5).last_timestamp == 200
        assert table.get(5).last_reported_speed == 14.0

    def test_stale_beacon_rejected_table_unchanged(self):
        table = NeighborTable()
        update_neighbors(table, beacon(5, ts=200, speed=12.0))
        with pytest.raises(StaleBeaconError):
            update_neighbors(table, beacon(5, ts=100, speed=9.0))
        assert table.get(5).last_timestamp == 200
        assert table.get(5).last_reported_speed == 12.0

    def test_equal_timestamp_is_not_stale(self):
        table = NeighborTable()
        update_neighbors(table, beacon(5, ts=100, speed=12.0))
        update_neighbors(table, beacon(5, ts=100, speed=13.0))
        assert table.get(5).last_reported_speed == 13.0


class TestDynamicThreshold:
    def test_speed_proportional(self):
        policy = ThresholdPolicy.speed_proportional(0.3)
        assert dynamic_threshold(20.0, policy) == pytest.approx(6.0)

    def test_zero_speed_zero_threshold(self):
        assert dynamic_threshold(0.0, ThresholdPolicy.speed_proportional(0.3)) == 0.0

    def test_fixed_ignores_speed(self):
        policy = ThresholdPolicy.fixed(5.0)
        assert dynamic_threshold(0.0, policy) == 5.0
        assert dynamic_threshold(100.0, policy) == 5.0

    def test_alpha_range_enforced(self):
        with pytest.raises(ValueError):
            ThresholdPolicy.speed_proportional(0.0)
        with pytest.raises(ValueError):
            ThresholdPolicy.speed_proportional(1.5)
        ThresholdPolicy.speed_proportional(1.0)  # boundary allowed


class TestClassify:
    def test_large_deviation_is_rogue(self):
        assert classify(25.0, 8.0, 7.5) is Classification.ROGUE

    def test_small_deviation_is_honest(self):
        assert classify(25.0, 24.0, 7.5) is Classification.HONEST

    def test_equality_falls_to_rogue(self):
        assert classify(25.0, 17.5, 7.5) is Classification.ROGUE

    def test_faster_than_guard_is_honest(self):
        assert classify(10.0, 50.0, 1.0) is Classification.HONEST


# s_max chosen so the model speed lands on 25.0 with three observed ids
GS = GreenshieldParams(s_max=25.0 * 300 / 297, rho_max=300.0)
FIXED = ThresholdPolicy.fixed(7.5)


class TestRunDetectionRound:
    def test_honest_traffic_no_rogues(self):
        vehicles = [vehicle(1, 0), vehicle(2, 100), vehicle(3, 200)]
        beacons = [beacon(1, speed=24.9), beacon(2, speed=25.1), beacon(3, speed=24.8)]
        result = run_detection_round(beacons, vehicles, FIXED, GS)
        assert result.rogue_list == []
        assert result.s_g == pytest.approx(25.0, abs=1e-9)
        assert all(c is Classification.HONEST for c in result.classifications.values())

    def test_rogue_reporting_zero_is_flagged(self):
        vehicles = [vehicle(1, 0), vehicle(2, 100), vehicle(3, 200)]
        beacons = [beacon(1, speed=24.9), beacon(2, speed=25.1), beacon(3, speed=0.0)]
        result = run_detection_round(beacons, vehicles, FIXED, GS)
        # hand trace: s_g ~= 25, threshold 7.5; only sender 3 deviates by >= 7.5
        assert result.rogue_list == [3]
        assert result.classifications[3] is Classification.ROGUE
        assert result.classifications[1] is Classification.HONEST

    def test_single_vehicle_aborts(self):
        with pytest.raises(GuardUnavailable):
            run_detection_round([], [vehicle(1, 0)], FIXED, GS)

    def test_empty_beacon_list(self):
        vehicles = [vehicle(1, 0), vehicle(2, 100)]
        result = run_detection_round([], vehicles, FIXED, GS)
        assert result.classifications == {}
        assert result.rogue_list == []
        assert result.s_g == GS.s_max  # zero observed density

    def test_guard_elected_from_vehicles(self):
        vehicles = [vehicle(1, 0), vehicle(2, 100), vehicle(3, 200)]
        result = run_detection_round([], vehicles, FIXED, GS)
        assert result.guard == 2

    def test_determinism(self):
        vehicles = [vehicle(i, i * 50.0) for i in range(1, 6)]
        beacons = [beacon(i, speed=20.0 + i) for i in range(1, 6)]
        a = run_detection_round(beacons, vehicles, FIXED, GS)
        b = run_detection_round(list(beacons), list(vehicles), FIXED, GS)
        assert (a.guard, a.s_g, a.s_th, a.classifications, a.rogue_list) == (
            b.guard,
            b.s_g,
            b.s_th,
            b.classifications,
            b.rogue_list,
        )

    def test_stale_beacons_dropped_and_counted(self):
        vehicles = [vehicle(1, 0), vehicle(2, 100)]
        beacons = [
            beacon(1, ts=200, speed=25.0),
            beacon(1, ts=100, speed=0.0),  # stale: sorted order puts it first...
            beacon(2, ts=200, speed=25.0),
        ]
        result = run_detection_round(beacons, vehicles, FIXED, GS)
        # timestamp sort applies t=100 before t=200, so nothing is stale here
        assert result.stale_beacons == 0
        # the t=100 lie is still a beacon and still classified
        assert 1 in result.rogue_list

    def test_density_ground_truth_switch(self):
        vehicles = [vehicle(1, 0), vehicle(2, 100)]
        beacons = [beacon(1, speed=25.0)]
        observed = run_detection_round(beacons, vehicles, FIXED, GS)
        truth = run_detection_round(
            beacons, vehicles, FIXED, GS, density_from_ground_truth=True
        )
        assert observed.rho == 1.0
        assert truth.rho == 2.0

    def test_rogue_list_matches_classifications(self):
        vehicles = [vehicle(1, 0), vehicle(2, 100), vehicle(3, 200)]
        beacons = [beacon(1, speed=1.0), beacon(2, speed=25.0), beacon(3, speed=2.0)]
        result = run_detection_round(beacons, vehicles, FIXED, GS)
        flagged = sorted(
            s for s, c in result.classifications.items() if c is Classification.ROGUE
        )
        assert flagged == result.rogue_list

    def test_neighbor_count_equals_distinct_senders(self):
        vehicles = [vehicle(1, 0), vehicle(2, 100)]
        beacons = [
            beacon(1, ts=100, speed=25.0),
            beacon(1, ts=200, speed=25.0),
            beacon(9, ts=100, speed=24.0),
            beacon(1_000_000, ts=100, speed=23.0),  # fabricated identity
        ]
        result = run_detection_round(beacons, vehicles, FIXED, GS)
        assert set(result.classifications) == {1, 9, 1_000_000}

    def test_threshold_monotonicity(self):
        vehicles = [vehicle(1, 0), vehicle(2, 100), vehicle(3, 200)]
        beacons = [beacon(1, speed=5.0), beacon(2, speed=15.0), beacon(3, speed=24.0)]
        loose = run_detection_round(beacons, vehicles, ThresholdPolicy.fixed(15.0), GS)
        tight = run_detection_round(beacons, vehicles, ThresholdPolicy.fixed(5.0), GS)
        assert set(loose.rogue_list) <= set(tight.rogue_list)

    @settings(max_examples=50, deadline=None)
    @given(
        speeds=st.lists(
            st.floats(min_value=0, max_value=30, allow_nan=False), min_size=2, max_size=10
        ),
        t1=st.floats(min_value=0, max_value=20, allow_nan=False),
        t2=st.floats(min_value=0, max_value=20, allow_nan=False),
    )
    def test_threshold_monotonicity_property(self, speeds, t1, t2):
        lo, hi = sorted((t1, t2))
        vehicles = [vehicle(i, i * 10.0) for i in range(len(speeds))]
        beacons = [beacon(i, speed=s) for i, s in enumerate(speeds)]
        tight = run_detection_round(beacons, vehicles, ThresholdPolicy.fixed(lo), GS)
        loose = run_detection_round(beacons, vehicles, ThresholdPolicy.fixed(hi), GS)
        assert set(loose.rogue_list) <= set(tight.rogue_list)

    def test_guard_not_in_own_rogue_list_when_honest(self):
        # guard's beacon reports the regional speed, so it classifies honest
        vehicles = [vehicle(1, 0), vehicle(2, 100), vehicle(3, 200)]
        result = run_detection_round(
            [beacon(2, speed=25.0)], vehicles, FIXED, GS
        )
        assert result.guard == 2
        assert result.guard not in result.rogue_list


class TestAnnouncement:
    def test_no_rogues_no_bits(self):
        assert announcement_bits(0) == 0

    def test_header_plus_per_id(self):
        assert announcement_bits(1) == 96
        assert announcement_bits(3) == 64 + 3 * 32

    def test_format(self):
        result = DetectionRound(
            guard=2, s_g=25.0, s_th=7.5, classifications={}, rogue_list=[3, 9]
        )
        assert format_announcement(4, result) == "4,2,25.0,7.5,3,9"
