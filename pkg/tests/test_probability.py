import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fsdv.probability import (
    DetectionProbParams,
    ProbabilityRangeWarning,
    correct_detection_probability,
    incorrect_detection_probability,
)

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
params_st = st.builds(DetectionProbParams, unit, unit, unit, unit)


class TestCorrectDetection:
    def test_certain_pipeline(self):
        p = DetectionProbParams(1.0, 1.0, 0.5, 0.5)
        assert correct_detection_probability(p) == pytest.approx(1.0)

    def test_no_delivery_no_detection(self):
        p = DetectionProbParams(0.8, 0.0, 0.9, 0.9)
        assert correct_detection_probability(p) == 0.0

    def test_worked_example(self):
        p = DetectionProbParams(0.9, 0.95, 0.6, 0.3)
        assert correct_detection_probability(p) == pytest.approx(0.7695, abs=1e-12)

    def test_over_unity_flagged_not_clamped(self):
        p = DetectionProbParams(1.0, 1.0, 0.9, 0.9)
        with pytest.warns(ProbabilityRangeWarning):
            v = correct_detection_probability(p)
        assert v == pytest.approx(1.8)

    def test_in_range_not_flagged(self, recwarn):
        correct_detection_probability(DetectionProbParams(0.9, 0.9, 0.4, 0.4))
        assert not [w for w in recwarn if issubclass(w.category, ProbabilityRangeWarning)]


class TestIncorrectDetection:
    def test_perfect_rogue_detection(self):
        exact, approx = incorrect_detection_probability(DetectionProbParams(1.0, 1.0, 0.0, 1.0))
        assert exact == 0.0
        assert approx == 0.0

    def test_approximation_drops_honest_term(self):
        exact, approx = incorrect_detection_probability(DetectionProbParams(1.0, 1.0, 0.5, 0.5))
        assert exact == pytest.approx(0.0, abs=1e-15)
        assert approx == pytest.approx(0.5, abs=1e-15)

    def test_worked_example(self):
        exact, approx = incorrect_detection_probability(DetectionProbParams(0.9, 0.95, 0.6, 0.3))
        assert exact == pytest.approx(1 - 0.7695, abs=1e-12)
        assert approx == pytest.approx(1 - 0.2565, abs=1e-12)

    @given(params_st)
    def test_complement_identity_exact(self, p):
        exact, _ = incorrect_detection_probability(p)
        assert exact + correct_detection_probability(p) == 1.0

    @given(params_st)
    def test_dropped_term_identity(self, p):
        exact, approx = incorrect_detection_probability(p)
        dropped = p.x_fog * p.p_honest_correct * p.p_reach
        assert approx - exact == pytest.approx(dropped, abs=1e-12)

    def test_dropped_term_identity_bulk(self):
        rng = random.Random(20240901)
        for _ in range(10_000):
            p = DetectionProbParams(
                rng.random(), rng.random(), rng.random(), rng.random()
            )
            exact, approx = incorrect_detection_probability(p)
            assert abs((approx - exact) - p.x_fog * p.p_honest_correct * p.p_reach) <= 1e-12


class TestParamValidation:
    @pytest.mark.parametrize("field", ["x_fog", "p_reach", "p_honest_correct", "p_rogue_correct"])
    def test_out_of_range_rejected(self, field):
        kwargs = dict(x_fog=0.5, p_reach=0.5, p_honest_correct=0.5, p_rogue_correct=0.5)
        kwargs[field] = 1.5
        with pytest.raises(ValueError, match=field):
            DetectionProbParams(**kwargs)
        kwargs[field] = -0.1
        with pytest.raises(ValueError, match=field):
            DetectionProbParams(**kwargs)
