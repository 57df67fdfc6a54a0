"""Piecewise-linear gate activation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import hard_sigmoid_oracle
from quenchwatch.engine import GateConfig, hard_sigmoid, hard_sigmoid_grad


class TestSaturation:
    def test_exactly_zero_at_and_below_lower_threshold(self):
        for x in (-2.5, -2.5000001, -3.0, -100.0, -1e308):
            assert hard_sigmoid(x) == 0.0

    def test_exactly_one_at_and_above_upper_threshold(self):
        for x in (2.5, 2.5000001, 3.0, 100.0, 1e308):
            assert hard_sigmoid(x) == 1.0

    def test_saturation_is_exact_not_asymptotic(self):
        # Bit-exact equality, not closeness: the gate can fully close or open.
        assert hard_sigmoid(5.0) - 1.0 == 0.0
        assert hard_sigmoid(-5.0) == 0.0


class TestRamp:
    @pytest.mark.parametrize("x", np.linspace(-2.4, 2.4, 10).tolist())
    def test_affine_segment_matches_coefficients(self, x):
        assert hard_sigmoid(x) == 0.2 * x + 0.5

    def test_midpoint(self):
        assert hard_sigmoid(0.0) == 0.5

    def test_matches_oracle_everywhere(self, rng):
        xs = rng.uniform(-6, 6, size=500)
        got = hard_sigmoid(xs)
        want = [hard_sigmoid_oracle(float(x)) for x in xs]
        assert got.tolist() == want

    def test_array_shape_preserved(self, rng):
        x = rng.normal(size=(4, 7))
        assert hard_sigmoid(x).shape == (4, 7)

    def test_scalar_in_scalar_out(self):
        assert isinstance(hard_sigmoid(0.3), float)
        assert isinstance(hard_sigmoid_grad(0.3), float)


class TestGradient:
    def test_slope_inside_ramp(self):
        assert hard_sigmoid_grad(0.0) == 0.2
        assert hard_sigmoid_grad(-2.4999) == 0.2
        assert hard_sigmoid_grad(2.4999) == 0.2

    def test_zero_in_saturation(self):
        assert hard_sigmoid_grad(-3.0) == 0.0
        assert hard_sigmoid_grad(3.0) == 0.0

    def test_kinks_use_zero_subgradient(self):
        assert hard_sigmoid_grad(-2.5) == 0.0
        assert hard_sigmoid_grad(2.5) == 0.0

    def test_matches_finite_differences_away_from_kinks(self, rng):
        delta = 1e-7
        for x in rng.uniform(-6, 6, size=200):
            x = float(x)
            if min(abs(x - 2.5), abs(x + 2.5)) < 10 * delta:
                continue
            fd = (hard_sigmoid(x + delta) - hard_sigmoid(x - delta)) / (2 * delta)
            assert hard_sigmoid_grad(x) == pytest.approx(fd, abs=1e-6)


class TestProperties:
    @given(x=st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
    @settings(max_examples=200, deadline=None)
    def test_range_and_monotonicity(self, x):
        y = hard_sigmoid(x)
        assert 0.0 <= y <= 1.0
        assert hard_sigmoid(x + 0.5) >= y

    @given(x=st.floats(min_value=-10, max_value=10, allow_nan=False))
    @settings(max_examples=200, deadline=None)
    def test_point_symmetry_about_midpoint(self, x):
        assert hard_sigmoid(x) + hard_sigmoid(-x) == pytest.approx(1.0, abs=1e-12)


class TestGateConfig:
    def test_defaults(self):
        cfg = GateConfig()
        assert (cfg.t_l, cfg.t_h, cfg.a, cfg.b) == (-2.5, 2.5, 0.2, 0.5)

    def test_from_thresholds_pins_continuity(self):
        cfg = GateConfig.from_thresholds(-1.0, 3.0)
        assert cfg.a * cfg.t_l + cfg.b == pytest.approx(0.0, abs=1e-12)
        assert cfg.a * cfg.t_h + cfg.b == pytest.approx(1.0, abs=1e-12)
        assert hard_sigmoid(-1.0, cfg) == 0.0
        assert hard_sigmoid(3.0, cfg) == 1.0
        assert hard_sigmoid(1.0, cfg) == pytest.approx(0.5)

    def test_discontinuous_segment_rejected(self):
        with pytest.raises(ValueError):
            GateConfig(t_l=-2.5, t_h=2.5, a=0.3, b=0.5)

    def test_inverted_thresholds_rejected(self):
        with pytest.raises(ValueError):
            GateConfig.from_thresholds(2.0, -2.0)

    def test_custom_config_changes_saturation_points(self):
        cfg = GateConfig.from_thresholds(-0.5, 0.5)
        assert hard_sigmoid(0.6, cfg) == 1.0
        assert hard_sigmoid(0.4, cfg) == pytest.approx(0.9)
        assert hard_sigmoid_grad(0.0, cfg) == pytest.approx(1.0)
