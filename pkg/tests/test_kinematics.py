import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from portnav.kinematics import (
    ControlInput,
    InvalidStateError,
    VesselModel,
    VesselParams,
    VesselState,
    clamp,
    normalize_heading,
    step,
)

from reference import kin_step_reference

NOMINAL = VesselParams()


def as_tuple(s: VesselState):
    return (s.x, s.y, s.heading, s.speed, s.angular_rate)


class TestStepExamples:
    def test_zero_input_coast_moves_plus_y(self):
        s = step(VesselState(0, 0, 0.0, 1.0, 0.0), ControlInput(0.0, 0.0), NOMINAL)
        assert as_tuple(s) == (0.0, 0.5, 0.0, 1.0, 0.0)

    def test_nominal_mass_acceleration(self):
        # thrust equal to the mass in newtons gives a = 1 m/s^2.
        s = step(VesselState(0, 0, 0.0, 0.0, 0.0), ControlInput(175_000.0, 0.0), NOMINAL)
        assert s.speed == pytest.approx(0.5, abs=0)

    def test_single_step_hand_evaluation(self):
        # Hand evaluation: omega = 0.1*70*0.5 = 3.5 deg/s, heading 90 + 1.75,
        # displacement uses old heading (90 deg -> +x) with the new speed.
        s = step(VesselState(0, 0, 90.0, 2.0, 0.0), ControlInput(0.0, 0.1), NOMINAL)
        assert s.angular_rate == pytest.approx(3.5, abs=1e-12)
        assert s.heading == pytest.approx(91.75, abs=1e-12)
        assert s.x == pytest.approx(1.0, abs=1e-9)
        assert s.y == pytest.approx(6.123233995736766e-17, abs=1e-9)
        assert s.speed == 2.0

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidStateError):
            step(VesselState(0, 0, 0, math.nan, 0), ControlInput(0, 0), NOMINAL)
        with pytest.raises(InvalidStateError):
            step(VesselState(0, 0, 0, 0, 0), ControlInput(math.inf, 0), NOMINAL)


class TestClamp:
    def test_clips_thrust(self):
        c = clamp(ControlInput(2 * NOMINAL.thrust_max, 0.0), NOMINAL)
        assert (c.thrust, c.rudder) == (NOMINAL.thrust_max, 0.0)

    def test_clips_rudder(self):
        c = clamp(ControlInput(0.0, -3.0), NOMINAL)
        assert (c.thrust, c.rudder) == (0.0, -1.0)

    def test_idempotent_on_valid_input(self):
        c = ControlInput(1000.0, 0.25)
        assert clamp(c, NOMINAL) == c
        assert clamp(clamp(c, NOMINAL), NOMINAL) == clamp(c, NOMINAL)

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidStateError):
            clamp(ControlInput(math.nan, 0.0), NOMINAL)


class TestParams:
    def test_invalid_params_rejected(self):
        for bad in (dict(mass=0.0), dict(mass=-5.0), dict(turn_rate=0.0), dict(dt=0.0), dict(speed_max=-1)):
            with pytest.raises(InvalidStateError):
                VesselParams(**bad)

    def test_set_params_takes_effect_next_step(self):
        model = VesselModel(VesselState(0, 0, 0, 0, 0), NOMINAL)
        model.step(ControlInput(175_000.0, 0.0))
        assert model.state.speed == pytest.approx(0.5)
        model.set_params(VesselParams(mass=350_000.0))
        model.step(ControlInput(175_000.0, 0.0))
        assert model.state.speed == pytest.approx(0.75)  # a halved to 0.5 m/s^2

    def test_set_identical_params_is_noop(self):
        m1 = VesselModel(VesselState(0, 0, 10, 1, 2), NOMINAL)
        m2 = VesselModel(VesselState(0, 0, 10, 1, 2), NOMINAL)
        m2.set_params(VesselParams())
        for _ in range(5):
            m1.step(ControlInput(1e5, 0.3))
            m2.step(ControlInput(1e5, 0.3))
        assert as_tuple(m1.state) == as_tuple(m2.state)

    def test_invalid_set_params_keeps_previous(self):
        model = VesselModel(VesselState(0, 0, 0, 0, 0), NOMINAL)
        with pytest.raises(InvalidStateError):
            model.set_params(dict(mass=0.0))
        assert model.params == NOMINAL


finite_state = st.builds(
    VesselState,
    x=st.floats(-1e4, 1e4),
    y=st.floats(-1e4, 1e4),
    heading=st.floats(-720.0, 720.0),
    speed=st.floats(-8.0, 8.0),
    angular_rate=st.floats(-15.0, 15.0),
)
raw_input = st.builds(ControlInput, thrust=st.floats(-1e6, 1e6), rudder=st.floats(-3.0, 3.0))


class TestProperties:
    @given(finite_state, raw_input)
    @settings(max_examples=200, deadline=None)
    def test_heading_normalized_and_clamped(self, state, inp):
        s = step(state, clamp(inp, NOMINAL), NOMINAL)
        assert 0.0 <= s.heading < 360.0
        assert abs(s.speed) <= NOMINAL.speed_max
        assert abs(s.angular_rate) <= NOMINAL.angular_rate_max

    @given(finite_state)
    @settings(max_examples=100, deadline=None)
    def test_zero_control_keeps_velocity(self, state):
        s = step(state, ControlInput(0.0, 0.0), NOMINAL)
        assert s.speed == state.speed
        assert s.angular_rate == state.angular_rate

    @given(finite_state, raw_input)
    @settings(max_examples=100, deadline=None)
    def test_determinism(self, state, inp):
        c = clamp(inp, NOMINAL)
        assert as_tuple(step(state, c, NOMINAL)) == as_tuple(step(state, c, NOMINAL))

    def test_long_rollout_heading_stays_normalized(self):
        rng = np.random.default_rng(0)
        state = VesselState(0, 0, 0, 0, 0)
        for _ in range(20_000):
            inp = clamp(ControlInput(rng.uniform(-5e5, 5e5), rng.uniform(-1.5, 1.5)), NOMINAL)
            state = step(state, inp, NOMINAL)
            assert 0.0 <= state.heading < 360.0

    def test_matches_reference_oracle(self):
        rng = np.random.default_rng(123)
        for _ in range(5_000):
            params = VesselParams(
                mass=rng.uniform(1e4, 1e6),
                turn_rate=rng.uniform(1.0, 700.0),
                thrust_max=rng.uniform(1e5, 1e6),
                speed_max=rng.uniform(1.0, 20.0),
                angular_rate_max=rng.uniform(1.0, 45.0),
                dt=rng.uniform(0.05, 2.0),
            )
            state = VesselState(
                rng.uniform(-500, 500),
                rng.uniform(-500, 500),
                rng.uniform(0, 360),
                rng.uniform(-params.speed_max, params.speed_max),
                rng.uniform(-params.angular_rate_max, params.angular_rate_max),
            )
            inp = ControlInput(rng.uniform(-params.thrust_max, params.thrust_max), rng.uniform(-1, 1))
            got = as_tuple(step(state, inp, params))
            want = kin_step_reference(
                as_tuple(state),
                (inp.thrust, inp.rudder),
                (params.mass, params.turn_rate, params.thrust_max, params.speed_max, params.angular_rate_max, params.dt),
            )
            assert got == pytest.approx(want, abs=1e-9)


def test_normalize_heading_edges():
    assert normalize_heading(360.0) == 0.0
    assert normalize_heading(-1e-30) == 0.0
    assert normalize_heading(719.5) == 359.5
    assert 0.0 <= normalize_heading(-0.25) < 360.0
