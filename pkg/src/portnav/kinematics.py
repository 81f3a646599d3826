"""3-DOF vessel kinematics with runtime-swappable physical parameters.

The model is deliberately drag-free: thrust integrates into speed, rudder
into angular rate, and the pose advances with the freshly updated velocity
(semi-implicit Euler).  Headings use the compass convention throughout:
0 deg points along +y and angles grow clockwise toward +x, so the planar
displacement is x += sin(heading) * speed * dt, y += cos(heading) * speed * dt.

Angles are degrees at every interface; trigonometry converts internally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace


class InvalidStateError(ValueError):
    """A state, input, or parameter set violates its invariants."""


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise InvalidStateError(f"{name} contains a non-finite value: {values!r}")


def normalize_heading(heading: float) -> float:
    """Wrap a heading in degrees into [0, 360)."""
    h = heading % 360.0
    # Python's % can round up to exactly 360.0 for tiny negative inputs.
    return 0.0 if h == 360.0 else h


@dataclass(frozen=True, slots=True)
class VesselState:
    """Pose and velocity of the ego vessel.

    x, y in meters; heading in degrees [0, 360); speed in m/s;
    angular_rate in deg/s.
    """

    x: float
    y: float
    heading: float
    speed: float
    angular_rate: float


@dataclass(frozen=True, slots=True)
class ControlInput:
    """Commanded thrust (N) and dimensionless rudder in [-1, 1]."""

    thrust: float
    rudder: float


@dataclass(frozen=True, slots=True)
class VesselParams:
    """Physical parameters of the vessel; mutable at runtime between steps.

    turn_rate converts rudder input into angular acceleration
    (deg/s^2 per unit rudder).  The model has no drag, so speed_max and
    angular_rate_max clamp the otherwise unbounded velocity integration.
    """

    mass: float = 175_000.0
    turn_rate: float = 70.0
    thrust_max: float = 400_000.0
    speed_max: float = 8.0
    angular_rate_max: float = 15.0
    dt: float = 0.5

    def __post_init__(self) -> None:
        _require_finite(
            "VesselParams",
            self.mass,
            self.turn_rate,
            self.thrust_max,
            self.speed_max,
            self.angular_rate_max,
            self.dt,
        )
        if self.mass <= 0.0:
            raise InvalidStateError(f"mass must be > 0, got {self.mass}")
        if self.turn_rate <= 0.0:
            raise InvalidStateError(f"turn_rate must be > 0, got {self.turn_rate}")
        if self.dt <= 0.0:
            raise InvalidStateError(f"dt must be > 0, got {self.dt}")
        if self.thrust_max <= 0.0 or self.speed_max <= 0.0 or self.angular_rate_max <= 0.0:
            raise InvalidStateError("all actuator/velocity limits must be > 0")


def clamp(inp: ControlInput, params: VesselParams) -> ControlInput:
    """Clip a control input to the actuator bounds; idempotent."""
    _require_finite("ControlInput", inp.thrust, inp.rudder)
    thrust = min(max(inp.thrust, -params.thrust_max), params.thrust_max)
    rudder = min(max(inp.rudder, -1.0), 1.0)
    if thrust == inp.thrust and rudder == inp.rudder:
        return inp
    return ControlInput(thrust, rudder)


def step(state: VesselState, inp: ControlInput, params: VesselParams) -> VesselState:
    """Advance the vessel one tick of params.dt.

    Velocity updates first (acceleration = thrust / mass, angular
    acceleration = rudder * turn_rate) and is clamped; the pose then moves
    with the new velocity while the planar displacement uses the pre-step
    heading.  Deterministic: identical arguments give a bit-identical result.
    """
    _require_finite("VesselState", state.x, state.y, state.heading, state.speed, state.angular_rate)
    _require_finite("ControlInput", inp.thrust, inp.rudder)

    dt = params.dt
    accel = inp.thrust / params.mass
    speed = state.speed + accel * dt
    angular_rate = state.angular_rate + inp.rudder * params.turn_rate * dt
    speed = min(max(speed, -params.speed_max), params.speed_max)
    angular_rate = min(max(angular_rate, -params.angular_rate_max), params.angular_rate_max)

    heading_rad = math.radians(state.heading)
    x = state.x + math.sin(heading_rad) * speed * dt
    y = state.y + math.cos(heading_rad) * speed * dt
    heading = normalize_heading(state.heading + angular_rate * dt)
    return VesselState(x, y, heading, speed, angular_rate)


class VesselModel:
    """Stateful wrapper pairing a VesselState with its current parameters.

    Parameter swaps take effect between steps, never mid-step; an invalid
    replacement is rejected and the previous parameters stay active.
    """

    def __init__(self, state: VesselState, params: VesselParams):
        self.state = state
        self.params = params

    def set_params(self, new: VesselParams) -> None:
        if not isinstance(new, VesselParams):
            new = VesselParams(**new)  # raises InvalidStateError if invalid
        self.params = new

    def step(self, inp: ControlInput) -> VesselState:
        self.state = step(self.state, clamp(inp, self.params), self.params)
        return self.state

    def replace_state(self, **changes) -> VesselState:
        self.state = replace(self.state, **changes)
        return self.state
