"""Bicycle-model vehicle kinematics and area-of-interest prediction.

Axis convention: a heading of 0 points along +y and positive headings turn
towards +x, so ``dx/dt = v sin(heading)`` and ``dy/dt = v cos(heading)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .errors import InvalidInputError

DEFAULT_STEP = 1e-3
_STRAIGHT_TAN = 1e-12


def _wrap_angle(angle: float) -> float:
    """Map an angle onto (-pi, pi]."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class VehicleState:
    x: float
    y: float
    v: float
    heading: float

    def __post_init__(self):
        if self.v < 0:
            raise InvalidInputError(f"speed must be non-negative, got {self.v}")
        object.__setattr__(self, "heading", _wrap_angle(self.heading))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class ControlInput:
    accel: float
    steer: float

    def __post_init__(self):
        if not abs(self.steer) < math.pi / 2:
            raise InvalidInputError(
                f"invalid-steer: |steer| must be below pi/2, got {self.steer}")


@dataclass(frozen=True)
class VehicleGeometry:
    wheelbase: float
    safety_radius: float

    def __post_init__(self):
        if self.wheelbase <= 0 or self.safety_radius <= 0:
            raise InvalidInputError("wheelbase and safety_radius must be positive")


@dataclass(frozen=True)
class Trajectory:
    times: tuple[float, ...]
    states: tuple[VehicleState, ...]

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise InvalidInputError("times and states differ in length")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise InvalidInputError("trajectory times must be strictly increasing")

    def __len__(self):
        return len(self.states)

    @property
    def positions(self) -> np.ndarray:
        return np.array([[s.x, s.y] for s in self.states])


@dataclass(frozen=True)
class AoI:
    """Swept safety disk, sampled at the K predicted stage positions.

    ``centers`` holds displacements relative to the vehicle position at t0.
    """
    centers: np.ndarray
    radius: float
    origin: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __len__(self):
        return len(self.centers)


def heading_rate(state: VehicleState, control: ControlInput,
                 geometry: VehicleGeometry) -> float:
    """Rate of change of the driving direction, ``v tan(steer) / l``."""
    tan_phi = math.tan(control.steer)
    if abs(tan_phi) < _STRAIGHT_TAN:
        return 0.0
    return state.v * tan_phi / geometry.wheelbase


def _displacement(v0, accel, heading0, rate, duration, step):
    """Integrate the frozen-rate position ODE over ``[0, duration]``.

    Composite Simpson rule with an even number of panels no wider than
    ``step``.
    """
    n = max(2, math.ceil(duration / step))
    n += n % 2
    t = np.linspace(0.0, duration, n + 1)
    speed = v0 + accel * t
    phase = heading0 + rate * t
    dx = simpson(np.sin(phase) * speed, x=t)
    dy = simpson(np.cos(phase) * speed, x=t)
    return float(dx), float(dy)


def propagate(state: VehicleState, control: ControlInput,
              geometry: VehicleGeometry, dt: float, *,
              rate: float | None = None, step: float = DEFAULT_STEP
              ) -> VehicleState:
    """Advance ``state`` by ``dt`` seconds under constant controls.

    The heading rate is frozen at its value at the start of the interval
    unless ``rate`` is given; passing the rate of an earlier interval lets
    consecutive calls compose exactly into one longer step.
    """
    if dt <= 0:
        raise InvalidInputError(f"dt must be positive, got {dt}")
    if rate is None:
        rate = heading_rate(state, control, geometry)
    dx, dy = _displacement(state.v, control.accel, state.heading, rate, dt, step)
    return VehicleState(
        x=state.x + dx,
        y=state.y + dy,
        v=max(state.v + control.accel * dt, 0.0),
        heading=state.heading + rate * dt,
    )


def predict_trajectory(state: VehicleState, control: ControlInput,
                       geometry: VehicleGeometry, horizon: float, stages: int,
                       *, t0: float = 0.0, step: float = DEFAULT_STEP
                       ) -> Trajectory:
    """Predict ``stages + 1`` evenly spaced states over ``horizon`` seconds.

    Every sample is integrated from t0 directly (no chaining), so the
    quadrature error does not accumulate across stages.
    """
    if horizon <= 0:
        raise InvalidInputError(f"horizon must be positive, got {horizon}")
    if stages < 1:
        raise InvalidInputError("zero-stages: at least one stage is required")
    rate = heading_rate(state, control, geometry)
    times = [t0]
    states = [state]
    for k in range(1, stages + 1):
        tau = k * horizon / stages
        times.append(t0 + tau)
        states.append(propagate(state, control, geometry, tau, rate=rate, step=step))
    return Trajectory(tuple(times), tuple(states))


def predict_aoi(trajectory: Trajectory, geometry: VehicleGeometry) -> AoI:
    """AoI disk centres: every non-initial sample, relative to the start."""
    if len(trajectory) < 2:
        raise InvalidInputError("empty-trajectory: need at least two samples")
    positions = trajectory.positions
    return AoI(centers=positions[1:] - positions[0],
               radius=geometry.safety_radius,
               origin=positions[0].copy())
