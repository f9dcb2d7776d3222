"""Piecewise fixed-axis drive protocols and their state trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from ._backend import kernels
from .errors import InvalidArgumentError
from .qmath import DensityMatrix, dagger, unitary_from_axis_angle

if TYPE_CHECKING:
    from .thermo import GibbsSpec

_REVERSE_SUFFIX = "~rev"


@dataclass(frozen=True)
class DriveStep:
    """Rotation by ``angle`` about an equatorial ``axis`` lasting ``duration`` ns."""

    axis: tuple[float, float, float]
    angle: float
    duration: float

    def __post_init__(self):
        axis = tuple(float(c) for c in self.axis)
        if len(axis) != 3:
            raise InvalidArgumentError("axis must be a 3-vector")
        if abs(axis[2]) > 1e-12:
            raise InvalidArgumentError("drive axis must lie on the Bloch equator")
        if abs(math.hypot(axis[0], axis[1]) - 1.0) > 1e-9:
            raise InvalidArgumentError("drive axis must have unit norm")
        if not self.duration > 0:
            raise InvalidArgumentError("step duration must be positive")
        # a half turn is allowed so a single-step flip can be expressed
        if not abs(self.angle) <= math.pi:
            raise InvalidArgumentError("step angle must satisfy |angle| <= pi")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "angle", float(self.angle))
        object.__setattr__(self, "duration", float(self.duration))

    @classmethod
    def at_phase(cls, phase: float, angle: float, duration: float) -> "DriveStep":
        """Step about the equatorial axis ``phase`` radians from x."""
        c, s = math.cos(phase), math.sin(phase)
        # keep exact zeros for the x and y axes
        c = 0.0 if abs(c) < 1e-15 else c
        s = 0.0 if abs(s) < 1e-15 else s
        return cls((c, s, 0.0), angle, duration)

    def reversed(self) -> "DriveStep":
        return DriveStep(self.axis, -self.angle, self.duration)


@dataclass(frozen=True)
class Protocol:
    steps: tuple[DriveStep, ...]
    omega_start: float = 1.0
    omega_end: float = 1.0
    label: str = "custom"

    def __post_init__(self):
        steps = tuple(self.steps)
        if not steps:
            raise InvalidArgumentError("protocol needs at least one step")
        object.__setattr__(self, "steps", steps)

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    @property
    def total_duration(self) -> float:
        return math.fsum(s.duration for s in self.steps)

    def checkpoint_times(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum([s.duration for s in self.steps])])


@dataclass(frozen=True)
class PulseShape:
    envelope: str = "ideal"
    sigma_fraction: float = 0.25
    truncation: float = 2.0
    integration_steps: int = 256

    def __post_init__(self):
        if self.envelope not in ("ideal", "gaussian"):
            raise InvalidArgumentError(f"unknown envelope {self.envelope!r}")
        if not 0.0 < self.sigma_fraction <= 1.0:
            raise InvalidArgumentError("sigma_fraction must lie in (0, 1]")
        if not self.truncation >= 1.0:
            raise InvalidArgumentError("truncation must be at least 1 sigma")
        if int(self.integration_steps) != self.integration_steps or self.integration_steps < 16:
            raise InvalidArgumentError("integration_steps must be an integer >= 16")


IDEAL = PulseShape()
GAUSSIAN = PulseShape("gaussian")


@dataclass(frozen=True)
class Checkpoint:
    time: float
    state: DensityMatrix
    unitary: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class Trajectory:
    checkpoints: tuple[Checkpoint, ...]

    def __len__(self) -> int:
        return len(self.checkpoints)

    def __getitem__(self, i: int) -> Checkpoint:
        return self.checkpoints[i]

    @property
    def times(self) -> np.ndarray:
        return np.array([c.time for c in self.checkpoints])

    @property
    def states(self) -> list[DensityMatrix]:
        return [c.state for c in self.checkpoints]


def _check_positive(**kwargs):
    for name, value in kwargs.items():
        if not value > 0:
            raise InvalidArgumentError(f"{name} must be positive, got {value}")


def build_xy_quench(theta: float, n_steps: int = 14, step_ns: float = 16.0,
                    omega_start: float = 1.0, omega_end: float = 1.0,
                    label: str = "xy_quench") -> Protocol:
    """Alternating x, y, x, ... rotations by ``theta`` radians."""
    _check_positive(theta=theta, step_ns=step_ns)
    if n_steps < 1:
        raise InvalidArgumentError("n_steps must be >= 1")
    steps = tuple(DriveStep.at_phase(0.0 if k % 2 == 0 else math.pi / 2, theta, step_ns)
                  for k in range(n_steps))
    return Protocol(steps, omega_start, omega_end, label)


def build_rotating_axis(theta: float, phi_spacing: float, n_steps: int = 16,
                        step_ns: float = 16.0, omega_start: float = 1.0,
                        omega_end: float = 1.0, label: str = "rotating_axis") -> Protocol:
    """Rotations by ``theta`` about axes advancing by ``phi_spacing`` from x."""
    _check_positive(theta=theta, step_ns=step_ns)
    if phi_spacing < 0:
        raise InvalidArgumentError("phi_spacing must be non-negative")
    if n_steps < 1:
        raise InvalidArgumentError("n_steps must be >= 1")
    steps = tuple(DriveStep.at_phase(k * phi_spacing, theta, step_ns) for k in range(n_steps))
    return Protocol(steps, omega_start, omega_end, label)


def protocol_a() -> Protocol:
    """14 alternating x/y steps of 6.22 degrees, 16 ns each."""
    return build_xy_quench(math.radians(6.22), 14, 16.0)


def protocol_b() -> Protocol:
    """16 steps of 5.88 degrees about axes spaced 6.08 degrees apart, 16 ns each."""
    return build_rotating_axis(math.radians(5.88), math.radians(6.08), 16, 16.0)


def reverse_protocol(p: Protocol) -> Protocol:
    """Mirror reverse: steps in reverse order with negated angles, boundaries swapped."""
    if p.label.endswith(_REVERSE_SUFFIX):
        label = p.label[: -len(_REVERSE_SUFFIX)]
    else:
        label = p.label + _REVERSE_SUFFIX
    return Protocol(tuple(s.reversed() for s in reversed(p.steps)),
                    p.omega_end, p.omega_start, label)


def step_unitary(s: DriveStep, shape: PulseShape = IDEAL) -> np.ndarray:
    if shape.envelope == "ideal":
        return unitary_from_axis_angle(s.axis, s.angle)
    nx, ny, nz = s.axis
    return kernels().gaussian_step_propagator(
        nx, ny, nz, s.angle, shape.sigma_fraction, shape.truncation,
        int(shape.integration_steps))


def cumulative_unitaries(p: Protocol, shape: PulseShape = IDEAL) -> list[np.ndarray]:
    """``[I, R_1, R_2 R_1, ..., R_n ... R_1]`` for the protocol's step unitaries."""
    if shape.envelope == "ideal":
        axes = np.array([s.axis for s in p.steps])
        angles = np.array([s.angle for s in p.steps])
        return list(kernels().compose_rotations(axes, angles))
    out = [np.eye(2, dtype=complex)]
    for s in p.steps:
        out.append(step_unitary(s, shape) @ out[-1])
    return out


def evolve_trajectory(p: Protocol, initial: DensityMatrix,
                      shape: PulseShape = IDEAL) -> Trajectory:
    times = p.checkpoint_times()
    points = []
    for t, u in zip(times, cumulative_unitaries(p, shape)):
        state = initial if t == 0.0 else initial.evolve(u)
        points.append(Checkpoint(float(t), state, u))
    return Trajectory(tuple(points))


def forward_backward_trajectories(p: Protocol, g: "GibbsSpec",
                                  shape: PulseShape = IDEAL) -> tuple[Trajectory, Trajectory]:
    """Forward run from the start Gibbs state; mirror-reverse run from the end Gibbs state.

    Forward checkpoint ``m`` pairs with backward checkpoint ``n_steps - m``.
    """
    from .thermo import gibbs_state

    forward = evolve_trajectory(p, gibbs_state(g, "start"), shape)
    backward = evolve_trajectory(reverse_protocol(p), gibbs_state(g, "end"), shape)
    return forward, backward


def total_unitary(p: Protocol, shape: PulseShape = IDEAL) -> np.ndarray:
    return cumulative_unitaries(p, shape)[-1]


def unitarity_defect(u) -> float:
    u = np.asarray(u)
    return float(np.max(np.abs(dagger(u) @ u - np.eye(2))))

