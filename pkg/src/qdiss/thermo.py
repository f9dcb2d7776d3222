"""Gibbs bookkeeping, two-point-measurement work statistics and relation checks.

Energy convention: the boundary Hamiltonian is ``-(omega/2) sigma_z`` so the
north pole ``|0>`` is the ground state with energy ``-omega/2`` and ``|1>``
sits at ``+omega/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgumentError, SupportMismatchError
from .protocol import IDEAL, Protocol, PulseShape, forward_backward_trajectories
from .qmath import (
    ALPHA_ONE_GAP,
    DensityMatrix,
    dagger,
    relative_entropy,
    renyi_relative_entropy,
)

STOCHASTIC_TOL = 1e-12


@dataclass(frozen=True)
class GibbsSpec:
    beta: float = 1.0
    omega_start: float = 1.0
    omega_end: float = 1.0

    def __post_init__(self):
        if not self.beta > 0:
            raise InvalidArgumentError("beta must be positive")
        if not (self.omega_start > 0 and self.omega_end > 0):
            raise InvalidArgumentError("level splittings must be positive")

    @classmethod
    def from_protocol(cls, p: Protocol, beta: float = 1.0) -> "GibbsSpec":
        """Boundary splittings from a protocol whose omegas are in units of 1/beta."""
        return cls(beta, p.omega_start / beta, p.omega_end / beta)

    def omega(self, which: str) -> float:
        if which == "start":
            return self.omega_start
        if which == "end":
            return self.omega_end
        raise InvalidArgumentError(f"which must be 'start' or 'end', got {which!r}")

    def energies(self, which: str) -> np.ndarray:
        w = self.omega(which)
        return np.array([-0.5 * w, 0.5 * w])

    def populations(self, which: str) -> np.ndarray:
        x = self.beta * self.omega(which)
        excited = math.exp(-x) / (1.0 + math.exp(-x))
        return np.array([1.0 / (1.0 + math.exp(-x)), excited])

    def log_partition(self, which: str) -> float:
        x = abs(self.beta * self.omega(which))
        return 0.5 * x + math.log1p(math.exp(-x))


def gibbs_state(g: GibbsSpec, which: str = "start") -> DensityMatrix:
    return DensityMatrix(np.diag(g.populations(which)).astype(complex))


def free_energy_difference(g: GibbsSpec) -> float:
    """``F_end - F_start = -(1/beta) ln(Z_end / Z_start)``."""
    return -(g.log_partition("end") - g.log_partition("start")) / g.beta


@dataclass(frozen=True)
class TransitionTable:
    """Two-point-measurement conditional probabilities, ``p[j, i] = P(j | i)``."""

    p: np.ndarray

    def __post_init__(self):
        arr = np.array(self.p, dtype=float)
        if arr.shape != (2, 2):
            raise InvalidArgumentError("transition table must be 2x2")
        if np.any(arr < -STOCHASTIC_TOL) or np.any(arr > 1 + STOCHASTIC_TOL):
            raise InvalidArgumentError("transition probabilities must lie in [0, 1]")
        if np.max(np.abs(arr.sum(axis=0) - 1.0)) > STOCHASTIC_TOL:
            raise InvalidArgumentError("each column of the transition table must sum to 1")
        arr.setflags(write=False)
        object.__setattr__(self, "p", arr)

    def is_doubly_stochastic(self, atol: float = STOCHASTIC_TOL) -> bool:
        return bool(np.max(np.abs(self.p.sum(axis=1) - 1.0)) <= atol)


def transition_probabilities(u) -> TransitionTable:
    u = np.asarray(u, dtype=complex)
    if np.max(np.abs(dagger(u) @ u - np.eye(2))) > 1e-10:
        raise InvalidArgumentError("transition table requires a unitary within 1e-10")
    return TransitionTable(np.abs(u) ** 2)


def _work_table(g: GibbsSpec) -> np.ndarray:
    # w[j, i] = E_j(end) - E_i(start) - dF
    e0, e1 = g.energies("start"), g.energies("end")
    return e1[:, None] - e0[None, :] - free_energy_difference(g)


def _joint(t: TransitionTable, g: GibbsSpec) -> np.ndarray:
    return t.p * g.populations("start")[None, :]


def average_dissipated_work(t: TransitionTable, g: GibbsSpec) -> float:
    return float(np.sum(_joint(t, g) * _work_table(g)))


def exp_dissipated_work(t: TransitionTable, g: GibbsSpec, alpha: float) -> float:
    """``< exp(beta (alpha - 1) W_diss) >`` over the two-point-measurement outcomes."""
    return float(np.sum(_joint(t, g) * np.exp(g.beta * (alpha - 1.0) * _work_table(g))))


@dataclass(frozen=True)
class WorkStatistics:
    mean_dissipated: float
    std_dissipated: float
    exp_moments: dict[float, float]
    trajectory_weights: tuple[tuple[int, int, float, float], ...]


def work_statistics(t: TransitionTable, g: GibbsSpec, alphas: Iterable[float] = ()) -> WorkStatistics:
    """Full dissipated-work distribution summary.

    ``trajectory_weights`` lists ``(i, j, probability, dissipated_work)`` for the
    four measurement outcome pairs. ``std_dissipated`` is the spread of that
    distribution (not a repetition standard error).
    """
    joint = _joint(t, g)
    work = _work_table(g)
    mean = float(np.sum(joint * work))
    var = float(np.sum(joint * (work - mean) ** 2))
    weights = tuple((i, j, float(joint[j, i]), float(work[j, i]))
                    for i in range(2) for j in range(2))
    moments = {float(a): exp_dissipated_work(t, g, a) for a in alphas}
    return WorkStatistics(mean, math.sqrt(max(var, 0.0)), moments, weights)


@dataclass(frozen=True)
class RenyiPoint:
    lhs: float
    rhs: float
    residual: float


@dataclass(frozen=True)
class CheckpointRelations:
    index: int
    time: float
    entropy_lhs: float
    entropy_rhs: float
    entropy_residual: float
    renyi: dict[float, RenyiPoint] = field(default_factory=dict)


@dataclass(frozen=True)
class RelationReport:
    """Both sides of the entropy and Renyi dissipation relations per checkpoint.

    The left side is the divergence between the forward state at ``t_m`` and
    the backward state at ``tau - t_m``; the right side comes from the
    full-protocol work statistics and is the same for every checkpoint.
    """

    label: str
    alphas: tuple[float, ...]
    rows: tuple[CheckpointRelations, ...]

    @property
    def times(self) -> np.ndarray:
        return np.array([r.time for r in self.rows])

    def fields(self) -> dict[tuple[str, float | None], np.ndarray]:
        """Column arrays keyed by ``(name, alpha)``; ``alpha`` is None for entropy columns."""
        out: dict[tuple[str, float | None], np.ndarray] = {}
        for name in ("entropy_lhs", "entropy_rhs", "entropy_residual"):
            out[(name, None)] = np.array([getattr(r, name) for r in self.rows])
        for a in self.alphas:
            for name in ("lhs", "rhs", "residual"):
                out[("renyi_" + name, a)] = np.array([getattr(r.renyi[a], name) for r in self.rows])
        return out

    def max_entropy_residual(self) -> float:
        return float(max(abs(r.entropy_residual) for r in self.rows))

    def max_renyi_residual(self) -> float:
        vals = [abs(p.residual) for r in self.rows for p in r.renyi.values()]
        return float(max(vals)) if vals else 0.0

    def max_residual(self) -> float:
        return max(self.max_entropy_residual(), self.max_renyi_residual())


def _validate_alphas(alphas: Iterable[float]) -> tuple[float, ...]:
    out = tuple(float(a) for a in alphas)
    for a in out:
        if not a > 0:
            raise InvalidArgumentError(f"alpha must be positive, got {a}")
    return out


def relation_report(label: str, times: Sequence[float],
                    forward: Sequence[DensityMatrix], backward: Sequence[DensityMatrix],
                    table: TransitionTable, g: GibbsSpec,
                    alphas: Iterable[float] = ()) -> RelationReport:
    """Evaluate both relations from state lists and a transition table.

    ``backward`` is in its own time order, so ``forward[m]`` is paired with
    ``backward[n - m]``. Alphas within 1e-6 of 1 use the relative entropy.
    """
    alphas = _validate_alphas(alphas)
    n = len(forward) - 1
    if len(backward) != n + 1 or len(times) != n + 1:
        raise InvalidArgumentError("forward, backward and times must have equal length")
    stats = work_statistics(table, g, alphas)
    entropy_rhs = g.beta * stats.mean_dissipated
    renyi_rhs = {}
    for a in alphas:
        if abs(a - 1.0) < ALPHA_ONE_GAP:
            renyi_rhs[a] = entropy_rhs
        else:
            renyi_rhs[a] = math.log(stats.exp_moments[a]) / (a - 1.0)
    rows = []
    for m in range(n + 1):
        rho_f, rho_b = forward[m], backward[n - m]
        try:
            lhs = relative_entropy(rho_f, rho_b)
            renyi = {}
            for a in alphas:
                if abs(a - 1.0) < ALPHA_ONE_GAP:
                    rl = lhs
                else:
                    rl = renyi_relative_entropy(rho_f, rho_b, a)
                renyi[a] = RenyiPoint(rl, renyi_rhs[a], rl - renyi_rhs[a])
        except SupportMismatchError as exc:
            raise exc.at_checkpoint(m) from exc
        rows.append(CheckpointRelations(m, float(times[m]), lhs, entropy_rhs,
                                        lhs - entropy_rhs, renyi))
    return RelationReport(label, alphas, tuple(rows))


def verify_relations(p: Protocol, g: GibbsSpec, shape: PulseShape = IDEAL,
                     alphas: Iterable[float] = (0.5, 2.0)) -> RelationReport:
    """Exact (noise-free, infinite-shot) evaluation of both relations for a protocol."""
    forward, backward = forward_backward_trajectories(p, g, shape)
    table = transition_probabilities(forward[-1].unitary)
    return relation_report(p.label, forward.times, forward.states, backward.states,
                           table, g, alphas)
