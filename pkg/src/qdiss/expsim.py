"""Simulated experiment: decoherence, finite-shot tomography and work sampling.

Random numbers come from one root seed. Every draw uses its own generator,
keyed by a counter tuple through ``numpy.random.SeedSequence`` spawn keys::

    (purpose, repetition, direction, branch, checkpoint, basis)

``purpose`` is 0 for tomography and 1 for two-point measurements. Since no
stream depends on how many draws came before it, repetitions can run in any
order or in parallel and still give bit-identical results.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateInputError, InvalidArgumentError
from .protocol import IDEAL, Protocol, PulseShape, reverse_protocol, step_unitary
from .qmath import IDENTITY, PAULIS, DensityMatrix, dagger
from .thermo import GibbsSpec, RelationReport, TransitionTable, relation_report

TOMOGRAPHY, TPM = 0, 1
FORWARD, BACKWARD = 0, 1


@dataclass(frozen=True)
class NoiseModel:
    """Amplitude damping (``t1``) plus pure dephasing so coherences decay with ``t2``; times in ns."""

    t1: float = 8327.0
    t2: float = 6813.0
    enabled: bool = True

    def __post_init__(self):
        if self.enabled:
            if not (self.t1 > 0 and self.t2 > 0):
                raise InvalidArgumentError("t1 and t2 must be positive")
            if self.t2 > 2.0 * self.t1:
                raise InvalidArgumentError("t2 cannot exceed 2*t1")


NO_NOISE = NoiseModel(enabled=False)


@dataclass(frozen=True)
class ShotConfig:
    tomography_shots: int = 3000
    tpm_shots: int = 3000
    repetitions: int = 25
    seed: int = 0

    def __post_init__(self):
        for name in ("tomography_shots", "tpm_shots", "repetitions"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise InvalidArgumentError(f"{name} must be a positive integer")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise InvalidArgumentError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class TomographyResult:
    pauli_expectations: tuple[float, float, float]
    raw_matrix: np.ndarray
    adjusted_state: DensityMatrix
    fidelity_raw: float
    fidelity_adjusted: float


def substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(key)))


def apply_noise_step(rho: DensityMatrix, m: NoiseModel, dt: float) -> DensityMatrix:
    if dt < 0:
        raise InvalidArgumentError("dt must be non-negative")
    if not m.enabled or dt == 0:
        return rho
    gamma = -math.expm1(-dt / m.t1)
    inv_tphi = 1.0 / m.t2 - 0.5 / m.t1
    coherence = math.sqrt(1.0 - gamma) * math.exp(-dt * inv_tphi)
    r = rho.matrix
    excited = r[1, 1].real * (1.0 - gamma)
    out = np.array([[1.0 - excited, r[0, 1] * coherence],
                    [r[1, 0] * coherence, excited]], dtype=complex)
    return DensityMatrix(out)


def _basis_generators(rng) -> Sequence[np.random.Generator]:
    if isinstance(rng, np.random.Generator):
        return (rng, rng, rng)
    gens = tuple(rng)
    if len(gens) != 3:
        raise InvalidArgumentError("need one generator or three (x, y, z)")
    return gens


def simulate_tomography(rho: DensityMatrix, shots: int, rng) -> np.ndarray:
    """Empirical Pauli expectations from ``shots`` projective measurements per basis.

    ``rng`` is a Generator (used for x, y, z in order) or three Generators.
    """
    if shots < 1:
        raise InvalidArgumentError("shots must be >= 1")
    gens = _basis_generators(rng)
    out = np.empty(3)
    for k, (pauli, gen) in enumerate(zip(PAULIS, gens)):
        expect = float(np.trace(rho.matrix @ pauli).real)
        prob_up = min(max(0.5 * (1.0 + expect), 0.0), 1.0)
        ups = gen.binomial(shots, prob_up)
        out[k] = (2.0 * ups - shots) / shots
    return out


def state_fidelity(rho, reference: DensityMatrix) -> float:
    """Fidelity of a (possibly unphysical) matrix with a reference state, clipped to [0, 1].

    Pure references use the overlap ``<psi|rho|psi>``; mixed ones the 2x2
    closed form of the Uhlmann fidelity.
    """
    r = np.asarray(rho)
    overlap = float(np.trace(r @ reference.matrix).real)
    if reference.purity < 1.0 - 1e-9:
        det_prod = float(np.linalg.det(r).real) * float(np.prod(reference.eigenvalues))
        overlap += 2.0 * math.sqrt(max(det_prod, 0.0))
    return min(max(overlap, 0.0), 1.0)


def _from_bloch_unchecked(r) -> np.ndarray:
    x, y, z = r
    return 0.5 * (IDENTITY + x * PAULIS[0] + y * PAULIS[1] + z * PAULIS[2])


def reconstruct_and_project(expectations, reference: DensityMatrix | None = None,
                            mode: str = "radial") -> TomographyResult:
    """Linear-inversion reconstruction followed by a physicality projection.

    ``clip`` clamps the eigenvalues to [0, 1] and renormalizes; ``radial``
    rescales the Bloch vector to unit length (the pure-state assumption).
    """
    r = np.asarray(expectations, dtype=float).reshape(3)
    if not np.all(np.isfinite(r)):
        raise InvalidArgumentError("expectations must be finite")
    raw = _from_bloch_unchecked(r)
    norm = float(np.linalg.norm(r))
    if mode == "radial":
        if norm == 0.0:
            raise DegenerateInputError("zero Bloch vector has no radial projection")
        adjusted = DensityMatrix(_from_bloch_unchecked(r / norm))
    elif mode == "clip":
        vals, vecs = np.linalg.eigh(raw)
        vals = np.clip(vals, 0.0, 1.0)
        m = (vecs * (vals / vals.sum())) @ dagger(vecs)
        adjusted = DensityMatrix(0.5 * (m + dagger(m)))
    else:
        raise InvalidArgumentError(f"unknown projection mode {mode!r}")
    if reference is None:
        f_raw = f_adj = float("nan")
    else:
        f_raw = state_fidelity(raw, reference)
        f_adj = state_fidelity(adjusted.matrix, reference)
    return TomographyResult(tuple(float(v) for v in r), raw, adjusted, f_raw, f_adj)


def sample_transition_table(flip_probs, shots: int, rng) -> TransitionTable:
    """Empirical table from binomial flip counts; ``flip_probs[i] = P(1-i | i)``.

    ``rng`` is one Generator or one per initial state.
    """
    if shots < 1:
        raise InvalidArgumentError("shots must be >= 1")
    gens = (rng, rng) if isinstance(rng, np.random.Generator) else tuple(rng)
    table = np.zeros((2, 2))
    for i in range(2):
        q = min(max(float(flip_probs[i]), 0.0), 1.0)
        flips = gens[i].binomial(shots, q)
        table[1 - i, i] = flips / shots
        table[i, i] = (shots - flips) / shots
    return TransitionTable(table)


def simulate_tpm_counts(u, shots_per_initial: int, rng) -> TransitionTable:
    u = np.asarray(u)
    flips = (abs(u[1, 0]) ** 2, abs(u[0, 1]) ** 2)
    return sample_transition_table(flips, shots_per_initial, rng)


@dataclass(frozen=True)
class RunStatistics:
    label: str
    alphas: tuple[float, ...]
    times: np.ndarray
    n_repetitions: int
    mean: dict
    std: dict

    def standard_error(self, key) -> np.ndarray:
        return self.std[key] / math.sqrt(self.n_repetitions)


def aggregate_repetitions(reports: Sequence[RelationReport]) -> RunStatistics:
    """Per-checkpoint sample mean and standard deviation (ddof=1; 0 for one report)."""
    if not reports:
        raise InvalidArgumentError("need at least one report")
    first = reports[0]
    for r in reports[1:]:
        if (r.alphas != first.alphas or len(r.rows) != len(first.rows)
                or not np.array_equal(r.times, first.times)):
            raise InvalidArgumentError("reports have mismatched checkpoint structure")
    columns = [r.fields() for r in reports]
    n = len(reports)
    mean, std = {}, {}
    for key in columns[0]:
        stack = np.stack([c[key] for c in columns])
        # shift by the first sample so identical repetitions give exactly zero spread
        shifted = stack - stack[0]
        mean[key] = stack[0] + shifted.mean(axis=0)
        std[key] = shifted.std(axis=0, ddof=1) if n > 1 else np.zeros(stack.shape[1])
    return RunStatistics(first.label, first.alphas, first.times, n, mean, std)


@dataclass(frozen=True)
class RepetitionResult:
    report: RelationReport
    # shape (direction, branch, checkpoint)
    fidelity_raw: np.ndarray
    fidelity_adjusted: np.ndarray


@dataclass(frozen=True)
class ShotRun:
    statistics: RunStatistics
    repetitions: tuple[RepetitionResult, ...]

    @property
    def reports(self) -> list[RelationReport]:
        return [r.report for r in self.repetitions]


def branch_states(p: Protocol, initial: int, noise: NoiseModel,
                  shape: PulseShape = IDEAL) -> tuple[list[DensityMatrix], list[DensityMatrix]]:
    """(noisy, ideal) states at every checkpoint starting from basis state ``initial``."""
    psi = np.zeros(2, dtype=complex)
    psi[initial] = 1.0
    ideal = [DensityMatrix.pure(psi)]
    noisy = [ideal[0]]
    for s in p.steps:
        u = step_unitary(s, shape)
        ideal.append(ideal[-1].evolve(u))
        noisy.append(apply_noise_step(noisy[-1].evolve(u), noise, s.duration))
    return noisy, ideal


def _mix(weights, states: Sequence[DensityMatrix]) -> DensityMatrix:
    return DensityMatrix(weights[0] * states[0].matrix + weights[1] * states[1].matrix)


def simulate_repetition(p: Protocol, g: GibbsSpec, shape: PulseShape, alphas: Sequence[float],
                        shots: ShotConfig, noise: NoiseModel, rep: int,
                        projection: str = "radial") -> RepetitionResult:
    """One simulated experiment: tomography of both branches in both directions plus TPM counts.

    Each direction is run from ``|0>`` and ``|1>``; the tomographed branch
    states are combined with the analytic Gibbs weights afterwards, so only
    the conditional dynamics is ever sampled.
    """
    n = p.n_steps
    fid_raw = np.empty((2, 2, n + 1))
    fid_adj = np.empty((2, 2, n + 1))
    mixed: list[list[DensityMatrix]] = []
    final_forward = []
    for d, (proto, which) in enumerate(((p, "start"), (reverse_protocol(p), "end"))):
        weights = g.populations(which)
        per_branch = []
        for b in range(2):
            noisy, ideal = branch_states(proto, b, noise, shape)
            if d == FORWARD:
                final_forward.append(noisy[-1])
            estimates = []
            for m in range(n + 1):
                gens = [substream(shots.seed, TOMOGRAPHY, rep, d, b, m, k) for k in range(3)]
                expect = simulate_tomography(noisy[m], shots.tomography_shots, gens)
                tomo = reconstruct_and_project(expect, ideal[m], projection)
                fid_raw[d, b, m] = tomo.fidelity_raw
                fid_adj[d, b, m] = tomo.fidelity_adjusted
                estimates.append(tomo.adjusted_state)
            per_branch.append(estimates)
        mixed.append([_mix(weights, (per_branch[0][m], per_branch[1][m])) for m in range(n + 1)])
    flips = [final_forward[i].matrix[1 - i, 1 - i].real for i in range(2)]
    tpm_gens = [substream(shots.seed, TPM, rep, FORWARD, i) for i in range(2)]
    table = sample_transition_table(flips, shots.tpm_shots, tpm_gens)
    report = relation_report(p.label, p.checkpoint_times(), mixed[FORWARD], mixed[BACKWARD],
                             table, g, alphas)
    return RepetitionResult(report, fid_raw, fid_adj)


def _repetition_task(args):
    return simulate_repetition(*args)


def run_shots(p: Protocol, g: GibbsSpec, shape: PulseShape = IDEAL,
              alphas: Iterable[float] = (0.5, 2.0), shots: ShotConfig = ShotConfig(),
              noise: NoiseModel = NO_NOISE, projection: str = "radial",
              max_workers: int | None = None) -> ShotRun:
    """All repetitions plus their statistics; ``max_workers > 1`` fans out to processes."""
    alphas = tuple(float(a) for a in alphas)
    tasks = [(p, g, shape, alphas, shots, noise, rep, projection)
             for rep in range(shots.repetitions)]
    if max_workers and max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            results = tuple(pool.map(_repetition_task, tasks))
    else:
        results = tuple(_repetition_task(t) for t in tasks)
    return ShotRun(aggregate_repetitions([r.report for r in results]), results)
