"""Exact 2x2 complex linear algebra and quantum divergences.

Matrices are plain ``numpy`` arrays of shape ``(2, 2)`` and dtype ``complex``.
States are wrapped in :class:`DensityMatrix`, which validates on construction
and caches its spectral decomposition. Everything here is immutable and pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

from ._backend import kernels
from .errors import InvalidArgumentError, SupportMismatchError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
NEG_EIG_CLAMP = 1e-10
SUPPORT_TOL = 1e-14
BLOCH_NORM_TOL = 1e-9
ALPHA_ONE_GAP = 1e-6

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

ComplexMatrix2 = np.ndarray


def _as_matrix(m) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.shape != (2, 2):
        raise InvalidArgumentError(f"expected a 2x2 matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("matrix has non-finite entries")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(m))


def matrices_close(a, b, atol: float) -> bool:
    """Entrywise comparison with an explicit absolute tolerance."""
    return bool(np.max(np.abs(np.asarray(a) - np.asarray(b))) <= atol)


def operator_norm(m) -> float:
    return float(np.linalg.norm(np.asarray(m), 2))


def phase_distance(u, v) -> float:
    """Operator-norm distance between two unitaries, minimized over global phase."""
    overlap = np.trace(dagger(np.asarray(u)) @ np.asarray(v))
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return operator_norm(np.asarray(u) * phase - np.asarray(v))


def is_hermitian(m, atol: float = HERMITIAN_TOL) -> bool:
    arr = np.asarray(m)
    return bool(np.max(np.abs(arr - dagger(arr))) <= atol)


def unitary_from_axis_angle(axis, angle: float) -> np.ndarray:
    """Rotation of the Bloch sphere by ``angle`` radians about ``axis``.

    Returns ``exp(-i angle/2 n.sigma)`` with ``n`` the normalized axis.
    """
    n = np.asarray(axis, dtype=float).reshape(3)
    norm = float(np.linalg.norm(n))
    if not np.isfinite(norm) or norm == 0.0:
        raise InvalidArgumentError("rotation axis must have nonzero finite norm")
    nx, ny, nz = n / norm
    c = math.cos(0.5 * angle)
    s = math.sin(0.5 * angle)
    return np.array(
        [[complex(c, -s * nz), complex(-s * ny, -s * nx)],
         [complex(s * ny, -s * nx), complex(c, s * nz)]],
        dtype=complex,
    )


def eig_hermitian(m) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigendecomposition of a 2x2 Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as the columns of a unitary matrix.
    """
    arr = _as_matrix(m)
    if not is_hermitian(arr):
        raise InvalidArgumentError("matrix is not Hermitian within 1e-12")
    l0, l1, u0, u1, w0, w1 = kernels().eigh2(
        float(arr[0, 0].real), float(arr[1, 1].real),
        complex(0.5 * (arr[0, 1] + np.conj(arr[1, 0]))),
    )
    vals = np.array([l0, l1])
    vecs = np.array([[u0, w0], [u1, w1]], dtype=complex)
    return vals, vecs


class BlochVector(NamedTuple):
    x: float
    y: float
    z: float

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated single-qubit state.

    Eigenvalues in ``[-1e-10, 0)`` are clamped to zero (and the trace
    renormalized); anything more negative is rejected.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray = field(init=False, repr=False)
    eigenvectors: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        arr = _as_matrix(self.matrix)
        if not is_hermitian(arr):
            raise InvalidArgumentError("density matrix is not Hermitian within 1e-12")
        tr = np.trace(arr).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidArgumentError(f"density matrix trace {tr!r} differs from 1")
        arr = 0.5 * (arr + dagger(arr))
        vals, vecs = eig_hermitian(arr)
        if vals[0] < -NEG_EIG_CLAMP:
            raise InvalidArgumentError(
                f"density matrix has negative eigenvalue {vals[0]:.3e}"
            )
        if vals[0] < 0.0:
            vals = np.clip(vals, 0.0, None)
            vals = vals / vals.sum()
            arr = (vecs * vals) @ dagger(vecs)
            arr = 0.5 * (arr + dagger(arr))
        arr.setflags(write=False)
        vals.setflags(write=False)
        vecs.setflags(write=False)
        object.__setattr__(self, "matrix", arr)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)

    @classmethod
    def pure(cls, psi) -> "DensityMatrix":
        v = np.asarray(psi, dtype=complex).reshape(2)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, np.conj(v)))

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix":
        return cls(0.5 * IDENTITY)

    @classmethod
    def from_bloch(cls, r) -> "DensityMatrix":
        x, y, z = (float(c) for c in r)
        if math.sqrt(x * x + y * y + z * z) > 1.0 + BLOCH_NORM_TOL:
            raise InvalidArgumentError("Bloch vector norm exceeds 1")
        return cls(0.5 * (IDENTITY + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z))

    def bloch(self) -> BlochVector:
        m = self.matrix
        return BlochVector(float(2.0 * m[0, 1].real), float(-2.0 * m[0, 1].imag),
                           float((m[0, 0] - m[1, 1]).real))

    def evolve(self, u) -> "DensityMatrix":
        u = np.asarray(u)
        return DensityMatrix(u @ self.matrix @ dagger(u))

    @property
    def purity(self) -> float:
        return float(np.sum(self.eigenvalues ** 2))

    def isclose(self, other: "DensityMatrix", atol: float = 1e-12) -> bool:
        return matrices_close(self.matrix, other.matrix, atol)


def bloch_convert(state: Union[DensityMatrix, BlochVector]):
    """Map a state to its Bloch vector, or a Bloch vector to its state."""
    if isinstance(state, DensityMatrix):
        return state.bloch()
    return DensityMatrix.from_bloch(state)


def matrix_function_psd(rho: DensityMatrix, func: str, alpha: float | None = None) -> np.ndarray:
    """Apply ``log`` or ``power`` (with exponent ``alpha``) on the spectrum of ``rho``."""
    vals, vecs = rho.eigenvalues, rho.eigenvectors
    if func == "log":
        if vals[0] <= SUPPORT_TOL:
            raise SupportMismatchError("log of a singular state", float(vals[0]))
        fvals = np.log(vals)
    elif func == "power":
        if alpha is None:
            raise InvalidArgumentError("power requires alpha")
        if alpha < 0 and vals[0] <= SUPPORT_TOL:
            raise SupportMismatchError("negative power of a singular state", float(vals[0]))
        fvals = np.array([v ** alpha if v > 0 else (1.0 if alpha == 0 else 0.0) for v in vals])
    else:
        raise InvalidArgumentError(f"unknown matrix function {func!r}")
    out = (vecs * fvals) @ dagger(vecs)
    return 0.5 * (out + dagger(out))


def _overlaps(rho: DensityMatrix, sigma: DensityMatrix) -> np.ndarray:
    # w[i, j] = |<a_i|b_j>|^2 for eigenvectors a of rho and b of sigma
    return np.abs(dagger(rho.eigenvectors) @ sigma.eigenvectors) ** 2


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Quantum relative entropy ``tr rho (ln rho - ln sigma)`` in nats."""
    p, q = rho.eigenvalues, sigma.eigenvalues
    w = _overlaps(rho, sigma)
    weight_on = p @ w  # weight of rho on each eigenvector of sigma
    total = 0.0
    for i in range(2):
        if p[i] > 0.0:
            total += p[i] * math.log(p[i])
    for j in range(2):
        if q[j] <= SUPPORT_TOL:
            if weight_on[j] > SUPPORT_TOL:
                raise SupportMismatchError(
                    f"support of rho not contained in support of sigma "
                    f"(sigma eigenvalue {q[j]:.3e})", float(q[j]))
            continue
        total -= weight_on[j] * math.log(q[j])
    return float(total)


def renyi_relative_entropy(rho: DensityMatrix, sigma: DensityMatrix, alpha: float) -> float:
    """Relative Renyi entropy ``ln tr(rho^a sigma^(1-a)) / (a-1)`` in nats."""
    if not alpha > 0:
        raise InvalidArgumentError(f"alpha must be positive, got {alpha}")
    if abs(alpha - 1.0) < ALPHA_ONE_GAP:
        raise InvalidArgumentError("alpha within 1e-6 of 1; use relative_entropy")
    p, q = rho.eigenvalues, sigma.eigenvalues
    w = _overlaps(rho, sigma)
    pa = np.array([x ** alpha if x > 0 else 0.0 for x in p])
    weight_on = pa @ w
    trace = 0.0
    for j in range(2):
        if q[j] <= SUPPORT_TOL:
            if alpha > 1.0 and weight_on[j] > SUPPORT_TOL:
                raise SupportMismatchError(
                    f"sigma singular (eigenvalue {q[j]:.3e}) with alpha > 1", float(q[j]))
            continue
        trace += weight_on[j] * q[j] ** (1.0 - alpha)
    if trace <= 0.0:
        raise SupportMismatchError("rho and sigma have orthogonal supports", float(q[0]))
    return float(math.log(trace) / (alpha - 1.0))
