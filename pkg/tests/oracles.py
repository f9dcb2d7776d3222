"""Independent reference values: mpmath scalars and scipy matrix functions."""

import numpy as np
from mpmath import cosh, exp, log, mp, mpf, tanh
from scipy.linalg import expm, fractional_matrix_power, logm

mp.dps = 30

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)

_Z = 2 * cosh(mpf(1) / 2)
P0 = float(exp(mpf(1) / 2) / _Z)
P1 = float(exp(-mpf(1) / 2) / _Z)
TANH_HALF = float(tanh(mpf(1) / 2))
RENYI_2_FLIP = float(log(cosh(mpf(3) / 2) / cosh(mpf(1) / 2)))
EXP_MOMENT_2_FLIP = float(cosh(mpf(3) / 2) / cosh(mpf(1) / 2))
RENYI_HALF_FLIP = float(-2 * log(2 / _Z))
NEG_LOG_P0 = float(-log(exp(mpf(1) / 2) / _Z))
DF_1_TO_2 = float(-log(cosh(mpf(1)) / cosh(mpf(1) / 2)))

# values as printed in the requirements; see the gap check in test_acceptance
PRINTED_RENYI_2 = 0.735313
PRINTED_RENYI_HALF = 0.240263


def rotation_expm(axis, angle):
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    return expm(-0.5j * angle * (n[0] * SX + n[1] * SY + n[2] * SZ))


def rel_entropy_logm(rho, sigma):
    return float(np.trace(rho @ (logm(rho) - logm(sigma))).real)


def renyi_fmp(rho, sigma, alpha):
    t = np.trace(fractional_matrix_power(rho, alpha) @ fractional_matrix_power(sigma, 1 - alpha))
    return float(np.log(t.real) / (alpha - 1))
