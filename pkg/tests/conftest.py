import numpy as np
import pytest

from qdiss import _backend

BACKENDS = ["python"] + (["compiled"] if _backend.compiled_available() else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    previous = _backend.backend_name()
    _backend.use_backend(request.param)
    yield request.param
    _backend.use_backend(previous)


def random_unitary(rng):
    z = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, min_eig=0.0):
    u = random_unitary(rng)
    p = rng.uniform(min_eig, 1 - min_eig)
    m = u @ np.diag([p, 1 - p]) @ u.conj().T
    return 0.5 * (m + m.conj().T)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
