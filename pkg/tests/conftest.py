import math
import time

import numpy as np
import pytest

from virtualcat.spectrum import ModelParams, dressed_eigensystem


@pytest.fixture(scope="session")
def params():
    return ModelParams()


@pytest.fixture(scope="session")
def eig(params):
    return dressed_eigensystem(params)


@pytest.fixture(scope="session")
def small_params():
    """Small cutoff that still holds the alpha = 2 coherent tail below 1e-8."""
    return ModelParams(fock_cutoff=20)


@pytest.fixture(scope="session")
def small_eig(small_params):
    return dressed_eigensystem(small_params)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def random_unitary(rng, dim):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture(scope="session")
def multitone_calibration():
    """Multi-tone pi-pulse calibrated at omega_g = 6.7, lambda = 1, 9 tones, 70 drive periods."""
    from virtualcat.drive import PulseSpec, calibrate_pi

    p = ModelParams(omega_g=6.7)
    return calibrate_pi(p, PulseSpec(kind="multitone", n_tones=9, duration=2 * math.pi * 70))


# -- full protocol runs shared by the acceptance and protocol tests ----------

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def ultrafast_result():
    from virtualcat.config import default_config
    from virtualcat.scenarios import run_scenario

    t0 = time.perf_counter()
    res = run_scenario(default_config("ultrafast_roundtrip"))
    res.metadata["runtime_seconds"] = time.perf_counter() - t0
    return res


@pytest.fixture(scope="session")
def multitone_result(multitone_calibration):
    """Dissipative multi-tone round trip; the pi-pulse amplitude comes from the shared calibration."""
    from virtualcat.config import default_config
    from virtualcat.scenarios import run_scenario

    cfg = default_config("multitone_roundtrip")
    cfg.pulse.amplitude = multitone_calibration.amplitude
    t0 = time.perf_counter()
    res = run_scenario(cfg)
    res.metadata["runtime_seconds"] = time.perf_counter() - t0
    return res


@pytest.fixture(scope="session")
def sweep_result():
    """Coupling sweep on the points named by the tone-count ordering checks."""
    from virtualcat.config import default_config
    from virtualcat.scenarios import run_scenario

    cfg = default_config("entropy_sweep")
    cfg.sweep.lambdas = [0.6, 0.7, 0.9, 1.0]
    t0 = time.perf_counter()
    res = run_scenario(cfg)
    res.metadata["runtime_seconds"] = time.perf_counter() - t0
    return res


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
