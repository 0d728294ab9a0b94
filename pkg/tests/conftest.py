import numpy as np
import pytest

from passcovert.geometry import SystemGeometry
from passcovert.local_detect import make_profile

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_profiles(rng, M, sigma=1.0, homogeneous=False):
    span = rng.uniform(0.5, 3.0)
    out = []
    for _ in range(M):
        pj = rng.uniform(0.5, 2.0)
        aj = span / pj if homogeneous else rng.uniform(0.3, 2.0)
        out.append(make_profile(rng.uniform(0.1, 2.0), aj, sigma, rng.uniform(0.2, 2.0), pj))
    return out


def toy_geometry(wardens=None, bob=(2.0, -0.3, 0.0)):
    if wardens is None:
        wardens = [[0.5, 1.0, 0.0], [3.0, -1.5, 0.0], [1.5, 2.0, 0.0]]
    return SystemGeometry.from_frequency(
        5e9, length=4.0, height=4.0, offset=0.4, n_eff=1.4, bob=list(bob), wardens=wardens,
    )


def toy_scenario(model="equal"):
    """Two PAs per guide on a two-guided-wavelength waveguide, three wardens."""
    from passcovert.system import Scenario

    lam_g = toy_geometry().guided_wavelength
    g = SystemGeometry.from_frequency(
        5e9, length=2 * lam_g, height=1.0, offset=0.4, n_eff=1.4, bob=[0.04, -0.3, 0.0],
        wardens=[[0.02, -1.0, 0.0], [0.06, 0.8, 0.0], [-0.5, 1.5, 0.0]],
    )
    noise = 10 ** (-11.4) * 1e-3
    return Scenario(g, 0.1, noise, noise, 2, 2, model)
