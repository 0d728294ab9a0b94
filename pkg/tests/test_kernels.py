"""The compiled kernels and the NumPy fallback must agree bit for bit."""
import importlib

import numpy as np
import pytest

from passcovert import _kernels
from passcovert._kernels import _fallback
from passcovert.fusion import majority_threshold
from passcovert.local_detect import profile_arrays

from conftest import random_profiles

try:
    core = importlib.import_module("passcovert._kernels._core")
except ImportError:  # pragma: no cover - only when the extension was not built
    core = None

needs_core = pytest.mark.skipif(core is None, reason="compiled extension not built")


def test_backend_reported():
    assert _kernels.BACKEND in ("cython", "python")
    if core is not None:
        assert _kernels.BACKEND == "cython" or _kernels._impl is _fallback


@needs_core
def test_esp_and_pmf_identical(rng):
    for M in range(0, 15):
        x = rng.random(M)
        assert np.array_equal(core.esp(x), _fallback.esp(x))
        assert np.array_equal(core.poibin_pmf(x), _fallback.poibin_pmf(x))


@needs_core
def test_dep_components_identical(rng):
    for M in (1, 2, 5, 8):
        ws = random_profiles(rng, M)
        arrs = profile_arrays(ws)
        taus = np.linspace(0, max(w.alpha3 for w in ws) * 1.1, 333)
        T = majority_threshold(M)
        a = core.dep_components(taus, *arrs, T)
        b = _fallback.dep_components(taus, *arrs, T)
        assert np.array_equal(np.asarray(a[0]), np.asarray(b[0]))
        assert np.array_equal(np.asarray(a[1]), np.asarray(b[1]))


@needs_core
def test_min_dep_search_identical(rng):
    for _ in range(100):
        M = int(rng.integers(1, 9))
        arrs = profile_arrays(random_profiles(rng, M))
        a = core.min_dep_search(*arrs, majority_threshold(M), 32, 1e-6)
        b = _fallback.min_dep_search(*arrs, majority_threshold(M), 32, 1e-6)
        assert a == b
