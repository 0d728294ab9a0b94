import numpy as np
import pytest

from passcovert.errors import ParamOutOfRange, TooManyWardens
from passcovert.fusion import dep_components, dep_exact, majority_threshold
from passcovert.local_detect import make_profile, p_fa, p_md
from passcovert.mc_oracle import McConfig, enum_fusion, mc_local, mc_system_dep, stream

from conftest import random_profiles


def test_config_validation():
    with pytest.raises(ParamOutOfRange):
        McConfig(trials=0)
    with pytest.raises(ParamOutOfRange):
        McConfig(jamming_mode="other")


def test_philox_streams_are_keyed():
    a = stream(5, 0).random(4)
    assert np.array_equal(a, np.random.Generator(np.random.Philox(key=[5, 0])).random(4))
    assert not np.array_equal(a, stream(5, 1).random(4))


def test_local_trivial_thresholds():
    w = make_profile(1.0, 1.0, 1.0, 0.5, 2.0)
    fa, _, _ = mc_local(w, 0.0, McConfig(1000))
    _, md, _ = mc_local(w, 1e9, McConfig(1000))
    assert fa == 1.0 and md == 1.0


def test_local_half_example():
    w = make_profile(A_C=1.0, A_J=1.0, sigma_w_sq=1.0, P_C=0.5, P_J_max=2.0)
    fa, md, (se, _) = mc_local(w, 2.0, McConfig(10**6, rng_seed=11))
    assert abs(fa - 0.5) <= 3 * np.sqrt(0.25 / 10**6)
    assert abs(md - p_md(2.0, w)) <= 4 * np.sqrt(p_md(2.0, w) * (1 - p_md(2.0, w)) / 10**6)


def test_system_matches_exact(rng):
    for M in (1, 3, 5, 8):
        ws = random_profiles(rng, M)
        for tau in rng.uniform(1.2, 3.0, 3):
            fa, md = dep_components(tau, ws)
            se = np.sqrt((fa * (1 - fa) + md * (1 - md)) / 200_000)
            est, _ = mc_system_dep(ws, tau, McConfig(200_000, rng_seed=M))
            assert abs(est - (fa + md)) <= 4 * se + 1e-12


def test_shared_equals_independent_for_one_warden(rng):
    w = random_profiles(rng, 1)
    a = mc_system_dep(w, 1.7, McConfig(50_000, 3, "independent"))
    b = mc_system_dep(w, 1.7, McConfig(50_000, 3, "shared"))
    # both modes draw one uniform per trial from a single stream; the streams differ, the law does not
    se = np.sqrt(2 * 0.25 / 50_000)
    assert abs(a[0] - b[0]) <= 6 * se


def test_deterministic():
    ws = [make_profile(1.0, 1.0, 1.0, 0.5, 2.0)] * 3
    cfg = McConfig(10_000, 9, finite_n=50)
    assert mc_system_dep(ws, 2.0, cfg) == mc_system_dep(ws, 2.0, cfg)


def test_finite_n_converges_to_ideal():
    w = make_profile(1.0, 1.0, 1.0, 0.5, 2.0)
    big = mc_local(w, 2.0, McConfig(200_000, 1, finite_n=100_000))[0]
    assert abs(big - p_fa(2.0, w)) < 0.01


def test_enum_trivial():
    assert enum_fusion([0.3], [0.6], 1) == pytest.approx((0.3, 0.6))
    assert enum_fusion([0.0, 0.0, 0.0], [0.2, 0.5, 0.1], 2)[0] == 0.0
    with pytest.raises(TooManyWardens):
        enum_fusion(np.zeros(21), np.zeros(21), 11)


def test_enum_matches_dep_exact(rng):
    ws = random_profiles(rng, 10)
    for tau in rng.uniform(1.0, 3.0, 5):
        ref = enum_fusion([p_fa(tau, w) for w in ws], [p_md(tau, w) for w in ws], majority_threshold(10))
        got = dep_components(tau, ws)
        assert got[0] == pytest.approx(ref[0], abs=1e-12) and got[1] == pytest.approx(ref[1], abs=1e-12)
        assert dep_exact(tau, ws) == pytest.approx(sum(ref), abs=1e-12)
