import numpy as np
import pytest

from passcovert.errors import DegenerateJamming, HeterogeneousSlope, SelectorInvalid
from passcovert.fusion import dep_exact, esp
from passcovert.local_detect import make_profile
from passcovert.piecewise_dep import (DepCurve, build_breakpoints, candidate_grid, dep_gradient, dep_piecewise,
                                      index_functions, min_dep_threshold, normalized_constants, ordering_case,
                                      psi_poly)

from conftest import random_profiles


def homogeneous(M, case, rng, boundary=False, span=1.0, sigma=1.0):
    """Common span; 'A2first' keeps some P_C A_C below the span, 'A1first' puts all above.
    ``boundary`` adds a warden with A_C = 0 so alpha1_max == alpha3_min."""
    if case == "A2first":
        cov = rng.uniform(0.1, 0.9, M) * span
    else:
        cov = rng.uniform(1.1, 2.5, M) * span
    if boundary:
        cov[0] = 0.0
    return [make_profile(c, span, sigma, 1.0, 1.0) for c in cov]


def taus_for(profiles, n=500):
    bp = np.concatenate([[w.alpha1, w.alpha2, w.alpha3, w.sigma_w_sq] for w in profiles])
    lo, hi = 0.5 * min(bp), 1.1 * max(bp)
    return np.union1d(np.linspace(lo, hi, n - len(bp)), bp)


@pytest.mark.parametrize("M", [1, 2, 3, 5, 8])
@pytest.mark.parametrize("case", ["A2first", "A1first"])
@pytest.mark.parametrize("boundary", [False, True])
def test_piecewise_equals_exact(M, case, boundary, rng):
    ws = homogeneous(M, case, rng, boundary)
    assert ordering_case(ws) == ("A2first" if boundary else case)
    taus = taus_for(ws)
    diff = np.abs(dep_piecewise(taus, ws) - dep_exact(taus, ws))
    assert diff.max() <= 1e-9


def test_heterogeneous_rejected(rng):
    ws = random_profiles(rng, 3)
    with pytest.raises(HeterogeneousSlope):
        dep_piecewise(1.0, ws)


def test_case_b_needs_boundary(rng):
    # with a common span alpha1_max <= alpha3_min always; equality only when some P_C A_C = 0
    for _ in range(50):
        ws = homogeneous(5, "A2first", rng)
        e = build_breakpoints(ws).extrema()
        assert e["a1max"] <= e["a3min"]
    e = build_breakpoints(homogeneous(5, "A2first", rng, boundary=True)).extrema()
    assert e["a1max"] == e["a3min"]


def test_index_functions():
    ws = [make_profile(c, 1.0, 1.0, 1.0, 1.0) for c in (0.5, 1.5)]
    t = build_breakpoints(ws)
    assert index_functions(0.9, t) == (0, 0, 0)
    assert index_functions(1.5, t) == (0, 1, 0)
    assert index_functions(2.0, t) == (2, 1, 0)
    assert index_functions(3.6, t) == (2, 2, 2)


def test_psi_is_shifted_esp(rng):
    ws = homogeneous(4, "A2first", rng)
    consts = normalized_constants(ws)
    tau = 1.3
    direct = esp(consts.a - consts.slope * tau)
    for x in range(5):
        assert psi_poly(tau, x, "M", consts, ws) == pytest.approx(direct[x], abs=1e-12)
    with pytest.raises(SelectorInvalid):
        psi_poly(tau, 1, "Q", consts, ws)


def test_degenerate_breakpoints():
    with pytest.raises(DegenerateJamming):
        build_breakpoints([make_profile(1.0, 0.0, 1.0, 1.0, 1.0, allow_degenerate=True)])


def test_min_threshold_against_dense_scan(rng):
    for M in (1, 3, 5, 8):
        ws = random_profiles(rng, M)
        tau, g, curve = min_dep_threshold(ws)
        dense = np.union1d(np.linspace(0.5, max(w.alpha3 for w in ws) * 1.05, 200001), curve.breakpoints)
        scan = dep_exact(dense, ws).min()
        assert g <= scan + 1e-12
        assert g == pytest.approx(dep_exact(tau, ws), abs=1e-15)
        assert g >= scan - 1e-6


def test_candidate_grid_contains_breakpoints(rng):
    ws = random_profiles(rng, 4)
    grid = candidate_grid(ws, 8)
    for w in ws:
        for b in (w.alpha1, w.alpha2, w.alpha3):
            assert b in grid


def test_curve_csv_roundtrip(rng):
    _, _, curve = min_dep_threshold(random_profiles(rng, 3), 16)
    back = DepCurve.from_csv(curve.to_csv())
    assert np.array_equal(back.taus, curve.taus) and np.array_equal(back.values, curve.values)
    assert back.tau_star == curve.tau_star and back.g_star == curve.g_star


def test_dep_gradient_zero_for_unused_variable(rng):
    base = random_profiles(rng, 3)

    def fn(x):
        return [make_profile(w.A_C, w.A_J, w.sigma_w_sq, x[0], w.P_J_max) for w in base]

    tau, _, _ = min_dep_threshold(fn(np.array([base[0].P_C, 0.3])))
    grad = dep_gradient(fn, np.array([base[0].P_C, 0.3]), tau)
    assert grad[1] == 0.0


def test_dep_gradient_matches_slope_on_linear_piece():
    # one warden, tau strictly inside the miss-detection ramp and past alpha1: dep = (tau - alpha2) / span
    def fn(x):
        return [make_profile(1.0, 1.0, 1.0, x[0], 2.0)]

    tau = 3.2  # alpha1 = 3, alpha2 = 1 + P_C
    g = dep_gradient(fn, np.array([0.5]), tau)
    assert g[0] == pytest.approx(-0.5, rel=1e-7)
