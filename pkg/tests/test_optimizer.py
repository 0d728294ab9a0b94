import numpy as np
import pytest
from scipy.optimize import minimize
from sklearn.isotonic import IsotonicRegression

from passcovert.errors import InfeasibleGeometry, ParamOutOfRange
from passcovert.optimizer import (DesignSpace, OptimizerConfig, _danskin, coarse_to_fine_grid, design_acr, dykstra,
                                  feasible_init, grid_search_baseline, isotonic_nondecreasing, lattice_placements,
                                  max_covert_power, optimize, position_block_update, power_block_update,
                                  project_spacing, random_search_baseline)
from passcovert.piecewise_dep import min_dep_threshold
from passcovert.system import covertness, warden_profiles

from conftest import toy_scenario


def test_pav_matches_sklearn(rng):
    for n in (1, 2, 5, 30):
        y = rng.normal(size=n)
        ref = IsotonicRegression().fit_transform(np.arange(n), y)
        np.testing.assert_allclose(isotonic_nondecreasing(y), ref, atol=1e-12)


def test_spacing_projection_example():
    x = project_spacing([1.0, 0.5], 4.0, 0.1)
    assert x[1] - x[0] >= 0.1 - 1e-15 and 0 <= x[0] and x[1] <= 4
    assert np.array_equal(project_spacing(x, 4.0, 0.1), x)
    # dense-search nearest feasible point
    g = np.linspace(0, 4, 801)
    X1, X2 = np.meshgrid(g, g, indexing="ij")
    ok = X2 - X1 >= 0.1 - 1e-12
    d = (X1 - 1.0) ** 2 + (X2 - 0.5) ** 2
    d[~ok] = np.inf
    i = np.unravel_index(np.argmin(d), d.shape)
    assert np.hypot(x[0] - X1[i], x[1] - X2[i]) <= 2 * (g[1] - g[0])


def test_spacing_projection_is_nearest(rng):
    # compare with a generic constrained solver on random inputs
    L, dx = 3.0, 0.4
    for _ in range(20):
        y = rng.uniform(-1, 4, 4)
        cons = [{"type": "ineq", "fun": lambda x, i=i: x[i + 1] - x[i] - dx} for i in range(3)]
        ref = minimize(lambda x: np.sum((x - y) ** 2), np.linspace(0, L, 4), constraints=cons,
                       bounds=[(0, L)] * 4, method="SLSQP", options={"ftol": 1e-14, "maxiter": 500}).x
        got = project_spacing(y, L, dx)
        assert np.sum((got - y) ** 2) <= np.sum((ref - y) ** 2) + 1e-9
        assert np.all(np.diff(got) >= dx - 1e-12) and got[0] >= 0 and got[-1] <= L + 1e-12


def test_spacing_infeasible():
    with pytest.raises(InfeasibleGeometry):
        project_spacing([0, 1, 2], 0.5, 0.3)


def test_dykstra_box_and_halfspace():
    box = lambda u: np.clip(u, 0.0, 1.0)
    half = lambda u: u + max(0.0, 1.5 - u.sum()) / 2 * np.ones(2)
    x = dykstra(np.array([2.0, -1.0]), [half, box])
    # nearest point of [0,1]^2 with x1 + x2 >= 1.5 to (2, -1) is (1, 0.5)
    np.testing.assert_allclose(x, [1.0, 0.5], atol=1e-9)


def test_config_validation():
    with pytest.raises(ParamOutOfRange):
        OptimizerConfig(epsilon=1.0)
    with pytest.raises(ParamOutOfRange):
        OptimizerConfig(delta_in=0.0)


def test_feasible_init_is_covert():
    sc = toy_scenario()
    for start in range(3):
        d = feasible_init(sc, OptimizerConfig(epsilon=0.1), start=start)
        assert not d.violations(sc)
        assert covertness(d, sc)[1] >= 0.9


def test_max_covert_power_is_tight():
    sc = toy_scenario()
    cfg = OptimizerConfig(epsilon=0.1, screen_init=False)
    d = feasible_init(sc, cfg)
    pc = max_covert_power(sc, d, 0.1)
    assert covertness(d, sc)[1] >= 0.9
    bumped = type(d)(pc * (1 + 1e-6) + 1e-15, d.P_J_max, d.radiation_C, d.radiation_J, d.x_C, d.x_J)
    assert pc == sc.P_max - d.P_J_max or covertness(bumped, sc)[1] < 0.9


def test_k_max_zero_returns_init():
    sc = toy_scenario()
    cfg = OptimizerConfig(epsilon=0.1, K_max=0)
    d, trace = optimize(sc, cfg)
    init = feasible_init(sc, cfg)
    assert d == init and np.array_equal(d.x_C, init.x_C) and np.array_equal(d.x_J, init.x_J)
    assert trace.records == []


@pytest.mark.parametrize("model", ["equal", "proportional", "general"])
def test_trace_contract(model):
    sc = toy_scenario(model)
    cfg = OptimizerConfig(epsilon=0.1, K_max=6)
    d, trace = optimize(sc, cfg)
    sur = [r["surrogate"] for r in trace.records]
    acr = [r["acr"] for r in trace.records]
    assert all(b >= a for a, b in zip(sur, sur[1:]))
    assert all(b >= a for a, b in zip(acr, acr[1:]))
    assert all(r["g"] >= 0.9 - 1e-9 for r in trace.records)
    assert not d.violations(sc)
    _, g, _ = min_dep_threshold(warden_profiles(d, sc))
    assert g >= 0.9 - 1e-9
    assert design_acr(sc, d) >= design_acr(sc, feasible_init(sc, cfg)) - 1e-12


def test_vacuous_covertness_improves_rate():
    sc = toy_scenario()
    cfg = OptimizerConfig(epsilon=0.999, K_max=5, screen_init=False)
    d, _ = optimize(sc, cfg)
    assert design_acr(sc, d) >= design_acr(sc, feasible_init(sc, cfg))


def test_infinite_proximal_weight_freezes_positions():
    sc = toy_scenario()
    cfg = OptimizerConfig(epsilon=0.1, proximal_weight=1e300)
    space = DesignSpace(sc)
    v = space.pack(feasible_init(sc, cfg))
    anchor = _danskin(space, v, cfg)
    out, step, _ = position_block_update(space, v, anchor, cfg)
    assert step == 0.0 and np.array_equal(out, v)


def test_power_block_keeps_true_covertness():
    sc = toy_scenario()
    cfg = OptimizerConfig(epsilon=0.1, screen_init=False)
    space = DesignSpace(sc)
    v = space.pack(feasible_init(sc, cfg))
    anchor = _danskin(space, v, cfg)
    out, _, _ = power_block_update(space, v, anchor, cfg)
    assert space.covertness(out)[1] >= 0.9
    assert out[0] + out[1] <= 1.0 + 1e-12


def test_grid_refinement_never_decreases():
    sc = toy_scenario()
    rates = [coarse_to_fine_grid(sc, 0.1, n_centers=5, n_pitches=3, levels=k)[1] for k in (0, 1, 2)]
    assert rates[0] <= rates[1] <= rates[2]


def test_grid_is_exhaustive_over_its_points():
    sc = toy_scenario()
    pl = lattice_placements(sc.geom.length, 2, sc.geom.guided_wavelength / 4, sc.dx_min)
    d, r = grid_search_baseline(sc, 0.1, pl, pl)
    assert covertness(d, sc)[1] >= 0.9
    for x in pl[::5]:
        d2, r2 = grid_search_baseline(sc, 0.1, [x], [d.x_J])
        assert r2 <= r + 1e-12


def test_random_search_reproducible():
    sc = toy_scenario()
    a = random_search_baseline(sc, 0.1, trials=10, rng_seed=3)
    b = random_search_baseline(sc, 0.1, trials=10, rng_seed=3)
    assert a[0] == b[0] and a[2] == b[2]
    assert covertness(a[1], sc)[1] >= 0.9
