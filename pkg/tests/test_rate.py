import math

import numpy as np
import pytest
from scipy import integrate

from passcovert.errors import ParamOutOfRange
from passcovert.rate import (LinkBudget, avg_covert_rate, gauss_legendre, make_rule, mm_rate_surrogate, sinr,
                             tanh_sinh)


@pytest.mark.parametrize("n", [1, 2, 5, 16, 32, 64])
def test_nodes_match_numpy(n):
    rule = gauss_legendre(n)
    x, w = np.polynomial.legendre.leggauss(n)
    np.testing.assert_allclose(rule.nodes, 0.5 * (x + 1), atol=1e-15)
    np.testing.assert_allclose(rule.weights, 0.5 * w, atol=1e-15)


def test_exact_for_polynomials():
    rule = gauss_legendre(32)
    for k in range(0, 64, 7):
        assert rule.weights @ rule.nodes**k == pytest.approx(1.0 / (k + 1), rel=1e-13)


def test_bad_order():
    with pytest.raises(ParamOutOfRange):
        gauss_legendre(0)
    with pytest.raises(ParamOutOfRange):
        tanh_sinh(0)
    with pytest.raises(ParamOutOfRange):
        make_rule("simpson", 32)


def test_tanh_sinh_shape():
    rule = tanh_sinh(32)
    assert np.all(rule.weights > 0) and rule.weights.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.all((rule.nodes > 0) & (rule.nodes < 1)) and np.all(np.diff(rule.nodes) > 0)
    assert rule.nodes[0] < 1e-12  # reaches far enough to resolve sigma^2 / I down to ~1e-12
    np.testing.assert_allclose(rule.nodes + rule.nodes[::-1], 1.0, atol=1e-15)


def _adaptive_rate(b):
    f = lambda x: math.log2(1 + b.S / (x * b.I + b.sigma_b_sq))
    d = b.sigma_b_sq / b.I
    pts = [p for p in (d, 10 * d, 100 * d, 1e3 * d, 1e4 * d) if p < 1]
    return integrate.quad(f, 0, 1, epsabs=1e-14, epsrel=1e-13, limit=500, points=pts)[0]


def test_default_rule_at_large_interference(rng):
    # I / sigma^2 from 1 to 1e8: the log singularity at xi = -sigma^2 / I hugs the interval
    s2 = 4e-15
    for _ in range(40):
        b = LinkBudget(10 ** rng.uniform(-14, -8), s2 * 10 ** rng.uniform(0, 8), s2)
        assert avg_covert_rate(b) == pytest.approx(_adaptive_rate(b), abs=1e-7)
        assert avg_covert_rate(b, tanh_sinh(64)) == pytest.approx(avg_covert_rate(b), abs=1e-7)


def test_rate_against_adaptive_quadrature(rng):
    for _ in range(10):
        b = LinkBudget(10 ** rng.uniform(-2, 2), 10 ** rng.uniform(-2, 2), 1.0)
        ref = _adaptive_rate(b)
        assert avg_covert_rate(b) == pytest.approx(ref, abs=1e-9)
        # I / sigma^2 up to 1e2 puts a log singularity near xi = 0; Gauss-Legendre keeps ~1e-6 relative
        assert avg_covert_rate(b, gauss_legendre(32)) == pytest.approx(ref, rel=1e-5)


def test_no_interference_exact():
    b = LinkBudget(3.7, 0.0, 0.9)
    assert avg_covert_rate(b) == math.log2(1 + 3.7 / 0.9)


def test_monotonicity(rng):
    base = LinkBudget(2.0, 3.0, 1.0)
    r0 = avg_covert_rate(base)
    assert avg_covert_rate(LinkBudget(2.5, 3.0, 1.0)) > r0
    assert avg_covert_rate(LinkBudget(2.0, 3.5, 1.0)) < r0


def test_sinr():
    assert sinr(LinkBudget(2.0, 4.0, 1.0), 0.5) == pytest.approx(2.0 / 3.0)


def test_budget_validation():
    with pytest.raises(ParamOutOfRange):
        LinkBudget(-1.0, 0.0, 1.0)


def test_surrogate_properties(rng):
    for _ in range(50):
        anchor = LinkBudget(10 ** rng.uniform(-3, 1), 10 ** rng.uniform(-3, 1), 10 ** rng.uniform(-2, 0))
        val, dS, dI = mm_rate_surrogate(anchor, anchor)
        assert abs(val - avg_covert_rate(anchor)) <= 1e-12
        for _ in range(20):
            b = LinkBudget(10 ** rng.uniform(-3, 1), 10 ** rng.uniform(-3, 1), anchor.sigma_b_sq)
            assert mm_rate_surrogate(b, anchor)[0] <= avg_covert_rate(b) + 1e-12


def test_surrogate_concave_along_segments(rng):
    anchor = LinkBudget(1.0, 2.0, 0.5)
    for _ in range(100):
        p = LinkBudget(*rng.uniform(0, 3, 2), 0.5)
        q = LinkBudget(*rng.uniform(0, 3, 2), 0.5)
        mid = LinkBudget((p.S + q.S) / 2, (p.I + q.I) / 2, 0.5)
        f = lambda b: mm_rate_surrogate(b, anchor)[0]
        assert f(mid) >= 0.5 * (f(p) + f(q)) - 1e-12
