import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from passcovert.errors import ParamOutOfRange
from passcovert.radiation import (RadiationSpec, fractions_equal, fractions_general, fractions_proportional,
                                  residual_power)


def _general_loop(delta):
    # direct power bookkeeping: each PA taps delta^2 of what is still in the guide
    left, out = 1.0, []
    for d in delta:
        out.append(d * d * left)
        left -= d * d * left
    return np.array(out)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.01, 0.99), min_size=1, max_size=12))
def test_general_matches_power_bookkeeping(delta):
    rho = fractions_general(delta)
    np.testing.assert_allclose(rho, _general_loop(delta), rtol=1e-12, atol=1e-300)
    assert rho.sum() <= 1.0 + 1e-12


def test_proportional_is_general_with_equal_taps():
    d2 = 0.3
    np.testing.assert_allclose(fractions_proportional(d2, 5), fractions_general([np.sqrt(d2)] * 5), rtol=1e-14)


def test_proportional_closed_form_sum():
    d2, n = 0.2, 6
    assert fractions_proportional(d2, n).sum() == pytest.approx(1 - (1 - d2) ** n, rel=1e-14)
    assert residual_power(fractions_proportional(d2, n)) == pytest.approx((1 - d2) ** n, rel=1e-12)


def test_equal_bounds():
    np.testing.assert_array_equal(fractions_equal(0.25, 4), [0.25] * 4)
    with pytest.raises(ParamOutOfRange):
        fractions_equal(0.26, 4)
    with pytest.raises(ParamOutOfRange):
        fractions_equal(0.0, 4)


@pytest.mark.parametrize("bad", [[0.0], [1.0], [0.5, 1.2]])
def test_general_range(bad):
    with pytest.raises(ParamOutOfRange):
        fractions_general(bad)


@pytest.mark.parametrize("model", ["general", "proportional", "equal"])
def test_spec_defaults_are_valid(model):
    spec = RadiationSpec.default(model, 4)
    rho = spec.fractions()
    assert len(rho) == 4 and np.all(rho > 0) and rho.sum() <= 1 + 1e-12
    assert RadiationSpec(**{"n": 4, **spec.to_dict()}) == spec


def test_spec_rejects_unknown_model():
    with pytest.raises(ParamOutOfRange):
        RadiationSpec("uniform", 3, rho=0.1)
