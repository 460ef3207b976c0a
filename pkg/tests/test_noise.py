import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crelab.exceptions import DomainError
from crelab.noise import (
    Degenerate,
    DiscreteSign,
    Scaled,
    SplitUniform,
    TwoPointSkew,
    TwoPointSym,
    Uniform,
    uniform_with_variance,
)
from crelab.rng import rng_derive


@given(st.floats(0.01, 5.0), st.floats(0.01, 0.99))
def test_two_point_skew_mean_zero(a, w):
    law = TwoPointSkew(a, w)
    assert law.expect(lambda t: t) == pytest.approx(0.0, abs=1e-12 * max(1.0, a / w))


@given(st.floats(0.01, 5.0))
def test_two_point_sym(c):
    law = TwoPointSym(c)
    assert law.mean == 0 and law.symmetric
    assert law.variance == pytest.approx(c * c)


def test_discrete_sign_atoms():
    assert sorted(DiscreteSign().atoms) == [(-1.0, 0.5), (1.0, 0.5)]


@given(st.floats(0.1, 4.0), st.floats(0.1, 3.0))
def test_scaled_law(c, k):
    base = Uniform(-c, c)
    law = Scaled(base, k)
    assert law.support == pytest.approx((-k * c, k * c))
    assert law.variance == pytest.approx(k * k * base.variance)
    s = rng_derive(1, 2)
    np.testing.assert_allclose(law.sample(s, 50), k * base.sample(s, 50))


def test_scaled_rejects_nonpositive():
    with pytest.raises(DomainError):
        Scaled(Uniform(-1, 1), 0.0)


def test_split_uniform_median_and_asymmetry():
    law = SplitUniform(0.3, 1.0, 0.4)
    assert law.median == 0.3 and law.cdf(0.3) == pytest.approx(0.5)
    assert not law.symmetric
    assert SplitUniform(0.0, 1.0, 1.0).symmetric


def test_uniform_with_variance():
    law = uniform_with_variance(0.5)
    assert law.variance == pytest.approx(0.5)
    assert law.support == pytest.approx((-math.sqrt(1.5), math.sqrt(1.5)))


def test_degenerate_sample():
    assert np.all(Degenerate(2.5).sample(rng_derive(0), 10) == 2.5)


@pytest.mark.parametrize("law", [Uniform(-1, 2), SplitUniform(0, 1, 3), TwoPointSym(0.7), TwoPointSkew(0.2, 0.3)])
def test_sample_mean_matches_law(law):
    x = law.sample(rng_derive(5, 6), 200000)
    se = math.sqrt(law.variance / len(x))
    assert abs(x.mean() - law.mean) <= 4 * se
