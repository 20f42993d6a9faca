import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from misreport_bsl.epidemic import EpidemicCurve, affected_at, innovation_mean
from misreport_bsl.errors import EpidemicOverflow, ParameterError

from oracles import logistic


def curve(m=np.log(1000), k=0.2, A0=10.0, T=60, **kw):
    return EpidemicCurve(m=m, k=k, A0=A0, T=T, **kw)


def test_value_at_zero_is_A0():
    c = curve(A0=3.7)
    assert affected_at(c, 0) == 3.7
    assert c.affected()[0] == 3.7


def test_flat_curve():
    c = curve(k=0.0)
    assert all(affected_at(c, t) == 10.0 for t in range(61))
    assert np.all(c.innovation_means() == 0)


def test_reference_point():
    c = curve()
    expected = float(logistic(1000, 10, 0.2, 10))
    assert affected_at(c, 10) == pytest.approx(expected, rel=1e-10)


def test_first_innovation_is_definition():
    c = curve()
    assert innovation_mean(c, 1) == affected_at(c, 1) - 10.0


def test_telescoping():
    c = curve(T=80)
    mu = c.innovation_means()
    assert mu.sum() == pytest.approx(affected_at(c, 80) - 10.0, rel=1e-9)
    assert np.all(mu >= 0)


def test_vectorised_matches_scalar():
    c1 = np.r_[np.zeros(20), np.ones(20), np.zeros(20)]
    c = curve(beta1=-0.7, beta2=0.3, c1=c1, c2=np.r_[np.zeros(40), np.ones(20)])
    A = c.affected()
    assert all(A[t] == affected_at(c, t) for t in range(61))
    assert all(c.innovation_means()[t - 1] == innovation_mean(c, t) for t in range(1, 61))


def test_limit_is_capacity():
    c = curve(k=0.5, T=200)
    M = 1000.0
    assert abs(affected_at(c, 200) - M) < 1e-6 * M


def test_large_exponent_uses_stable_form():
    c = curve(k=30.0, T=100)  # kt up to 3000 overflows e^{kt}
    assert affected_at(c, 100) == pytest.approx(1000.0, rel=1e-12)
    assert np.all(np.isfinite(c.affected()))


def test_overflow_error():
    with pytest.raises(EpidemicOverflow, match="epidemic curve overflow"):
        curve(m=800.0).affected()


def test_invalid_inputs():
    with pytest.raises(ParameterError):
        curve(A0=0.0)
    with pytest.raises(ParameterError):
        EpidemicCurve(m=1.0, k=0.1, A0=1.0, c1=[0, 2, 1])
    with pytest.raises(ParameterError):
        EpidemicCurve(m=1.0, k=0.1, A0=1.0, T=5, c1=[0, 1, 1])
    with pytest.raises(ParameterError):
        affected_at(curve(T=5), 6)


@settings(max_examples=200, deadline=None)
@given(
    m=st.floats(-3, 12),
    k=st.floats(1e-3, 3),
    A0=st.floats(1e-2, 1e3),
    t=st.integers(0, 60),
)
def test_matches_extended_precision(m, k, A0, t):
    c = curve(m=m, k=k, A0=A0)
    got = affected_at(c, t)
    assert got == pytest.approx(float(logistic(np.exp(m), A0, k, t)), rel=1e-10)
    M = np.exp(m)
    assert 0 < got <= max(A0, M) * (1 + 1e-12)


@settings(max_examples=100, deadline=None)
@given(m=st.floats(0, 10), k=st.floats(1e-3, 2), A0=st.floats(1e-2, 10), T=st.integers(1, 120))
def test_properties(m, k, A0, T):
    c = curve(m=m, k=k, A0=A0, T=T)
    A = c.affected()
    mu = c.innovation_means()
    assert mu.sum() == pytest.approx(A[-1] - A[0], rel=1e-9, abs=1e-9 * max(A0, np.exp(m)))
    if A0 <= np.exp(m):
        assert np.all(np.diff(A) >= -1e-12 * np.exp(m))
    # no covariate effects: the calendar is irrelevant
    other = curve(m=m, k=k, A0=A0, T=T, c1=np.ones(T), c2=np.arange(T) % 2)
    assert np.array_equal(other.affected(), A)
