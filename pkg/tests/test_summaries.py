import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from misreport_bsl.errors import DegenerateSeries, ParameterError
from misreport_bsl.summaries import summarize, summarize_batch

from oracles import summary

series = arrays(
    np.float64,
    st.integers(8, 50),
    elements=st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False),
).filter(lambda y: np.ptp(y) > 1e-3 * max(1.0, np.max(np.abs(y))))


def test_ramp():
    s = summarize(np.arange(1, 9))
    ref = [float(v) for v in summary(range(1, 9))]
    assert s.mean == 4.5
    assert s.sd == pytest.approx(2.449489742783178, rel=1e-14)
    assert s.as_array() == pytest.approx(ref, rel=1e-12)


def test_constant_series():
    with pytest.raises(DegenerateSeries, match="zero variance"):
        summarize(np.full(10, 3.0))
    row = summarize_batch(np.full((1, 10), 3.0))[0]
    assert row[1] == 0 and np.all(np.isnan(row[2:]))


def test_too_short():
    with pytest.raises(ParameterError):
        summarize(np.arange(7.0))


@settings(max_examples=150, deadline=None)
@given(series)
def test_brute_force(y):
    ref = [float(v) for v in summary(y)]
    got = summarize(y).as_array()
    assert got[1:] == pytest.approx(ref[1:], rel=1e-10, abs=1e-12)
    assert got[0] == pytest.approx(ref[0], rel=1e-10, abs=1e-9)
    assert np.all(np.abs(got[2:]) <= 1 + 1e-12)


@settings(max_examples=100, deadline=None)
@given(series, st.floats(-100, 100))
def test_shift(y, c):
    a, b = summarize(y), summarize(y + c)
    scale = np.max(np.abs(y)) + abs(c)
    assert b.mean == pytest.approx(a.mean + c, abs=1e-9 * scale)
    assert b.sd == pytest.approx(a.sd, rel=1e-8)
    assert [b.rho1, b.rho2, b.rho3] == pytest.approx([a.rho1, a.rho2, a.rho3], abs=1e-8)


@settings(max_examples=100, deadline=None)
@given(series, st.floats(1e-2, 1e2))
def test_scale(y, c):
    a, b = summarize(y), summarize(c * y)
    assert b.mean == pytest.approx(c * a.mean, rel=1e-10, abs=1e-9 * c * np.max(np.abs(y)))
    assert b.sd == pytest.approx(c * a.sd, rel=1e-10)
    assert [b.rho1, b.rho2, b.rho3] == pytest.approx([a.rho1, a.rho2, a.rho3], abs=1e-10)


def test_batch_rows_match_single():
    Y = np.random.default_rng(0).normal(size=(5, 30))
    B = summarize_batch(Y)
    for row, y in zip(B, Y):
        assert np.array_equal(row, summarize(y).as_array())
