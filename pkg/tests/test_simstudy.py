import numpy as np
import pytest

from misreport_bsl.bsl import MCMCSettings
from misreport_bsl.errors import ParameterError
from misreport_bsl.latent import Kind
from misreport_bsl.simstudy import (
    REPORT_COLUMNS,
    CellResult,
    StudyConfig,
    aggregate,
    report_csv,
    report_text,
    run_study,
    simulate_observed,
)


def result(bias, lower, upper, truth=0.5, failed=False, rep=0):
    r = CellResult("AR1", 0, rep, {"omega": truth}, failed=failed)
    if not failed:
        med = truth + bias
        r.metrics["omega"] = {"bias": bias, "abs_bias": abs(bias), "interval_length": upper - lower,
                              "covered": float(lower <= truth <= upper)}
        assert lower <= med <= upper
    return r


def test_single_result():
    (row,) = aggregate([result(0.05, 0.4, 0.7)])
    assert (row.bias, row.ail, row.coverage, row.n, row.failed) == pytest.approx((0.05, 0.3, 100.0, 1, 0))


def test_two_results_average():
    (row,) = aggregate([result(0.05, 0.4, 0.7), result(-0.25, 0.2, 0.3, rep=1)])
    assert row.bias == pytest.approx(-0.1)
    assert row.abs_bias == pytest.approx(0.15)
    assert row.ail == pytest.approx(0.2)
    assert row.coverage == 50.0


def test_failures_counted_not_averaged():
    (row,) = aggregate([result(0.1, 0.3, 0.9), result(0, 0, 0, failed=True, rep=1)])
    assert row.n == 1 and row.failed == 1 and row.coverage == 100.0
    (row,) = aggregate([result(0, 0, 0, failed=True)])
    assert row.parameter == "-" and row.failed == 1
    with pytest.raises(ParameterError):
        aggregate([])


def test_report_shapes():
    rows = aggregate([result(0.05, 0.4, 0.7)])
    csv = report_csv(rows).splitlines()
    assert csv[0] == ",".join(REPORT_COLUMNS)
    assert csv[1] == "AR1,omega,0.050000,0.050000,0.300000,100.00,1,0"
    assert "100.00%" in report_text(rows)


def test_cells_latin_hypercube():
    c = StudyConfig(structures=("ARMA11",), n_cells=6)
    cells = c.cells(Kind.ARMA11)
    assert len(cells) == 6
    for name in ("alpha", "theta", "omega", "q"):
        counts = np.unique([cell[name] for cell in cells], return_counts=True)[1]
        assert counts.tolist() == [2, 2, 2]
    assert cells == StudyConfig(structures=("ARMA11",), n_cells=6).cells(Kind.ARMA11)
    assert len(StudyConfig(n_cells=None).cells(Kind.AR1)) == 27


def test_simulated_data_reproducible():
    t = StudyConfig().truth(Kind.AR1, {"alpha": 0.5, "omega": 0.7, "q": 0.3})
    x1, y1 = simulate_observed("AR1", t, 200, 0.1, None, 5)
    x2, y2 = simulate_observed("AR1", t, 200, 0.1, None, 5)
    assert np.array_equal(y1, y2) and np.array_equal(x1, x2)
    assert np.all((y1 == x1) | np.isclose(y1, 0.3 * x1))


def tiny(**kw):
    base = dict(T=120, replicates=2, n_cells=2,
                sampler=MCMCSettings(n_iter=80, n_burn=30, n_sim=20, n_init=5, n_optim=40, n_starts=1))
    base.update(kw)
    return StudyConfig(**base)


def test_conservation_and_determinism():
    # omega = 0.3 lies outside the prior box, so those cells fail
    cfg = tiny(grid={"omega": (0.3, 0.7), "alpha": (0.5,), "q": (0.5,)},
               priors={"m": (-1, 3), "k": (0.01, 2), "omega": (0.5, 1.0)})
    res = run_study(cfg)
    assert len(res) == 4
    assert sum(r.failed for r in res) == 2
    rows = aggregate(res)
    assert all(row.n + row.failed == 4 for row in rows)
    again = run_study(cfg, threads=2)
    assert report_csv(aggregate(again)) == report_csv(rows)
    assert [r.metrics for r in again] == [r.metrics for r in res]
