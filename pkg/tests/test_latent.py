import numpy as np
import pytest

from misreport_bsl.epidemic import EpidemicCurve
from misreport_bsl.errors import EmptySeries, ParameterError
from misreport_bsl.latent import LatentStructure, rerun, simulate_batch, simulate_latent
from misreport_bsl.rng import stream

N = 100_000


def acf(x, lags=3):
    d = x - x.mean()
    ss = d @ d
    return np.array([d[:-j] @ d[j:] / ss for j in range(1, lags + 1)])


def bartlett_se(rho_fn, n, lag=1, K=200):
    """Large-sample sd of the lag-``lag`` sample autocorrelation."""
    r = lambda k: 1.0 if k == 0 else rho_fn(abs(k))  # noqa: E731
    v = sum((r(k + lag) + r(k - lag) - 2 * r(lag) * r(k)) ** 2 for k in range(1, K))
    return np.sqrt(v / n)


def test_degenerate_noise_gives_zero_series():
    s = LatentStructure("AR1", phi0=0.0, alpha=0.0, sigma_eps=1e-300)
    x = simulate_latent(s, EpidemicCurve.flat(50), 50, 1).x
    assert np.max(np.abs(x)) < 1e-290


def test_ar1_stationary_mean():
    s = LatentStructure("AR1", phi0=5.0, alpha=0.5, sigma_eps=1.0)
    x = simulate_latent(s, EpidemicCurve.flat(N), N, 11).x
    se = np.sqrt(1 / (1 - 0.25)) * np.sqrt(1.5 / 0.5) / np.sqrt(N)
    assert abs(x.mean() - 10.0) < 3 * se


def test_ar1_with_constant_innovation_mean():
    # k = 0 gives mu = 0; a constant mu shifts the mean by mu / (1 - alpha)
    s = LatentStructure("AR1", phi0=1.0, alpha=0.6, sigma_eps=2.0)
    x, *_ = simulate_batch(s, np.full(N, 0.8), [stream(3)])
    se = 2.0 / np.sqrt(1 - 0.36) * np.sqrt(1.6 / 0.4) / np.sqrt(N)
    assert abs(x.mean() - 1.8 / 0.4) < 3 * se
    assert abs(acf(x[0])[0] - 0.6) < 3 * bartlett_se(lambda k: 0.6 ** k, N)


def test_ma1_lag_one_autocorrelation():
    s = LatentStructure("MA1", phi0=1.0, theta=0.5, sigma_eps=1.0)
    x = simulate_latent(s, EpidemicCurve.flat(N), N, 5).x
    rho1 = 0.5 / 1.25
    r = acf(x)
    assert abs(r[0] - rho1) < 3 * bartlett_se(lambda k: rho1 if k == 1 else 0.0, N)
    assert abs(r[1]) < 3 * bartlett_se(lambda k: rho1 if k == 1 else 0.0, N, lag=2)
    assert abs(x.mean() - 1.0) < 3 * 1.5 / np.sqrt(N)


def test_arma11_autocorrelation():
    a, t = 0.6, 0.3
    s = LatentStructure("ARMA11", phi0=0.5, alpha=a, theta=t, sigma_eps=1.0)
    x = simulate_latent(s, EpidemicCurve.flat(N), N, 9).x
    rho1 = (1 + a * t) * (a + t) / (1 + 2 * a * t + t * t)
    rho = lambda k: rho1 * a ** (k - 1)  # noqa: E731
    r = acf(x)
    for lag in (1, 2, 3):
        assert abs(r[lag - 1] - rho(lag)) < 3 * bartlett_se(rho, N, lag)
    var_mean = (1 + t) ** 2 / (1 - a) ** 2 / N
    assert abs(x.mean() - 0.5 / (1 - a)) < 3 * np.sqrt(var_mean)


def test_arch_mean_and_symmetry():
    s = LatentStructure("ARCH1", phi0=1.0, phi1=0.4, alpha0=1.0, alpha1=0.3, sigma_eps=0.5)
    r = simulate_latent(s, EpidemicCurve.flat(N), N, 4)
    # Z_t = X_t - phi0 - phi1 X_{t-1}
    z = r.x[1:] - 1.0 - 0.4 * r.x[:-1]
    assert abs(z.mean()) < 3 * z.std() / np.sqrt(N)
    # E[Z^2] = alpha0 / (1 - alpha1) up to the (rare) clamp at zero
    assert (z ** 2).mean() == pytest.approx(1.0 / 0.7, rel=0.03)


def test_innovations_centered_on_curve():
    curve = EpidemicCurve(m=np.log(500.0), k=0.3, A0=5.0, T=400)
    s = LatentStructure("MA1", phi0=0.0, theta=0.2, sigma_eps=0.1)
    r = simulate_latent(s, curve, 400, 8)
    resid = (r.innovations - curve.innovation_means()) / 0.1
    assert abs(resid.mean()) < 3 / np.sqrt(400)
    assert resid.std() == pytest.approx(1.0, abs=0.15)


@pytest.mark.parametrize("kind", ["ARCH1", "AR1", "MA1", "ARMA11"])
def test_reproducible_and_rerunnable(kind):
    s = LatentStructure(kind, phi0=0.3, phi1=0.5, alpha0=0.8, alpha1=0.4, alpha=-0.3, theta=0.7, sigma_eps=1.3)
    curve = EpidemicCurve(m=4.0, k=0.25, A0=1.0, T=300)
    a = simulate_latent(s, curve, 300, 123)
    b = simulate_latent(s, curve, 300, 123)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.innovations, b.innovations)
    assert np.array_equal(rerun(s, a), a.x)
    c = simulate_latent(s, curve, 300, 124)
    assert not np.array_equal(a.x, c.x)


def test_batch_rows_equal_single_runs():
    s = LatentStructure("ARMA11", phi0=1.0, alpha=0.5, theta=0.2, sigma_eps=1.0)
    mu = EpidemicCurve(m=3.0, k=0.2, A0=1.0, T=80).innovation_means()
    x, eps, _, _ = simulate_batch(s, mu, [stream(9, j) for j in range(4)])
    for j in range(4):
        xj, ej, _, _ = simulate_batch(s, mu, [stream(9, j)])
        assert np.array_equal(x[j], xj[0]) and np.array_equal(eps[j], ej[0])


def test_loop_oracle():
    """Plain Python recursion agrees with the filter implementation."""
    s = LatentStructure("ARMA11", phi0=0.7, alpha=0.4, theta=-0.6, sigma_eps=1.0)
    r = simulate_latent(s, EpidemicCurve.flat(200), 200, 77)
    x_prev, e_prev, _ = r.state0
    out = []
    for e in r.innovations:
        x_prev = 0.7 + 0.4 * x_prev + e + -0.6 * e_prev
        e_prev = e
        out.append(x_prev)
    assert r.x == pytest.approx(out, rel=1e-12, abs=1e-12)


def test_arch_loop_oracle():
    s = LatentStructure("ARCH1", phi0=0.2, phi1=0.3, alpha0=0.5, alpha1=0.6, sigma_eps=2.0)
    r = simulate_latent(s, EpidemicCurve.flat(300), 300, 5)
    x_prev, _, z2 = r.state0
    out = []
    for e, sg in zip(r.innovations, r.signs):
        z2 = 0.5 + 0.6 * z2 + e
        x_prev = 0.2 + 0.3 * x_prev + sg * np.sqrt(max(z2, 0.0))
        out.append(x_prev)
    assert r.x == pytest.approx(out, rel=1e-12, abs=1e-12)


def test_errors():
    s = LatentStructure("AR1", alpha=0.5)
    with pytest.raises(EmptySeries):
        simulate_latent(s, EpidemicCurve.flat(5), 0, 1)
    with pytest.raises(ParameterError):
        LatentStructure("AR1", alpha=1.0)
    with pytest.raises(ParameterError):
        LatentStructure("ARCH1", alpha1=1.2)
    with pytest.raises(ParameterError):
        LatentStructure("MA1", sigma_eps=0.0)
    # fields outside the relevance map are not checked
    LatentStructure("MA1", alpha=5.0, theta=0.5)
