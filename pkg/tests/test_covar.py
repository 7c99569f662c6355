import numpy as np
import pytest

from hawkesflock.copulas import CopulaSpec, sample
from hawkesflock.core import PricePath
from hawkesflock.covar import (CoVaRPair, ZeroPriceError, covar_pair, returns_from_path,
                               rolling_covar, simple_returns, var_level)
from hawkesflock.marginals import EmpiricalMarginal


class TestReturns:
    def test_constant_prices_zero_returns(self):
        np.testing.assert_array_equal(simple_returns([10.0, 10.0, 10.0]), [0.0, 0.0])

    def test_ten_percent(self):
        assert simple_returns([100.0, 110.0])[0] == pytest.approx(0.10)

    def test_scale_invariance(self):
        rng = np.random.default_rng(0)
        c = 50 * np.exp(np.cumsum(rng.normal(0, 0.01, 100)))
        np.testing.assert_allclose(simple_returns(2.0 * c), simple_returns(c), rtol=1e-12)

    def test_zero_price_rejected(self):
        with pytest.raises(ZeroPriceError):
            simple_returns([1.0, 0.0, 2.0])

    def test_path_sampling(self):
        path = PricePath(times=np.array([0.0, 0.5, 1.5, 2.5]),
                         c1=np.array([100.0, 110.0, 121.0, 133.1]),
                         c2=np.array([50.0, 50.0, 55.0, 55.0]),
                         horizon=3.0)
        r1, r2 = returns_from_path(path, dt=1.0)
        np.testing.assert_allclose(r1, [0.10, 0.10, 0.10])
        np.testing.assert_allclose(r2, [0.0, 0.10, 0.0])


@pytest.fixture(scope="module")
def gaussian_marginal():
    rng = np.random.default_rng(1)
    return EmpiricalMarginal(rng.normal(0.0, 0.02, 4000))


class TestCovarPair:
    def test_independence_collapses_to_var(self, gaussian_marginal):
        pair = covar_pair(CopulaSpec("gaussian", 0.0), gaussian_marginal, 0.05, 0.05)
        var = var_level(gaussian_marginal, 0.05)
        assert abs(pair.covar - var) <= 1e-9
        assert abs(pair.delta) <= 1e-9
        assert abs(pair.u_distress - 0.05) <= 1e-9
        assert abs(pair.u_median - 0.05) <= 1e-9

    def test_clayton_generator_route(self, gaussian_marginal):
        spec = CopulaSpec("clayton", 2.0)
        pair = covar_pair(spec, gaussian_marginal, 0.05, 0.05)
        psi = lambda t: (t ** -2.0 - 1.0) / 2.0
        u_expected = (1.0 + 2.0 * (psi(0.0025) - psi(0.05))) ** -0.5
        assert pair.u_distress == pytest.approx(u_expected, abs=1e-12)
        assert pair.covar == pytest.approx(float(gaussian_marginal.quantile(u_expected)))

    def test_distress_tightens_quantile_for_positive_dependence(self, gaussian_marginal):
        var = var_level(gaussian_marginal, 0.05)
        last_u = 0.05
        for theta in (0.1, 0.3, 0.5, 0.7, 0.9):
            pair = covar_pair(CopulaSpec("t", theta, nu=5.0), gaussian_marginal, 0.05, 0.05)
            assert abs(pair.covar) >= abs(var)
            assert pair.u_distress < last_u  # stronger dependence digs deeper
            last_u = pair.u_distress

    def test_delta_is_exact_difference(self, gaussian_marginal):
        pair = covar_pair(CopulaSpec("gumbel", 2.0), gaussian_marginal, 0.05, 0.05)
        assert pair.delta == pair.covar - pair.covar_median


class TestRolling:
    def make_returns(self, n, theta=0.6, seed=3):
        rng = np.random.default_rng(seed)
        u, v = sample(CopulaSpec("gaussian", theta), n, rng)
        # normal marginals at daily-return scale
        from scipy import stats
        return 0.015 * stats.norm.ppf(u), 0.012 * stats.norm.ppf(v)

    def test_full_length_window_matches_direct(self):
        r1, r2 = self.make_returns(300)
        series = rolling_covar(r1, r2, window=300, families=("gaussian",))
        assert len(series) == 1
        m1 = EmpiricalMarginal(r1)
        from hawkesflock.copulas import fit_copula
        from hawkesflock.marginals import pit
        u = EmpiricalMarginal(r1).pit(r1)
        v = EmpiricalMarginal(r2).pit(r2)
        spec = fit_copula(u, v, "gaussian").spec
        direct = covar_pair(spec, m1, 0.05, 0.05)
        assert series.covar12[0] == pytest.approx(direct.covar, rel=1e-12)
        assert series.dcovar12[0] == pytest.approx(direct.delta, rel=1e-12)

    def test_swap_symmetry(self):
        r1, r2 = self.make_returns(300)
        a = rolling_covar(r1, r2, window=300, families=("gaussian", "clayton"))
        b = rolling_covar(r2, r1, window=300, families=("gaussian", "clayton"))
        assert a.covar12[0] == pytest.approx(b.covar21[0], rel=1e-12)
        assert a.covar21[0] == pytest.approx(b.covar12[0], rel=1e-12)
        assert a.var1[0] == pytest.approx(b.var2[0], rel=1e-12)

    def test_constant_dependence_gives_flat_theta(self):
        r1, r2 = self.make_returns(420, theta=0.55, seed=4)
        series = rolling_covar(r1, r2, window=250, families=("gaussian",))
        assert len(series) == 420 - 250 + 1
        assert series.theta.std() < 0.05
        assert abs(series.theta.mean() - 0.55) < 0.08
        assert not series.skipped

    def test_window_longer_than_series_rejected(self):
        r1, r2 = self.make_returns(100)
        with pytest.raises(ValueError):
            rolling_covar(r1, r2, window=150)

    def test_csv_format(self, tmp_path):
        r1, r2 = self.make_returns(260)
        series = rolling_covar(r1, r2, window=250, families=("gaussian", "gumbel"))
        out = tmp_path / "covar.csv"
        series.to_csv(out)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == ("date,var1,var2,covar12,covar21,dcovar12,dcovar21,"
                            "family,theta,nu,aic,bic")
        assert len(lines) == len(series) + 1
