import numpy as np
import pytest

from hawkesflock.copulas import (FAMILIES, CopulaSpec, c_alpha_inverse, cdf, fit_copula,
                                 generator, generator_inverse, h_function, h_inverse,
                                 log_density, sample, select_copula, tail_dependence)

SPECS = {
    "gaussian": CopulaSpec("gaussian", 0.55),
    "t": CopulaSpec("t", 0.45, nu=4.5),
    "gumbel": CopulaSpec("gumbel", 2.2),
    "clayton": CopulaSpec("clayton", 1.6),
}


class TestSpecValidation:
    def test_theta_ranges(self):
        with pytest.raises(ValueError):
            CopulaSpec("gaussian", 1.2)
        with pytest.raises(ValueError):
            CopulaSpec("gumbel", 0.8)
        with pytest.raises(ValueError):
            CopulaSpec("clayton", 0.0)
        with pytest.raises(ValueError):
            CopulaSpec("t", 0.5, nu=1.5)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            CopulaSpec("frank", 1.0)


class TestAxioms:
    @pytest.mark.parametrize("family", FAMILIES)
    def test_uniform_margins_and_grounding(self, family):
        spec = SPECS[family]
        rng = np.random.default_rng(11)
        u = rng.uniform(0.01, 0.99, 200)
        np.testing.assert_allclose(cdf(spec, u, np.ones_like(u)), u, atol=1e-12)
        np.testing.assert_allclose(cdf(spec, np.ones_like(u), u), u, atol=1e-12)
        assert np.all(cdf(spec, u, np.zeros_like(u)) == 0.0)
        assert np.all(cdf(spec, np.zeros_like(u), u) == 0.0)

    @pytest.mark.parametrize("family", FAMILIES)
    def test_rectangle_inequality(self, family):
        spec = SPECS[family]
        rng = np.random.default_rng(13)
        for _ in range(60):
            u1, u2 = np.sort(rng.uniform(0.02, 0.98, 2))
            v1, v2 = np.sort(rng.uniform(0.02, 0.98, 2))
            mass = (cdf(spec, u2, v2) - cdf(spec, u2, v1)
                    - cdf(spec, u1, v2) + cdf(spec, u1, v1))
            assert mass >= -1e-12


class TestHFunction:
    @pytest.mark.parametrize("family", FAMILIES)
    def test_matches_cdf_finite_difference(self, family):
        spec = SPECS[family]
        rng = np.random.default_rng(17)
        for _ in range(20):
            u = rng.uniform(0.05, 0.95)
            a = rng.uniform(0.05, 0.95)
            step = 1e-5
            fd = (cdf(spec, u, a + step) - cdf(spec, u, a - step)) / (2 * step)
            assert float(h_function(spec, u, a)) == pytest.approx(fd, abs=1e-6)

    def test_gaussian_independence_is_identity(self):
        spec = CopulaSpec("gaussian", 0.0)
        u = np.linspace(0.01, 0.99, 23)
        np.testing.assert_allclose(h_function(spec, u, 0.37), u, atol=1e-12)

    def test_clayton_boundary_value(self):
        # C(1, v) = v forces the conditional CDF to 1 at u = 1
        spec = SPECS["clayton"]
        th = spec.theta
        alpha = 0.3
        val = alpha ** (-th - 1.0) * (1.0 + alpha ** -th - 1.0) ** (-1.0 - 1.0 / th)
        assert val == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("family", FAMILIES)
    def test_monotone_and_onto(self, family):
        spec = SPECS[family]
        u = np.linspace(1e-6, 1 - 1e-6, 400)
        z = np.asarray(h_function(spec, u, 0.4))
        assert np.all(np.diff(z) > 0)
        assert z[0] < 1e-3 and z[-1] > 1 - 1e-3

    @pytest.mark.parametrize("family", FAMILIES)
    def test_inverse_round_trip(self, family):
        spec = SPECS[family]
        rng = np.random.default_rng(23)
        q = rng.uniform(0.02, 0.98, 50)
        u = h_inverse(spec, q, 0.31)
        np.testing.assert_allclose(h_function(spec, u, 0.31), q, atol=1e-9)


class TestConditionedInverse:
    @pytest.mark.parametrize("family,thetas", [("gumbel", (1.1, 1.5, 2.0, 4.0, 8.0)),
                                               ("clayton", (0.5, 1.0, 2.0, 4.0, 8.0))])
    def test_generator_form_agrees_with_root_solve(self, family, thetas):
        alpha = beta = 0.05
        for th in thetas:
            spec = CopulaSpec(family, th)
            closed = c_alpha_inverse(spec, alpha, alpha * beta)
            lo, hi = 1e-12, 1.0 - 1e-12
            while hi - lo > 1e-13:
                mid = 0.5 * (lo + hi)
                if cdf(spec, mid, alpha) > alpha * beta:
                    hi = mid
                else:
                    lo = mid
            assert abs(closed - 0.5 * (lo + hi)) < 1e-10

    def test_clayton_generator_example(self):
        # theta = 2: psi(t) = (t^-2 - 1)/2, solved at alpha = beta = 0.05
        spec = CopulaSpec("clayton", 2.0)
        psi = lambda t: (t ** -2.0 - 1.0) / 2.0
        expected = (1.0 + 2.0 * (psi(0.0025) - psi(0.05))) ** -0.5
        assert c_alpha_inverse(spec, 0.05, 0.0025) == pytest.approx(expected, abs=1e-14)
        assert float(generator(spec, 0.1)) == pytest.approx(psi(0.1), rel=1e-12)
        assert float(generator_inverse(spec, psi(0.1))) == pytest.approx(0.1, rel=1e-12)

    @pytest.mark.parametrize("family", ("gaussian", "t"))
    def test_root_solve_solves_the_equation(self, family):
        spec = SPECS[family]
        u = c_alpha_inverse(spec, 0.05, 0.0025)
        assert cdf(spec, u, 0.05) == pytest.approx(0.0025, abs=1e-9)


class TestFitting:
    def test_independent_uniforms_give_null_theta(self):
        rng = np.random.default_rng(5)
        u, v = rng.uniform(size=3000), rng.uniform(size=3000)
        f = fit_copula(u, v, "gaussian")
        assert f.theta_stderr is not None
        assert abs(f.spec.theta) <= 2.0 * f.theta_stderr

    def test_clayton_recovery(self):
        rng = np.random.default_rng(6)
        u, v = sample(CopulaSpec("clayton", 2.0), 2000, rng)
        f = fit_copula(u, v, "clayton")
        assert 1.7 <= f.spec.theta <= 2.3

    def test_comonotone_hits_gumbel_boundary(self):
        rng = np.random.default_rng(7)
        u = rng.uniform(0.01, 0.99, 300)
        f = fit_copula(u, u.copy(), "gumbel")
        assert f.boundary

    def test_needs_fifty_points(self):
        rng = np.random.default_rng(8)
        with pytest.raises(ValueError):
            fit_copula(rng.uniform(size=20), rng.uniform(size=20), "clayton")

    def test_aic_bic_formulas(self):
        rng = np.random.default_rng(9)
        u, v = sample(CopulaSpec("gumbel", 1.8), 400, rng)
        f = fit_copula(u, v, "gumbel")
        assert f.aic == pytest.approx(-2 * f.loglik + 2.0)
        assert f.bic == pytest.approx(-2 * f.loglik + np.log(400))
        ft = fit_copula(u, v, "t")
        assert ft.aic == pytest.approx(-2 * ft.loglik + 4.0)


class TestSelection:
    def test_single_candidate_returned(self):
        rng = np.random.default_rng(10)
        u, v = sample(CopulaSpec("clayton", 1.5), 400, rng)
        sel = select_copula(u, v, families=("clayton",))
        assert sel.best.spec.family == "clayton"
        assert len(sel.fits) == 1

    def test_student_t_data_selected(self):
        rng = np.random.default_rng(12)
        u, v = sample(CopulaSpec("t", 0.7, nu=4.0), 2000, rng)
        sel = select_copula(u, v)
        assert sel.best.spec.family == "t"

    def test_gaussian_data_picks_elliptical_or_ties(self):
        rng = np.random.default_rng(14)
        u, v = sample(CopulaSpec("gaussian", 0.6), 4000, rng)
        sel = select_copula(u, v)
        ranked = sorted(sel.fits, key=lambda f: f.aic)
        assert ranked[0].spec.family in ("gaussian", "t")
        if ranked[0].spec.family == "t":
            # on Gaussian data the t fit must look Gaussian: huge dof or an AIC tie
            assert ranked[0].spec.nu > 20 or sel.aic_tie


class TestTailDependence:
    @pytest.mark.parametrize("theta", (1.5, 2.0, 4.0))
    def test_gumbel_upper_limit(self, theta):
        spec = CopulaSpec("gumbel", theta)
        lam_l, lam_u = tail_dependence(spec)
        q = 1.0 - 1e-5
        numeric = (1.0 - 2.0 * q + cdf(spec, q, q)) / (1.0 - q)
        assert lam_u == pytest.approx(numeric, abs=1e-3)
        assert lam_l == 0.0

    @pytest.mark.parametrize("theta", (1.5, 2.0, 4.0))
    def test_clayton_lower_limit(self, theta):
        # the standard 2^(-1/theta), cross-checked against lim C(q,q)/q
        spec = CopulaSpec("clayton", theta)
        lam_l, lam_u = tail_dependence(spec)
        q = 1e-5
        numeric = cdf(spec, q, q) / q
        assert lam_l == pytest.approx(numeric, abs=1e-3)
        assert lam_l == pytest.approx(2.0 ** (-1.0 / theta), rel=1e-12)
        assert lam_u == 0.0
