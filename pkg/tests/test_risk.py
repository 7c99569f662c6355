import numpy as np
import pytest

from hawkesflock.core import FlockParams, PricePath
from hawkesflock.risk import (QuarterRatios, branching_matrix, empirical_p,
                              quarter_ratios, risk_summary, spectral_radius,
                              stationary_rates)


def zero_alpha_params():
    return FlockParams(mu1=0.1, beta1=0.7, alpha1s=0, alpha1c=0, alpha1n=0, alpha1w=0,
                       mu2=0.1, beta2=1.1, alpha2s=0, alpha2c=0, alpha2n=0, alpha2w=0)


class TestBranchingMatrix:
    def test_zero_alpha_gives_zero_matrix(self):
        np.testing.assert_array_equal(branching_matrix(zero_alpha_params(), 0.5),
                                      np.zeros((4, 4)))

    def test_reference_entries(self, col1):
        M = branching_matrix(col1, 0.5)
        assert M[0, 0] == pytest.approx(0.4 / 0.6, rel=1e-12)
        assert M[0, 2] == pytest.approx(0.5 * 0.2 / 0.6, rel=1e-12)

    def test_p_zero_empties_rows_one_and_four(self, generic_params):
        M = branching_matrix(generic_params, 0.0)
        np.testing.assert_array_equal(M[0, 2:], [0.0, 0.0])
        np.testing.assert_array_equal(M[3, :2], [0.0, 0.0])
        assert M[1, 2] > 0 and M[2, 0] > 0  # the mirrored rows keep full weight

    def test_negative_alpha_enters_in_absolute_value(self, col1):
        neg = FlockParams(**{**col1.to_dict(), "alpha1s": -0.4})
        np.testing.assert_array_equal(branching_matrix(neg, 0.5),
                                      branching_matrix(col1, 0.5))


class TestSpectralRadius:
    def test_reference_value(self, col1):
        assert spectral_radius(col1) == pytest.approx(0.75, abs=1e-10)

    def test_no_flocking_reduces_to_max_ratio(self):
        # both assets at per-asset ratio r -> rho = r
        p = FlockParams(mu1=0.1, beta1=1.0, alpha1s=0.3, alpha1c=0.2, alpha1n=0, alpha1w=0,
                        mu2=0.1, beta2=2.0, alpha2s=0.6, alpha2c=0.4, alpha2n=0, alpha2w=0)
        assert spectral_radius(p) == pytest.approx(0.5, abs=1e-12)

    def test_inverse_beta_homogeneity(self, generic_params):
        base = FlockParams(**{**generic_params.to_dict(), "beta1": 1.0, "beta2": 1.0})
        double = FlockParams(**{**base.to_dict(), "beta1": 2.0, "beta2": 2.0})
        assert spectral_radius(double) == pytest.approx(spectral_radius(base) / 2.0, rel=1e-12)

    def test_matches_eigenvalues_on_random_draws(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            alphas = rng.uniform(0.0, 2.0, size=8)
            betas = rng.uniform(0.1, 3.0, size=2)
            p = FlockParams(mu1=0.1, beta1=betas[0], alpha1s=alphas[0], alpha1c=alphas[1],
                            alpha1n=alphas[2], alpha1w=alphas[3],
                            mu2=0.1, beta2=betas[1], alpha2s=alphas[4], alpha2c=alphas[5],
                            alpha2n=alphas[6], alpha2w=alphas[7])
            eig = np.max(np.abs(np.linalg.eigvals(branching_matrix(p, 0.5))))
            assert abs(spectral_radius(p) - eig) < 1e-10


class TestQuarterRatios:
    def test_reference_row(self):
        # a published daily estimate for asset 1: endogeneity ~0.7301, interaction ~0.1764
        p = FlockParams(mu1=0.0755, beta1=0.6079, alpha1s=0.0105, alpha1c=0.4333,
                        alpha1n=-0.0120, alpha1w=0.2265,
                        mu2=0.0499, beta2=1.2513, alpha2s=0.4384, alpha2c=0.2306,
                        alpha2n=-0.0109, alpha2w=0.1335)
        q = quarter_ratios(p)
        assert q.q11 == pytest.approx((0.0105 + 0.4333) / 0.6079, rel=1e-12)
        assert q.q11 == pytest.approx(0.7301, abs=5e-5)
        assert q.q12 == pytest.approx((-0.0120 + 0.2265) / (2 * 0.6079), rel=1e-12)
        assert q.q12 == pytest.approx(0.1764, abs=5e-5)

    def test_zero_alpha(self):
        assert quarter_ratios(zero_alpha_params()) == QuarterRatios(0, 0, 0, 0)

    def test_scale_invariance(self, generic_params):
        d = generic_params.to_dict()
        scaled = FlockParams(**{k: (2 * v if k.startswith(("alpha", "beta")) else v)
                                for k, v in d.items()})
        assert quarter_ratios(scaled) == pytest.approx(quarter_ratios(generic_params))

    def test_quadrant_partition(self, generic_params):
        # endogeneity must ignore the flocking jumps and vice versa
        d = generic_params.to_dict()
        changed = FlockParams(**{**d, "alpha1n": 9.0, "alpha1w": 9.0,
                                 "alpha2n": 9.0, "alpha2w": 9.0})
        q0, q1 = quarter_ratios(generic_params), quarter_ratios(changed)
        assert (q0.q11, q0.q22) == (q1.q11, q1.q22)
        changed = FlockParams(**{**d, "alpha1s": 9.0, "alpha1c": 9.0,
                                 "alpha2s": 9.0, "alpha2c": 9.0})
        q2 = quarter_ratios(changed)
        assert (q0.q12, q0.q21) == (q2.q12, q2.q21)


class TestEmpiricalP:
    def test_always_below(self):
        path = PricePath(times=np.array([0.0, 1.0]), c1=np.array([0.0, 1.0]),
                         c2=np.array([5.0, 5.0]), horizon=4.0)
        res = empirical_p(path)
        assert res.p == 1.0 and res.tie_fraction == 0.0

    def test_relabel_symmetry(self):
        rng = np.random.default_rng(8)
        times = np.concatenate(([0.0], np.sort(rng.uniform(0, 10, 30))))
        c1 = np.concatenate(([0.0], rng.integers(-3, 4, 30))).astype(float)
        c2 = np.concatenate(([0.0], rng.integers(-3, 4, 30))).astype(float)
        path = PricePath(times=times, c1=c1, c2=c2, horizon=10.0)
        flipped = PricePath(times=times, c1=c2, c2=c1, horizon=10.0)
        a, b = empirical_p(path), empirical_p(flipped)
        assert a.p == pytest.approx(1.0 - b.p - b.tie_fraction, abs=1e-12)
        assert a.tie_fraction == b.tie_fraction

    def test_symmetric_flocking_simulation_near_half(self):
        from hawkesflock.sim import SimConfig, price_path, simulate
        p = FlockParams(mu1=0.1, beta1=1.0, alpha1s=0.2, alpha1c=0.1, alpha1n=0.05,
                        alpha1w=0.4,
                        mu2=0.1, beta2=1.0, alpha2s=0.2, alpha2c=0.1, alpha2n=0.05,
                        alpha2w=0.4)
        stream = simulate(SimConfig(params=p, horizon=20000.0, seed=31))
        res = empirical_p(price_path(stream))
        assert 0.4 <= res.p <= 0.6


class TestSummary:
    def test_bundle(self, col1):
        s = risk_summary(col1, p=0.5)
        assert s.rho == pytest.approx(0.75, abs=1e-10)
        assert s.stable
        assert s.ratios.q11 == pytest.approx(0.4 / 0.6)

    def test_stationary_rates_reference(self, col1):
        rates = stationary_rates(col1)
        np.testing.assert_allclose(rates, [0.336, 0.336, 0.192, 0.192], rtol=1e-9)
