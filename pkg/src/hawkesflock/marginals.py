"""Marginal return models for the CoVaR pipeline.

Two kinds: a plain empirical CDF (default, assumption-free) and an
ARMA(1,1)-TGARCH(1,1) with standardized skewed-t innovations.  The TGARCH
asymmetry term gates on the *sign of the lagged shock* (extra variance after
negative surprises), the conventional threshold formulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import optimize, stats
from scipy.special import gammaln

__all__ = [
    "DegenerateInputError",
    "NonConvergenceError",
    "EmpiricalMarginal",
    "TgarchParams",
    "TgarchMarginal",
    "skewt_logpdf",
    "skewt_cdf",
    "skewt_ppf",
    "fit_marginal",
    "fit_tgarch",
    "simulate_arma_tgarch",
    "pit",
]


class DegenerateInputError(ValueError):
    """Input series carries no usable variation."""


class NonConvergenceError(RuntimeError):
    """The marginal ML fit failed to produce a usable optimum."""


# --- standardized skewed-t innovations ---------------------------------------------
# Fernandez-Steel construction on the Student t density, recentred and rescaled to
# zero mean / unit variance so it can serve as a GARCH innovation law.


def _skewt_moments(gamma: float, nu: float) -> tuple[float, float]:
    """(mean, std) of the raw skewed-t with unit-scale t kernel."""
    if nu <= 2.0:
        raise ValueError("nu must exceed 2 for a finite variance")
    abs_t = 2.0 * math.sqrt(nu) * math.exp(gammaln((nu + 1.0) / 2.0) - gammaln(nu / 2.0)) \
        / ((nu - 1.0) * math.sqrt(math.pi))
    m = abs_t * (gamma - 1.0 / gamma)
    ez2 = (gamma ** 3 + gamma ** -3) / (gamma + 1.0 / gamma) * nu / (nu - 2.0)
    var = ez2 - m * m
    return m, math.sqrt(var)


def _t_logpdf(x, nu):
    return (gammaln((nu + 1.0) / 2.0) - gammaln(nu / 2.0) - 0.5 * np.log(nu * np.pi)
            - (nu + 1.0) / 2.0 * np.log1p(x * x / nu))


def skewt_logpdf(x, gamma: float, nu: float):
    """Log density of the standardized (zero-mean, unit-variance) skewed t."""
    m, s = _skewt_moments(gamma, nu)
    z = s * np.asarray(x, dtype=float) + m
    core = np.where(z >= 0.0, _t_logpdf(z / gamma, nu), _t_logpdf(z * gamma, nu))
    return math.log(s) + math.log(2.0 / (gamma + 1.0 / gamma)) + core


def skewt_cdf(x, gamma: float, nu: float):
    m, s = _skewt_moments(gamma, nu)
    z = s * np.asarray(x, dtype=float) + m
    g2 = gamma * gamma
    neg = 2.0 / (g2 + 1.0) * stats.t.cdf(z * gamma, nu)
    pos = 1.0 / (g2 + 1.0) + 2.0 * g2 / (g2 + 1.0) * (stats.t.cdf(z / gamma, nu) - 0.5)
    return np.where(z < 0.0, neg, pos)


def skewt_ppf(q, gamma: float, nu: float):
    m, s = _skewt_moments(gamma, nu)
    q = np.asarray(q, dtype=float)
    g2 = gamma * gamma
    p0 = 1.0 / (g2 + 1.0)
    lo = stats.t.ppf(np.clip(q * (g2 + 1.0) / 2.0, 0.0, 1.0), nu) / gamma
    hi = gamma * stats.t.ppf(np.clip(0.5 + (q - p0) * (g2 + 1.0) / (2.0 * g2), 0.0, 1.0), nu)
    z = np.where(q < p0, lo, hi)
    return (z - m) / s


# --- empirical marginal -------------------------------------------------------------


@dataclass(frozen=True)
class EmpiricalMarginal:
    """Empirical CDF of a return sample; ranks map to (0, 1) via n + 1."""

    sample: np.ndarray
    kind: str = "empirical"

    def __post_init__(self):
        x = np.sort(np.asarray(self.sample, dtype=float))
        if len(x) < 2 or x[0] == x[-1]:
            raise DegenerateInputError("empirical marginal needs a non-constant sample")
        object.__setattr__(self, "sample", x)

    def cdf(self, x):
        n = len(self.sample)
        return np.searchsorted(self.sample, np.asarray(x, dtype=float), side="right") / (n + 1.0)

    def quantile(self, q):
        return np.quantile(self.sample, q)

    def pit(self, r=None):
        """Probability-integral transform of the fitting sample (or of `r`)."""
        if r is None:
            r = self.sample
        u = self.cdf(np.asarray(r, dtype=float))
        return np.clip(u, 1e-12, 1.0 - 1e-12)


# --- ARMA(1,1)-TGARCH(1,1) marginal ---------------------------------------------------


@dataclass(frozen=True)
class TgarchParams:
    phi0: float
    phi1: float
    theta1: float
    omega: float
    beta: float
    alpha1: float
    lambda1: float
    gamma: float
    nu: float

    def as_array(self) -> np.ndarray:
        return np.array([self.phi0, self.phi1, self.theta1, self.omega, self.beta,
                         self.alpha1, self.lambda1, self.gamma, self.nu])

    @property
    def nonstationary(self) -> bool:
        return self.beta + self.alpha1 + 0.5 * self.lambda1 >= 1.0


_TGARCH_BOUNDS = [
    (None, None),        # phi0
    (-0.998, 0.998),     # phi1
    (-0.998, 0.998),     # theta1
    (1e-12, None),       # omega > 0
    (0.0, 0.99995),      # beta >= 0
    (0.0, 5.0),          # alpha1 >= 0
    (-5.0, 5.0),         # lambda1 (asymmetry; net ARCH load must stay positive)
    (0.05, 20.0),        # gamma > 0
    (2.05, 200.0),       # nu > 2
]


@njit(cache=True)
def _tgarch_filter(r, phi0, phi1, theta1, omega, beta, alpha1, lambda1, sig2_init):
    n = r.shape[0]
    eps = np.zeros(n)
    sig2 = np.empty(n)
    sig2[0] = sig2_init
    for t in range(1, n):
        eps[t] = r[t] - phi0 - phi1 * r[t - 1] + theta1 * eps[t - 1]
        load = alpha1 + (lambda1 if eps[t - 1] < 0.0 else 0.0)
        s2 = omega + beta * sig2[t - 1] + load * eps[t - 1] * eps[t - 1]
        sig2[t] = s2 if s2 > 1e-18 else 1e-18
    return eps, sig2


def _tgarch_nll(x, r, sig2_init):
    phi0, phi1, theta1, omega, beta, alpha1, lambda1, gamma, nu = x
    for val, (lo, hi) in zip(x, _TGARCH_BOUNDS):
        if (lo is not None and val < lo) or (hi is not None and val > hi):
            return 1e15
    eps, sig2 = _tgarch_filter(r, phi0, phi1, theta1, omega, beta, alpha1, lambda1, sig2_init)
    sig = np.sqrt(sig2[1:])
    ll = np.sum(skewt_logpdf(eps[1:] / sig, gamma, nu) - np.log(sig))
    return -ll if np.isfinite(ll) else 1e15


@dataclass(frozen=True)
class TgarchMarginal:
    params: TgarchParams
    resid: np.ndarray        # model residuals eps_t
    sigma2: np.ndarray       # conditional variances
    loglik: float
    converged: bool
    stderr: np.ndarray | None
    sample: np.ndarray
    kind: str = "tgarch"

    @property
    def std_resid(self) -> np.ndarray:
        return self.resid[1:] / np.sqrt(self.sigma2[1:])

    @property
    def nonstationary(self) -> bool:
        return self.params.nonstationary

    def pit(self, r=None):
        """PIT of the standardized residuals through the fitted innovation CDF."""
        if r is not None:
            raise ValueError("tgarch pit applies to the fitting sample")
        z = self.std_resid
        if np.all(z == z[0]):
            raise DegenerateInputError("constant residuals cannot be transformed")
        u = skewt_cdf(z, self.params.gamma, self.params.nu)
        return np.clip(u, 1e-12, 1.0 - 1e-12)

    def forecast(self) -> tuple[float, float]:
        """One-step-ahead conditional mean and variance."""
        p = self.params
        r_last = float(self.sample[-1])
        e_last = float(self.resid[-1])
        mu = p.phi0 + p.phi1 * r_last - p.theta1 * e_last
        load = p.alpha1 + (p.lambda1 if e_last < 0.0 else 0.0)
        s2 = p.omega + p.beta * float(self.sigma2[-1]) + load * e_last * e_last
        return mu, s2

    def quantile(self, q):
        mu, s2 = self.forecast()
        return mu + math.sqrt(s2) * skewt_ppf(q, self.params.gamma, self.params.nu)


def fit_tgarch(r, max_iter: int = 4000) -> TgarchMarginal:
    """Conditional ML fit of the ARMA(1,1)-TGARCH(1,1)-skewed-t marginal."""
    r = np.asarray(r, dtype=float)
    if len(r) < 250:
        raise DegenerateInputError(f"parametric marginal needs >= 250 observations, got {len(r)}")
    if np.all(r == r[0]):
        raise DegenerateInputError("constant return series")
    var = float(np.var(r))
    x0 = np.array([float(np.mean(r)), 0.1, 0.0, 0.1 * var, 0.8, 0.1, 0.05, 1.0, 8.0])

    res_nm = optimize.minimize(_tgarch_nll, x0, args=(r, var), method="Nelder-Mead",
                               options={"maxiter": max_iter, "adaptive": True,
                                        "fatol": 1e-8, "xatol": 1e-8})
    res = optimize.minimize(_tgarch_nll, res_nm.x, args=(r, var), method="L-BFGS-B",
                            bounds=_TGARCH_BOUNDS, options={"maxiter": 500})
    best = res if res.fun <= res_nm.fun else res_nm
    if not np.isfinite(best.fun) or best.fun >= 1e14:
        raise NonConvergenceError("TGARCH likelihood never became finite")

    x = best.x
    params = TgarchParams(*[float(v) for v in x])
    eps, sig2 = _tgarch_filter(r, x[0], x[1], x[2], x[3], x[4], x[5], x[6], var)
    sig = np.sqrt(sig2[1:])
    ll = float(np.sum(skewt_logpdf(eps[1:] / sig, x[7], x[8]) - np.log(sig)))

    # stderr from the observed information (central differences).  Parameters
    # the data cannot pin down (nu on Gaussian-looking samples, beta when the
    # ARCH load vanishes) get NaN entries instead of poisoning the rest: the
    # information matrix is eigen-decomposed in step-scaled units and near-null
    # directions are dropped.
    stderr = np.full(len(x), np.nan)
    k = len(x)
    h = np.array([1e-4 * max(abs(v), 1e-3) for v in x])
    hess = np.empty((k, k))
    for a in range(k):
        for b in range(a, k):
            xa, xb = np.zeros(k), np.zeros(k)
            xa[a], xb[b] = h[a], h[b]
            if a == b:
                val = (_tgarch_nll(x + 2 * xa, r, var) - 2 * best.fun
                       + _tgarch_nll(x - 2 * xa, r, var)) / (4 * h[a] ** 2)
            else:
                val = (_tgarch_nll(x + xa + xb, r, var) - _tgarch_nll(x + xa - xb, r, var)
                       - _tgarch_nll(x - xa + xb, r, var)
                       + _tgarch_nll(x - xa - xb, r, var)) / (4 * h[a] * h[b])
            hess[a, b] = hess[b, a] = val
    clean = np.where(np.all(np.isfinite(hess), axis=1) & np.all(np.abs(hess) < 1e14, axis=1))[0]
    if clean.size:
        sub = hess[np.ix_(clean, clean)]
        d = h[clean]
        try:
            w, vecs = np.linalg.eigh(sub * np.outer(d, d))
            bad = w < 1e-12 * max(w.max(), 1e-300)
            if not np.all(bad):
                inv_w = np.where(bad, 0.0, 1.0 / np.where(bad, 1.0, w))
                cov_scaled = (vecs * inv_w) @ vecs.T
                se = d * np.sqrt(np.maximum(np.diag(cov_scaled), 0.0))
                se[np.sum(vecs[:, bad] ** 2, axis=1) > 1e-6] = np.nan
                stderr[clean] = se
        except np.linalg.LinAlgError:
            pass
    if not np.any(np.isfinite(stderr)):
        stderr = None

    return TgarchMarginal(params=params, resid=eps, sigma2=sig2, loglik=ll,
                          converged=bool(res.success or res_nm.success),
                          stderr=stderr, sample=r)


def simulate_arma_tgarch(params: TgarchParams, n: int, rng: np.random.Generator,
                         burn: int = 500) -> np.ndarray:
    """Sample path of the marginal model (used by the recovery tests)."""
    total = n + burn
    z = skewt_ppf(rng.uniform(1e-12, 1 - 1e-12, size=total), params.gamma, params.nu)
    r = np.zeros(total)
    eps = np.zeros(total)
    sig2 = params.omega / max(1.0 - params.beta - params.alpha1 - 0.5 * params.lambda1, 0.05)
    e_prev = 0.0
    r_prev = params.phi0
    for t in range(total):
        load = params.alpha1 + (params.lambda1 if e_prev < 0.0 else 0.0)
        sig2 = params.omega + params.beta * sig2 + load * e_prev * e_prev
        e_t = math.sqrt(sig2) * z[t]
        r[t] = params.phi0 + params.phi1 * r_prev + e_t - params.theta1 * e_prev
        eps[t] = e_t
        e_prev, r_prev = e_t, r[t]
    return r[burn:]


def fit_marginal(r, kind: str = "empirical"):
    """Spec entry point: fit a marginal of the requested kind to a return series."""
    if kind == "empirical":
        return EmpiricalMarginal(np.asarray(r, dtype=float))
    if kind == "tgarch":
        return fit_tgarch(r)
    raise ValueError(f"unknown marginal kind {kind!r}; expected 'empirical' or 'tgarch'")


def pit(r, marginal):
    """Probability-integral transform of returns through a fitted marginal."""
    if marginal.kind == "empirical":
        return marginal.pit(r)
    return marginal.pit()
