"""Bivariate copulas: Gaussian, Student t, Gumbel, Clayton.

Provides the joint CDF, density-based ML fitting with AIC/BIC selection, the
conditional distribution ("h-function") and its inverse, and the Archimedean
generator shortcut used by the conditional-quantile solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize, stats
from scipy.special import gammaln, ndtr, stdtr

__all__ = [
    "FAMILIES",
    "CopulaSpec",
    "CopulaFit",
    "CopulaSelection",
    "BoundaryEstimateWarning",
    "cdf",
    "log_density",
    "h_function",
    "h_inverse",
    "generator",
    "generator_inverse",
    "c_alpha_inverse",
    "sample",
    "fit_copula",
    "select_copula",
    "tail_dependence",
]

FAMILIES = ("gaussian", "t", "gumbel", "clayton")

_THETA_BOUNDS = {
    "gaussian": (-0.9999, 0.9999),
    "t": (-0.9999, 0.9999),
    "gumbel": (1.0 + 1e-9, 50.0),
    "clayton": (1e-9, 50.0),
}


class BoundaryEstimateWarning(UserWarning):
    """A fitted dependence parameter sits on the edge of its admissible range."""


@dataclass(frozen=True)
class CopulaSpec:
    """A copula family with its dependence parameter (and dof for Student t)."""

    family: str
    theta: float
    nu: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        th = self.theta
        if self.family in ("gaussian", "t") and not -1.0 < th < 1.0:
            raise ValueError(f"{self.family} theta must lie in (-1, 1), got {th}")
        if self.family == "gumbel" and th < 1.0:
            raise ValueError(f"gumbel theta must be >= 1, got {th}")
        if self.family == "clayton" and th <= 0.0:
            raise ValueError(f"clayton theta must be > 0, got {th}")
        if self.family == "t":
            if self.nu is None or self.nu <= 2.0:
                raise ValueError("Student t copula needs nu > 2")

    @property
    def n_params(self) -> int:
        return 2 if self.family == "t" else 1


def _check_unit(name, x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError(f"{name} must lie in [0, 1]")
    return x


# --- joint CDF -----------------------------------------------------------------


_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _bvn_cdf_scalar(h: float, k: float, rho: float) -> float:
    # Conditional representation: integrate N(0,1) density times the
    # conditional normal CDF of the second coordinate given the first.
    sig = math.sqrt(1.0 - rho * rho)

    def integrand(s):
        return _INV_SQRT_2PI * math.exp(-0.5 * s * s) * ndtr((k - rho * s) / sig)

    val, _ = integrate.quad(integrand, -np.inf, h, epsabs=1e-13, epsrel=1e-11, limit=200)
    return val


def _bvt_cdf_scalar(h: float, k: float, rho: float, nu: float) -> float:
    # Same conditional trick; given X = s the standardized second coordinate is
    # t with nu + 1 degrees of freedom.
    sig = math.sqrt(1.0 - rho * rho)
    log_norm = gammaln((nu + 1.0) / 2.0) - gammaln(nu / 2.0) - 0.5 * math.log(nu * math.pi)

    def integrand(s):
        pdf = math.exp(log_norm - (nu + 1.0) / 2.0 * math.log1p(s * s / nu))
        scale = math.sqrt((nu + s * s) / (nu + 1.0)) * sig
        return pdf * stdtr(nu + 1.0, (k - rho * s) / scale)

    val, _ = integrate.quad(integrand, -np.inf, h, epsabs=1e-13, epsrel=1e-11, limit=200)
    return val


def cdf(spec: CopulaSpec, u, v):
    """C(u, v); exact on the boundary of the unit square."""
    u = _check_unit("u", u)
    v = _check_unit("v", v)
    u, v = np.broadcast_arrays(u, v)
    out = np.empty(u.shape, dtype=float)
    flat_u, flat_v, flat_o = u.ravel(), v.ravel(), out.ravel()
    th = spec.theta
    for i in range(flat_u.size):
        uu, vv = flat_u[i], flat_v[i]
        if uu <= 0.0 or vv <= 0.0:
            flat_o[i] = 0.0
        elif uu >= 1.0:
            flat_o[i] = vv
        elif vv >= 1.0:
            flat_o[i] = uu
        elif spec.family == "gaussian":
            if th == 0.0:
                flat_o[i] = uu * vv
            else:
                flat_o[i] = _bvn_cdf_scalar(stats.norm.ppf(uu), stats.norm.ppf(vv), th)
        elif spec.family == "t":
            flat_o[i] = _bvt_cdf_scalar(stats.t.ppf(uu, spec.nu), stats.t.ppf(vv, spec.nu),
                                        th, spec.nu)
        elif spec.family == "gumbel":
            s = (-math.log(uu)) ** th + (-math.log(vv)) ** th
            flat_o[i] = math.exp(-s ** (1.0 / th))
        else:  # clayton
            flat_o[i] = (uu ** -th + vv ** -th - 1.0) ** (-1.0 / th)
    return out if out.shape else float(out)


# --- density ---------------------------------------------------------------------


def log_density(spec: CopulaSpec, u, v):
    """log c(u, v) for interior points, vectorized."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(u <= 0.0) or np.any(u >= 1.0) or np.any(v <= 0.0) or np.any(v >= 1.0):
        raise ValueError("density needs interior points of the unit square")
    th = spec.theta
    if spec.family == "gaussian":
        x = stats.norm.ppf(u)
        y = stats.norm.ppf(v)
        om = 1.0 - th * th
        return -0.5 * np.log(om) - (th * th * (x * x + y * y) - 2.0 * th * x * y) / (2.0 * om)
    if spec.family == "t":
        nu = spec.nu
        x = stats.t.ppf(u, nu)
        y = stats.t.ppf(v, nu)
        om = 1.0 - th * th
        quad_form = (x * x - 2.0 * th * x * y + y * y) / (nu * om)
        log_f2 = (gammaln((nu + 2.0) / 2.0) - gammaln(nu / 2.0) - np.log(nu * np.pi)
                  - 0.5 * np.log(om) - (nu + 2.0) / 2.0 * np.log1p(quad_form))
        return log_f2 - stats.t.logpdf(x, nu) - stats.t.logpdf(y, nu)
    if spec.family == "gumbel":
        lx = -np.log(u)
        ly = -np.log(v)
        s = lx ** th + ly ** th
        s_inv = s ** (1.0 / th)
        return (-s_inv + (th - 1.0) * (np.log(lx) + np.log(ly)) - np.log(u) - np.log(v)
                + (1.0 / th - 2.0) * np.log(s) + np.log(s_inv + th - 1.0))
    # clayton
    t_sum = u ** -th + v ** -th - 1.0
    return np.log1p(th) - (th + 1.0) * (np.log(u) + np.log(v)) - (2.0 + 1.0 / th) * np.log(t_sum)


# --- conditional distribution (h-function) and inverse ----------------------------


def h_function(spec: CopulaSpec, u, alpha):
    """zeta_alpha(u) = dC(u, v)/dv at v = alpha: the conditional CDF of U given V."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0.0) or np.any(u >= 1.0) or not 0.0 < alpha < 1.0:
        raise ValueError("h_function needs u, alpha in (0, 1)")
    th = spec.theta
    if spec.family == "gaussian":
        if th == 0.0:
            return u + 0.0
        return stats.norm.cdf((stats.norm.ppf(u) - th * stats.norm.ppf(alpha))
                              / math.sqrt(1.0 - th * th))
    if spec.family == "t":
        nu = spec.nu
        y = stats.t.ppf(alpha, nu)
        scale = math.sqrt((nu + y * y) * (1.0 - th * th) / (nu + 1.0))
        return stats.t.cdf((stats.t.ppf(u, nu) - th * y) / scale, nu + 1.0)
    if spec.family == "gumbel":
        x = (-np.log(u)) ** th
        y = (-math.log(alpha)) ** th
        s = x + y
        return -np.exp(-s ** (1.0 / th)) * s ** (1.0 / th - 1.0) * y / (alpha * math.log(alpha))
    # clayton
    return alpha ** (-th - 1.0) * (u ** -th + alpha ** -th - 1.0) ** (-1.0 - 1.0 / th)


def _vector_bisect(f, targets, lo=1e-12, hi=1.0 - 1e-12, tol=1e-12, max_iter=100):
    """Solve f(u) = target elementwise for increasing f on (lo, hi)."""
    targets = np.asarray(targets, dtype=float)
    a = np.full(targets.shape, lo)
    b = np.full(targets.shape, hi)
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        high = f(mid) > targets
        b = np.where(high, mid, b)
        a = np.where(high, a, mid)
        if np.max(b - a) < tol:
            break
    return 0.5 * (a + b)


def h_inverse(spec: CopulaSpec, q, alpha):
    """u such that zeta_alpha(u) = q; closed form where available."""
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0.0) or np.any(q >= 1.0) or not 0.0 < alpha < 1.0:
        raise ValueError("h_inverse needs q, alpha in (0, 1)")
    th = spec.theta
    if spec.family == "gaussian":
        if th == 0.0:
            return q + 0.0
        return stats.norm.cdf(stats.norm.ppf(q) * math.sqrt(1.0 - th * th)
                              + th * stats.norm.ppf(alpha))
    if spec.family == "t":
        nu = spec.nu
        y = stats.t.ppf(alpha, nu)
        scale = math.sqrt((nu + y * y) * (1.0 - th * th) / (nu + 1.0))
        return stats.t.cdf(stats.t.ppf(q, nu + 1.0) * scale + th * y, nu)
    if spec.family == "clayton":
        core = (q * alpha ** (th + 1.0)) ** (-th / (th + 1.0)) - alpha ** -th + 1.0
        return core ** (-1.0 / th)
    # gumbel: monotone in u, no closed inverse
    return _vector_bisect(lambda m: h_function(spec, m, alpha), q)


# --- Archimedean generators and the conditioned-CDF inverse -----------------------


def generator(spec: CopulaSpec, t):
    t = np.asarray(t, dtype=float)
    if spec.family == "gumbel":
        return (-np.log(t)) ** spec.theta
    if spec.family == "clayton":
        return (t ** -spec.theta - 1.0) / spec.theta
    raise ValueError(f"{spec.family} copula has no Archimedean generator")


def generator_inverse(spec: CopulaSpec, s):
    s = np.asarray(s, dtype=float)
    if spec.family == "gumbel":
        return np.exp(-(s ** (1.0 / spec.theta)))
    if spec.family == "clayton":
        return (1.0 + spec.theta * s) ** (-1.0 / spec.theta)
    raise ValueError(f"{spec.family} copula has no Archimedean generator")


def c_alpha_inverse(spec: CopulaSpec, alpha: float, target: float, tol: float = 1e-10) -> float:
    """Solve C(u, alpha) = target for u.

    Archimedean families use the generator identity psi^-1(psi(target) - psi(alpha));
    the elliptical families bisect the monotone map u -> C(u, alpha).
    """
    if not 0.0 < target < alpha < 1.0:
        raise ValueError("need 0 < target < alpha < 1")
    if spec.family in ("gumbel", "clayton"):
        return float(generator_inverse(spec, generator(spec, target) - generator(spec, alpha)))
    if spec.family == "gaussian" and spec.theta == 0.0:
        return target / alpha
    lo, hi = 1e-12, 1.0 - 1e-12
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if cdf(spec, mid, alpha) > target:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def sample(spec: CopulaSpec, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw (u, v) pairs by conditional inversion: v ~ U(0,1), u = zeta_v^{-1}(q)."""
    v = rng.uniform(1e-12, 1.0 - 1e-12, size=n)
    q = rng.uniform(1e-12, 1.0 - 1e-12, size=n)
    u = np.array([h_inverse(spec, qi, vi) for qi, vi in zip(q, v)], dtype=float)
    return u, v


# --- fitting and selection ----------------------------------------------------------


@dataclass(frozen=True)
class CopulaFit:
    spec: CopulaSpec
    loglik: float
    aic: float
    bic: float
    n: int
    theta_stderr: float | None = None
    boundary: bool = False


def _fit_theta(u, v, family, nu=None):
    lo, hi = _THETA_BOUNDS[family]

    def nll(th):
        spec = CopulaSpec(family, float(th), nu)
        return -float(np.sum(log_density(spec, u, v)))

    res = optimize.minimize_scalar(nll, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-8})
    return float(res.x), -float(res.fun)


def fit_copula(u, v, family: str, nu_grid=None) -> CopulaFit:
    """ML fit of one family; Student t profiles nu over a grid then refines."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError("u and v must be 1-d arrays of equal length")
    n = len(u)
    if n < 50:
        raise ValueError("need at least 50 observations to fit a copula")

    if family == "t":
        if nu_grid is None:
            nu_grid = np.arange(2.5, 30.5, 0.5)
        best = None
        for nu in nu_grid:
            th, ll = _fit_theta(u, v, "t", nu=float(nu))
            if best is None or ll > best[2]:
                best = (th, float(nu), ll)
        th0, nu0, _ = best

        def nll(x):
            th, nu = x
            if not (-0.9999 < th < 0.9999) or not (2.05 < nu < 200.0):
                return 1e15
            return -float(np.sum(log_density(CopulaSpec("t", th, nu), u, v)))

        res = optimize.minimize(nll, np.array([th0, nu0]), method="Nelder-Mead",
                                options={"xatol": 1e-6, "fatol": 1e-8})
        theta, nu = float(res.x[0]), float(res.x[1])
        ll = -float(res.fun)
        spec = CopulaSpec("t", theta, nu)
    else:
        theta, ll = _fit_theta(u, v, family)
        nu = None
        spec = CopulaSpec(family, theta, nu)

    lo, hi = _THETA_BOUNDS[family]
    boundary = (theta - lo) < 1e-6 * (hi - lo) or (hi - theta) < 1e-6 * (hi - lo)

    # Observed-information stderr for theta (profile for Student t).
    h = 1e-4 * max(abs(theta), 0.1)
    lo_ok = theta - 2 * h > lo and theta + 2 * h < hi
    stderr = None
    if lo_ok and not boundary:
        def ll_at(th):
            return float(np.sum(log_density(CopulaSpec(family, th, nu), u, v)))
        d2 = (ll_at(theta + h) - 2.0 * ll + ll_at(theta - h)) / (h * h)
        if d2 < 0:
            stderr = float(1.0 / math.sqrt(-d2))

    k = spec.n_params
    return CopulaFit(spec=spec, loglik=ll, aic=-2.0 * ll + 2.0 * k,
                     bic=-2.0 * ll + k * math.log(n), n=n,
                     theta_stderr=stderr, boundary=boundary)


@dataclass(frozen=True)
class CopulaSelection:
    fits: list = field(default_factory=list)
    best: CopulaFit | None = None          # argmin AIC
    best_bic_family: str | None = None
    criteria_agree: bool = True
    aic_tie: bool = False                  # runner-up within 2 AIC points

    def table(self) -> list[dict]:
        return [{"family": f.spec.family, "theta": f.spec.theta, "nu": f.spec.nu,
                 "loglik": f.loglik, "aic": f.aic, "bic": f.bic} for f in self.fits]


def select_copula(u, v, families=FAMILIES) -> CopulaSelection:
    """Fit each candidate and pick the lowest AIC; BIC disagreement is flagged."""
    if not families:
        raise ValueError("need at least one candidate family")
    fits = [fit_copula(u, v, fam) for fam in families]
    by_aic = sorted(fits, key=lambda f: f.aic)
    best = by_aic[0]
    best_bic = min(fits, key=lambda f: f.bic)
    tie = len(fits) > 1 and (by_aic[1].aic - by_aic[0].aic) <= 2.0
    return CopulaSelection(fits=fits, best=best, best_bic_family=best_bic.spec.family,
                           criteria_agree=(best_bic.spec.family == best.spec.family),
                           aic_tie=tie)


def tail_dependence(spec: CopulaSpec) -> tuple[float, float]:
    """(lower, upper) tail-dependence coefficients.

    Clayton's lower coefficient is the standard 2^(-1/theta); it is checked
    against the limit definition in the test suite rather than taken from any
    printed table.
    """
    th = spec.theta
    if spec.family == "gaussian":
        return 0.0, 0.0
    if spec.family == "t":
        lam = 2.0 * stats.t.cdf(-math.sqrt((spec.nu + 1.0) * (1.0 - th) / (1.0 + th)),
                                spec.nu + 1.0)
        return float(lam), float(lam)
    if spec.family == "gumbel":
        return 0.0, 2.0 - 2.0 ** (1.0 / th)
    return 2.0 ** (-1.0 / th), 0.0
