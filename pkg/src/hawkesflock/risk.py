"""Branching-ratio systemic-risk metrics derived from the model parameters."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import FlockParams, PricePath

__all__ = [
    "ComplexDiscriminantWarning",
    "QuarterRatios",
    "EmpiricalP",
    "RiskSummary",
    "branching_matrix",
    "spectral_radius",
    "quarter_ratios",
    "empirical_p",
    "stationary_rates",
    "risk_summary",
]


class ComplexDiscriminantWarning(UserWarning):
    """Closed-form discriminant went negative; numerical eigenvalues were used."""


def branching_matrix(params: FlockParams, p: float = 0.5) -> np.ndarray:
    """Expected offspring counts per ancestor event.

    Entry (i, j) integrates the absolute kernel response of component i to an
    event of component j; the flocking entries carry the probability p that
    C1 < C2 (and 1-p for the mirrored states).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    q = params
    b1, b2 = q.beta1, q.beta2
    a1s, a1c = abs(q.alpha1s) / b1, abs(q.alpha1c) / b1
    a1n, a1w = abs(q.alpha1n) / b1, abs(q.alpha1w) / b1
    a2s, a2c = abs(q.alpha2s) / b2, abs(q.alpha2c) / b2
    a2n, a2w = abs(q.alpha2n) / b2, abs(q.alpha2w) / b2
    return np.array([
        [a1s, a1c, p * a1w, p * a1n],
        [a1c, a1s, (1 - p) * a1n, (1 - p) * a1w],
        [(1 - p) * a2w, (1 - p) * a2n, a2s, a2c],
        [p * a2n, p * a2w, a2c, a2s],
    ])


def spectral_radius(params: FlockParams) -> float:
    """Branching ratio: largest |eigenvalue| of the p = 1/2 branching matrix.

    Uses the closed form rho = (a + sqrt(a^2 + 4(b - c))) / 2 built from the
    same absolute jump sizes as the matrix, so the identity with the numerical
    eigenvalue holds for negative estimates too.  Should the discriminant ever
    go negative, the numerical eigenvalue is reported instead with a warning.
    """
    q = params
    b1, b2 = q.beta1, q.beta2
    s1, c1 = abs(q.alpha1s), abs(q.alpha1c)
    n1, w1 = abs(q.alpha1n), abs(q.alpha1w)
    s2, c2 = abs(q.alpha2s), abs(q.alpha2c)
    n2, w2 = abs(q.alpha2n), abs(q.alpha2w)
    a = (s1 + c1) / b1 + (s2 + c2) / b2
    b = (n1 * n2 + n1 * w2 + w1 * n2 + w1 * w2) / (4.0 * b1 * b2)
    c = (s1 * s2 + s1 * c2 + c1 * s2 + c1 * c2) / (b1 * b2)
    disc = a * a + 4.0 * (b - c)
    if disc < 0.0:
        warnings.warn("discriminant a^2 + 4(b - c) < 0; falling back to eigenvalues",
                      ComplexDiscriminantWarning)
        return float(np.max(np.abs(np.linalg.eigvals(branching_matrix(params, 0.5)))))
    return 0.5 * (a + np.sqrt(disc))


class QuarterRatios(NamedTuple):
    """Quadrant averages of the branching matrix (signed sums, as estimated)."""

    q11: float  # endogeneity of asset 1: (a1s + a1c) / beta1
    q12: float  # interaction onto asset 1: (a1n + a1w) / (2 beta1)
    q21: float  # interaction onto asset 2: (a2n + a2w) / (2 beta2)
    q22: float  # endogeneity of asset 2: (a2s + a2c) / beta2


def quarter_ratios(params: FlockParams) -> QuarterRatios:
    q = params
    return QuarterRatios(
        q11=(q.alpha1s + q.alpha1c) / q.beta1,
        q12=(q.alpha1n + q.alpha1w) / (2.0 * q.beta1),
        q21=(q.alpha2n + q.alpha2w) / (2.0 * q.beta2),
        q22=(q.alpha2s + q.alpha2c) / q.beta2,
    )


class EmpiricalP(NamedTuple):
    p: float             # time fraction with C1 < C2
    tie_fraction: float  # time fraction with C1 == C2 (counts toward neither side)


def empirical_p(path: PricePath) -> EmpiricalP:
    """Occupation-time estimate of P(C1 < C2) over the window."""
    if path.horizon <= 0:
        raise ValueError("path must cover a positive horizon")
    w = path.segment_durations()
    gap = path.c1 - path.c2
    below = float(np.sum(w[gap < 0]) / path.horizon)
    tie = float(np.sum(w[gap == 0]) / path.horizon)
    return EmpiricalP(p=below, tie_fraction=tie)


def stationary_rates(params: FlockParams, p: float = 0.5) -> np.ndarray:
    """First-order stationary event rates per component, (I - K)^-1 mu with the
    signed branching matrix.  The flocking gate is treated as independent of the
    intensity level, so this is an approximation used for horizon sizing."""
    q = params
    b1, b2 = q.beta1, q.beta2
    K = np.array([
        [q.alpha1s / b1, q.alpha1c / b1, p * q.alpha1w / b1, p * q.alpha1n / b1],
        [q.alpha1c / b1, q.alpha1s / b1, (1 - p) * q.alpha1n / b1, (1 - p) * q.alpha1w / b1],
        [(1 - p) * q.alpha2w / b2, (1 - p) * q.alpha2n / b2, q.alpha2s / b2, q.alpha2c / b2],
        [p * q.alpha2n / b2, p * q.alpha2w / b2, q.alpha2c / b2, q.alpha2s / b2],
    ])
    rates = np.linalg.solve(np.eye(4) - K, params.mu_vector())
    if np.any(rates <= 0):
        raise ValueError("non-positive stationary rates; parameters look unstable")
    return rates


@dataclass(frozen=True)
class RiskSummary:
    """Branching matrix, spectral radius, quarter-wise ratios, and p."""

    matrix: np.ndarray
    rho: float
    ratios: QuarterRatios
    p: float

    @property
    def stable(self) -> bool:
        return self.rho < 1.0


def risk_summary(params: FlockParams, p: float = 0.5,
                 path: PricePath | None = None) -> RiskSummary:
    """Bundle the risk metrics; p can be supplied or measured from a price path."""
    if path is not None:
        p = empirical_p(path).p
    return RiskSummary(
        matrix=branching_matrix(params, p),
        rho=spectral_radius(params),
        ratios=quarter_ratios(params),
        p=float(p),
    )
