"""Exact simulation of the flocking process by Ogata-style thinning."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import exp

import numpy as np

from .core import EventStream, FlockParams, Mark, PricePath

__all__ = ["SimConfig", "ExplosiveRegimeError", "simulate", "simulate_batch", "price_path"]

INTENSITY_FLOOR = 1e-12  # post-jump clamp so negative jump sizes cannot kill a component


class ExplosiveRegimeError(RuntimeError):
    """Raised when a path exceeds the event cap (spectral radius >= 1 territory)."""


@dataclass(frozen=True)
class SimConfig:
    """One simulation job; identical configs (same seed) give identical paths."""

    params: FlockParams
    horizon: float
    seed: int = 0
    burnin: float | None = None  # None -> 10 / min(beta1, beta2)
    init1: float = 0.0
    init2: float = 0.0
    tick1: float = 1.0
    tick2: float = 1.0
    max_events: int = 10_000_000

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.burnin is not None and self.burnin < 0:
            raise ValueError("burnin must be nonnegative")
        if self.max_events <= 0:
            raise ValueError("max_events must be positive")

    @property
    def effective_burnin(self) -> float:
        if self.burnin is not None:
            return self.burnin
        return 10.0 / min(self.params.beta1, self.params.beta2)


def simulate(cfg: SimConfig, rng: np.random.Generator | None = None) -> EventStream:
    """Draw one path over (0, horizon] after burn-in removal.

    Thinning uses the dominating rate sum_i max(lambda_i, mu_i), which bounds
    the intensity between events both when it decays from above and when a
    negative jump left it below the base level.  The accepted mark is drawn
    proportionally to the four current intensities.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    p = cfg.params
    mu1, mu2, be1, be2 = p.mu1, p.mu2, p.beta1, p.beta2
    a1s, a1c, a1n, a1w = p.alpha1s, p.alpha1c, p.alpha1n, p.alpha1w
    a2s, a2c, a2n, a2w = p.alpha2s, p.alpha2c, p.alpha2n, p.alpha2w

    burnin = cfg.effective_burnin
    total = burnin + cfg.horizon
    cap = cfg.max_events

    # Excess intensities over the base level; lambda(0) = mu.
    r1u = r1d = r2u = r2d = 0.0
    c1, c2 = cfg.init1, cfg.init2
    t = 0.0
    times: list[float] = []
    marks: list[int] = []
    cut = 0           # number of events inside the burn-in prefix
    c1_cut, c2_cut = c1, c2

    while True:
        bound = 2.0 * (mu1 + mu2) + max(r1u, 0.0) + max(r1d, 0.0) + max(r2u, 0.0) + max(r2d, 0.0)
        w = rng.exponential() / bound
        t += w
        if t > total:
            break
        e1 = exp(-be1 * w)
        e2 = exp(-be2 * w)
        r1u *= e1
        r1d *= e1
        r2u *= e2
        r2d *= e2
        l1u = mu1 + r1u
        l1d = mu1 + r1d
        l2u = mu2 + r2u
        l2d = mu2 + r2d

        u = rng.uniform(0.0, bound)
        if u >= l1u + l1d + l2u + l2d:
            continue  # thinned out

        if u < l1u:
            m = 0
        elif u < l1u + l1d:
            m = 1
        elif u < l1u + l1d + l2u:
            m = 2
        else:
            m = 3

        # Intensity jump gated on the pre-move price state.
        if m == 0:
            r1u += a1s
            r1d += a1c
            if c2 < c1:
                r2u += a2w
            elif c2 > c1:
                r2d += a2n
            c1 += cfg.tick1
        elif m == 1:
            r1u += a1c
            r1d += a1s
            if c2 < c1:
                r2u += a2n
            elif c2 > c1:
                r2d += a2w
            c1 -= cfg.tick1
        elif m == 2:
            if c1 < c2:
                r1u += a1w
            elif c1 > c2:
                r1d += a1n
            r2u += a2s
            r2d += a2c
            c2 += cfg.tick2
        else:
            if c1 < c2:
                r1u += a1n
            elif c1 > c2:
                r1d += a1w
            r2u += a2c
            r2d += a2s
            c2 -= cfg.tick2

        r1u = max(r1u, INTENSITY_FLOOR - mu1)
        r1d = max(r1d, INTENSITY_FLOOR - mu1)
        r2u = max(r2u, INTENSITY_FLOOR - mu2)
        r2d = max(r2d, INTENSITY_FLOOR - mu2)

        times.append(t)
        marks.append(m)
        if t <= burnin:
            cut += 1
            c1_cut, c2_cut = c1, c2
        if len(times) > cap:
            raise ExplosiveRegimeError(
                f"event cap {cap} exceeded at t={t:.6g}; parameters look explosive"
            )

    times_arr = np.asarray(times[cut:], dtype=float) - burnin
    marks_arr = np.asarray(marks[cut:], dtype=np.int64)
    return EventStream(times=times_arr, marks=marks_arr, horizon=cfg.horizon,
                       init1=c1_cut, init2=c2_cut, tick1=cfg.tick1, tick2=cfg.tick2)


def simulate_batch(cfg: SimConfig, n_paths: int) -> list[EventStream]:
    """Independent paths with per-path generator streams derived from (seed, index)."""
    if n_paths <= 0:
        raise ValueError("n_paths must be positive")
    seeds = np.random.SeedSequence(cfg.seed).spawn(n_paths)
    return [simulate(cfg, rng=np.random.default_rng(s)) for s in seeds]


def path_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for path `index` of a batch, reproducible independent of workers."""
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(index + 1)[index])


def price_path(stream: EventStream) -> PricePath:
    """Reconstruct the piecewise-constant tick paths from the event stream."""
    d1 = np.where(stream.marks == Mark.UP1, stream.tick1, 0.0) \
        - np.where(stream.marks == Mark.DOWN1, stream.tick1, 0.0)
    d2 = np.where(stream.marks == Mark.UP2, stream.tick2, 0.0) \
        - np.where(stream.marks == Mark.DOWN2, stream.tick2, 0.0)
    times = np.concatenate(([0.0], stream.times))
    c1 = stream.init1 + np.concatenate(([0.0], np.cumsum(d1)))
    c2 = stream.init2 + np.concatenate(([0.0], np.cumsum(d2)))
    return PricePath(times=times, c1=c1, c2=c2, horizon=stream.horizon)
