"""Core model types: parameters, marked event streams, and exact intensity evaluation.

The model couples two tick-level price processes C1, C2 through a
four-component counting process (up/down moves of each asset).  Each
component's intensity decays exponentially toward a base level and jumps
when events arrive; the cross-asset jump sizes are gated by the sign of
C1 - C2, which is what pulls the two prices toward each other.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

__all__ = [
    "Mark",
    "FlockParams",
    "EventStream",
    "IntensityState",
    "IntensityPath",
    "PricePath",
    "PARAM_NAMES",
    "decay",
    "jump",
    "intensity_path",
]

# Canonical parameter order, also the key order of the flat JSON format.
PARAM_NAMES = (
    "mu1", "beta1", "alpha1s", "alpha1c", "alpha1n", "alpha1w",
    "mu2", "beta2", "alpha2s", "alpha2c", "alpha2n", "alpha2w",
)


class Mark(enum.IntEnum):
    """Event marks, indexed like the components of the counting vector."""

    UP1 = 0
    DOWN1 = 1
    UP2 = 2
    DOWN2 = 3

    @property
    def asset(self) -> int:
        return 1 if self < 2 else 2

    @property
    def direction(self) -> int:
        """+1 for an up move, -1 for a down move."""
        return 1 if self in (Mark.UP1, Mark.UP2) else -1

    @property
    def label(self) -> str:
        return _MARK_TO_LABEL[self]

    @classmethod
    def from_label(cls, label: str) -> "Mark":
        try:
            return _LABEL_TO_MARK[label.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown mark label {label!r}; expected one of 1u,1d,2u,2d") from None


_MARK_TO_LABEL = {Mark.UP1: "1u", Mark.DOWN1: "1d", Mark.UP2: "2u", Mark.DOWN2: "2d"}
_LABEL_TO_MARK = {v: k for k, v in _MARK_TO_LABEL.items()}


@dataclass(frozen=True)
class FlockParams:
    """The 12-parameter vector of the two-asset model.

    ``mu*`` are base intensities, ``beta*`` decay rates, ``alpha*s``/``alpha*c``
    self/cross jump sizes, and ``alpha*n``/``alpha*w`` the narrowing/widening
    jump sizes triggered by the other asset's moves.
    """

    mu1: float
    beta1: float
    alpha1s: float
    alpha1c: float
    alpha1n: float
    alpha1w: float
    mu2: float
    beta2: float
    alpha2s: float
    alpha2c: float
    alpha2n: float
    alpha2w: float

    def __post_init__(self):
        for name in ("mu1", "mu2", "beta1", "beta2"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0.0:
                raise ValueError(f"{name} must be finite and > 0, got {v}")
        for name in PARAM_NAMES:
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def validated(self) -> bool:
        """True when every jump size is nonnegative.

        Negative alphas can come out of unconstrained estimation; the model
        definition reads them as zero, so callers may want to flag them.
        """
        return all(getattr(self, n) >= 0.0 for n in PARAM_NAMES if n.startswith("alpha"))

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in PARAM_NAMES], dtype=float)

    @classmethod
    def from_array(cls, x) -> "FlockParams":
        x = np.asarray(x, dtype=float)
        if x.shape != (12,):
            raise ValueError(f"expected 12 parameters, got shape {x.shape}")
        return cls(**dict(zip(PARAM_NAMES, x.tolist())))

    def to_dict(self) -> dict:
        return {n: float(getattr(self, n)) for n in PARAM_NAMES}

    @classmethod
    def from_dict(cls, d: dict) -> "FlockParams":
        missing = [n for n in PARAM_NAMES if n not in d]
        extra = [k for k in d if k not in PARAM_NAMES]
        if missing or extra:
            raise ValueError(f"bad parameter keys: missing {missing}, unexpected {extra}")
        return cls(**{n: float(d[n]) for n in PARAM_NAMES})

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "FlockParams":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def mu_vector(self) -> np.ndarray:
        return np.array([self.mu1, self.mu1, self.mu2, self.mu2])

    def beta_vector(self) -> np.ndarray:
        return np.array([self.beta1, self.beta1, self.beta2, self.beta2])

    def jump_matrix(self, c1: float, c2: float) -> np.ndarray:
        """State-dependent 4x4 jump-size matrix; column j is added to the
        intensity vector when an event of mark j occurs at price state (c1, c2)."""
        lt = 1.0 if c1 < c2 else 0.0  # C1 below C2
        gt = 1.0 if c1 > c2 else 0.0  # C1 above C2; both zero on ties
        p = self
        return np.array([
            [p.alpha1s, p.alpha1c, lt * p.alpha1w, lt * p.alpha1n],
            [p.alpha1c, p.alpha1s, gt * p.alpha1n, gt * p.alpha1w],
            [gt * p.alpha2w, gt * p.alpha2n, p.alpha2s, p.alpha2c],
            [lt * p.alpha2n, lt * p.alpha2w, p.alpha2c, p.alpha2s],
        ])

    def jump_column(self, mark: Mark, c1: float, c2: float) -> np.ndarray:
        return self.jump_matrix(c1, c2)[:, int(mark)]


@dataclass(frozen=True)
class EventStream:
    """Time-ordered marked events over a window (0, horizon].

    ``times`` are seconds from the window start, strictly increasing; ``marks``
    hold the Mark index of each event.  ``init1``/``init2`` are the price
    states just before the window opens and ``tick1``/``tick2`` the per-move
    price increments, so the full price paths are reconstructible.
    """

    times: np.ndarray
    marks: np.ndarray
    horizon: float
    init1: float = 0.0
    init2: float = 0.0
    tick1: float = 1.0
    tick2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "marks", np.asarray(self.marks, dtype=np.int64))
        self.validate()

    def validate(self) -> None:
        t, m = self.times, self.marks
        if t.ndim != 1 or m.shape != t.shape:
            raise ValueError("times and marks must be 1-d arrays of equal length")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if len(t):
            if t[0] <= 0 or t[-1] > self.horizon:
                raise ValueError("event times must lie in (0, horizon]")
            if np.any(np.diff(t) <= 0):
                raise ValueError("event times must be strictly increasing")
            if m.min() < 0 or m.max() > 3:
                raise ValueError("marks must be in {0,1,2,3}")

    def __len__(self) -> int:
        return len(self.times)

    def counts(self) -> np.ndarray:
        """Event count per mark component."""
        return np.bincount(self.marks, minlength=4)

    @cached_property
    def prices_before(self) -> tuple[np.ndarray, np.ndarray]:
        """Price states (c1, c2) at the left limit of each event time."""
        d1 = np.where(self.marks == Mark.UP1, self.tick1, 0.0) - np.where(self.marks == Mark.DOWN1, self.tick1, 0.0)
        d2 = np.where(self.marks == Mark.UP2, self.tick2, 0.0) - np.where(self.marks == Mark.DOWN2, self.tick2, 0.0)
        c1 = self.init1 + np.concatenate(([0.0], np.cumsum(d1)[:-1]))
        c2 = self.init2 + np.concatenate(([0.0], np.cumsum(d2)[:-1]))
        return c1, c2

    @cached_property
    def signs_before(self) -> np.ndarray:
        """sign(C1 - C2) at the left limit of each event; 0 on exact ties."""
        c1, c2 = self.prices_before
        return np.sign(c1 - c2).astype(np.int64)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("time,mark\n")
            for t, m in zip(self.times, self.marks):
                fh.write(f"{float(t)!r},{_MARK_TO_LABEL[Mark(m)]}\n")

    @classmethod
    def from_csv(cls, path, horizon: float | None = None, *, init1=0.0, init2=0.0,
                 tick1=1.0, tick2=1.0) -> "EventStream":
        times, marks = [], []
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip().lower()
            if header.split(",")[:2] != ["time", "mark"]:
                raise ValueError(f"{path}: expected header 'time,mark', got {header!r}")
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                t_s, m_s = line.split(",")[:2]
                times.append(float(t_s))
                marks.append(int(Mark.from_label(m_s)))
        times = np.asarray(times, dtype=float)
        if horizon is None:
            horizon = float(times[-1]) if len(times) else 1.0
        return cls(times=times, marks=np.asarray(marks), horizon=horizon,
                   init1=init1, init2=init2, tick1=tick1, tick2=tick2)


@dataclass(frozen=True)
class PricePath:
    """Piecewise-constant tick-level paths; value index k applies on [times[k], times[k+1])."""

    times: np.ndarray      # includes 0.0 as the first knot
    c1: np.ndarray
    c2: np.ndarray
    horizon: float

    def at(self, t: float) -> tuple[float, float]:
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        k = max(k, 0)
        return float(self.c1[k]), float(self.c2[k])

    def segment_durations(self) -> np.ndarray:
        edges = np.append(self.times, self.horizon)
        return np.diff(edges)

    def time_average_abs_gap(self) -> float:
        """Time average of |C1 - C2| over [0, horizon]."""
        w = self.segment_durations()
        return float(np.sum(np.abs(self.c1 - self.c2) * w) / self.horizon)


@dataclass(frozen=True)
class IntensityState:
    """Current intensity 4-vector plus the price state it refers to."""

    lam: np.ndarray
    last_time: float
    c1: float
    c2: float

    def __post_init__(self):
        object.__setattr__(self, "lam", np.asarray(self.lam, dtype=float))
        if self.lam.shape != (4,):
            raise ValueError("lam must be a 4-vector")


def decay(state: IntensityState, params: FlockParams, dt: float) -> IntensityState:
    """Relax intensities toward the base level over dt; prices unchanged."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    mu = params.mu_vector()
    lam = mu + (state.lam - mu) * np.exp(-params.beta_vector() * dt)
    return replace(state, lam=lam, last_time=state.last_time + dt)


def jump(state: IntensityState, params: FlockParams, mark: Mark,
         tick1: float = 1.0, tick2: float = 1.0) -> IntensityState:
    """Apply an event of the given mark: intensity jump, then the tick move.

    The narrowing/widening gates are evaluated on the price state *before*
    the move, matching the left-continuous intensity convention.
    """
    mark = Mark(mark)
    lam = state.lam + params.jump_column(mark, state.c1, state.c2)
    c1, c2 = state.c1, state.c2
    if mark.asset == 1:
        c1 += mark.direction * tick1
    else:
        c2 += mark.direction * tick2
    return replace(state, lam=lam, c1=c1, c2=c2)


@dataclass(frozen=True)
class IntensityPath:
    """Exact intensity sample path: left limits and post-jump values at event times."""

    stream: EventStream
    params: FlockParams
    lam_left: np.ndarray    # (n, 4) intensity just before each event
    lam_right: np.ndarray   # (n, 4) intensity just after each event

    def at(self, t: float) -> np.ndarray:
        """Intensity vector at time t (left-continuous at event times)."""
        mu = self.params.mu_vector()
        beta = self.params.beta_vector()
        k = int(np.searchsorted(self.stream.times, t, side="left")) - 1
        if k < 0:
            return mu + 0.0 * mu  # lambda(0) = mu, no history before the window
        t_k = self.stream.times[k]
        return mu + (self.lam_right[k] - mu) * np.exp(-beta * (t - t_k))


def intensity_path(stream: EventStream, params: FlockParams) -> IntensityPath:
    """Exact left limits / right limits of the intensity at every event time.

    Uses the Markov recursion (decay between events, jump at events) with
    lambda(0) = mu; no discretization is involved.
    """
    n = len(stream)
    mu = params.mu_vector()
    beta = params.beta_vector()
    c1s, c2s = stream.prices_before
    lam_left = np.empty((n, 4))
    lam_right = np.empty((n, 4))
    lam = mu.copy()
    t_prev = 0.0
    for k in range(n):
        t_k = stream.times[k]
        lam = mu + (lam - mu) * np.exp(-beta * (t_k - t_prev))
        lam_left[k] = lam
        lam = lam + params.jump_column(Mark(stream.marks[k]), c1s[k], c2s[k])
        lam_right[k] = lam
        t_prev = t_k
    return IntensityPath(stream=stream, params=params, lam_left=lam_left, lam_right=lam_right)
