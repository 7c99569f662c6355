"""Turn raw paired tick files into model-ready event streams.

Three wrangling rules are applied on the way in: (i) window-wise sample-mean
level adjustment so the two prices are comparable, (ii) equidistant spreading
of multiple changes stamped inside one second, (iii) cross-asset tie breaking
by a sub-resolution offset.  Multi-tick moves are split into unit marks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import EventStream, Mark

__all__ = [
    "RawTickSeries",
    "AdjustConfig",
    "AdjustmentInfo",
    "MergedChanges",
    "IngestReport",
    "NoOverlapError",
    "NonTickMoveError",
    "ResidualTieError",
    "load_ticks",
    "write_ticks",
    "adjust_levels",
    "price_changes",
    "spread_subsecond",
    "deconflict",
    "to_events",
    "ingest_pair",
]

DECONFLICT_EPS = 1e-6  # seconds; below data resolution, above float noise


class NoOverlapError(ValueError):
    """The two series never share an adjustment window."""


class NonTickMoveError(ValueError):
    """A price change is not an integer number of ticks."""


class ResidualTieError(ValueError):
    """Strict ordering could not be restored after tie-breaking."""


@dataclass(frozen=True)
class RawTickSeries:
    """Trade-price observations: seconds (from epoch or day start) and price levels."""

    times: np.ndarray
    prices: np.ndarray
    tick: float
    instrument: str = ""

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "prices", np.asarray(self.prices, dtype=float))
        if self.times.ndim != 1 or self.prices.shape != self.times.shape:
            raise ValueError("times and prices must be 1-d arrays of equal length")
        if len(self.times) and np.any(np.diff(self.times) < 0):
            raise ValueError("timestamps must be non-decreasing")
        if self.tick <= 0:
            raise ValueError("tick must be positive")

    def __len__(self) -> int:
        return len(self.times)


def load_ticks(path, tick: float, instrument: str = "") -> tuple[RawTickSeries, int]:
    """Read a `timestamp_ms,price` CSV; returns the series and the count of
    dropped rows (unparsable, non-finite, or non-positive prices)."""
    times, prices = [], []
    dropped = 0
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().lower()
        if header.split(",")[:2] != ["timestamp_ms", "price"]:
            raise ValueError(f"{path}: expected header 'timestamp_ms,price', got {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                t_s, p_s = line.split(",")[:2]
                t, p = float(t_s) / 1000.0, float(p_s)
            except ValueError:
                dropped += 1
                continue
            if not (math.isfinite(t) and math.isfinite(p)) or p <= 0:
                dropped += 1
                continue
            times.append(t)
            prices.append(p)
    return RawTickSeries(np.asarray(times), np.asarray(prices), tick, instrument), dropped


def write_ticks(path, times_s, prices) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("timestamp_ms,price\n")
        for t, p in zip(times_s, prices):
            fh.write(f"{int(round(t * 1000.0))},{float(p)!r}\n")


# --- rule (i): price-level adjustment ----------------------------------------


@dataclass(frozen=True)
class AdjustConfig:
    window: float = 600.0   # seconds per sample-mean window
    scale_target: int = 2   # which series gets rescaled

    def __post_init__(self):
        if self.window <= 0:
            raise ValueError("window must be positive")
        if self.scale_target not in (1, 2):
            raise ValueError("scale_target must be 1 or 2")


@dataclass(frozen=True)
class AdjustmentInfo:
    """Per-group window spans and the sample-mean ratios applied."""

    starts: np.ndarray
    stops: np.ndarray
    ratios: np.ndarray


def adjust_levels(x: RawTickSeries, y: RawTickSeries,
                  cfg: AdjustConfig = AdjustConfig()) -> tuple[RawTickSeries, RawTickSeries, AdjustmentInfo]:
    """Rescale one series by the window-wise sample-mean ratio of the other.

    Windows missing either series are merged forward into the next one; a
    dangling tail with one-sided data inherits the last complete ratio.
    """
    if not len(x) or not len(y):
        raise NoOverlapError("both series must be non-empty")
    t0 = min(x.times[0], y.times[0])
    t1 = max(x.times[-1], y.times[-1])
    n_win = max(1, int(math.ceil((t1 - t0) / cfg.window + 1e-12)))
    edges = t0 + cfg.window * np.arange(n_win + 1)
    edges[-1] = np.nextafter(t1, np.inf)  # last window closed on the right

    xw = np.clip(np.searchsorted(edges, x.times, side="right") - 1, 0, n_win - 1)
    yw = np.clip(np.searchsorted(edges, y.times, side="right") - 1, 0, n_win - 1)

    starts, stops, ratios = [], [], []
    grp_x, grp_y = [], []
    grp_start = edges[0]
    for w in range(n_win):
        grp_x.append(x.prices[xw == w])
        grp_y.append(y.prices[yw == w])
        nx = sum(len(g) for g in grp_x)
        ny = sum(len(g) for g in grp_y)
        if nx > 0 and ny > 0:
            xbar = float(np.mean(np.concatenate(grp_x)))
            ybar = float(np.mean(np.concatenate(grp_y)))
            starts.append(grp_start)
            stops.append(edges[w + 1])
            ratios.append(xbar / ybar)
            grp_x, grp_y = [], []
            grp_start = edges[w + 1]
    if not ratios:
        raise NoOverlapError("no adjustment window contains both series")
    if sum(len(g) for g in grp_x) or sum(len(g) for g in grp_y):
        stops[-1] = edges[-1]  # dangling one-sided tail keeps the last ratio

    info = AdjustmentInfo(np.asarray(starts), np.asarray(stops), np.asarray(ratios))

    def rescale(series: RawTickSeries, invert: bool) -> RawTickSeries:
        w = np.clip(np.searchsorted(info.stops, series.times, side="right"), 0, len(ratios) - 1)
        r = info.ratios[w]
        if invert:
            r = 1.0 / r
        return RawTickSeries(series.times, series.prices * r, series.tick, series.instrument)

    if cfg.scale_target == 2:
        return x, rescale(y, invert=False), info
    return rescale(x, invert=True), y, info


# --- rule (ii): sub-second spreading ------------------------------------------


def price_changes(series: RawTickSeries) -> RawTickSeries:
    """Rows where the price actually moved; the first row is the baseline."""
    if len(series) == 0:
        return series
    moved = np.concatenate(([False], np.diff(series.prices) != 0.0))
    return RawTickSeries(series.times[moved], series.prices[moved],
                         series.tick, series.instrument)


def spread_subsecond(series: RawTickSeries) -> RawTickSeries:
    """Re-stamp k same-second changes to the equidistant grid t + j/k, j = 0..k-1.

    Buckets whose stamps are already strictly increasing (genuine sub-second
    resolution) are left alone; a single change in a second is unchanged.
    """
    if len(series) < 2:
        return series
    t = series.times.copy()
    secs = np.floor(t)
    out = t.copy()
    i = 0
    n = len(t)
    while i < n:
        j = i + 1
        while j < n and secs[j] == secs[i]:
            j += 1
        k = j - i
        if k > 1 and np.any(np.diff(t[i:j]) <= 0):
            out[i:j] = secs[i] + np.arange(k) / k
        i = j
    return RawTickSeries(out, series.prices, series.tick, series.instrument)


# --- rule (iii): cross-asset tie breaking -------------------------------------


@dataclass(frozen=True)
class MergedChanges:
    """Strictly ordered union of both assets' change observations."""

    times: np.ndarray
    assets: np.ndarray   # 1 or 2 per row
    prices: np.ndarray


def deconflict(a: RawTickSeries, b: RawTickSeries, eps: float = DECONFLICT_EPS) -> MergedChanges:
    """Merge the per-asset change lists; exact cross-asset ties push asset 2
    later by eps.  Raises ResidualTieError if strict ordering still fails."""
    tb = b.times.copy()
    clash = np.isin(tb, a.times)
    tb[clash] += eps
    times = np.concatenate([a.times, tb])
    assets = np.concatenate([np.ones(len(a), dtype=np.int64), np.full(len(b), 2, dtype=np.int64)])
    prices = np.concatenate([a.prices, b.prices])
    order = np.lexsort((assets, times))
    times, assets, prices = times[order], assets[order], prices[order]
    if len(times) > 1 and np.any(np.diff(times) <= 0):
        raise ResidualTieError("event times not strictly ordered after tie-breaking")
    return MergedChanges(times, assets, prices)


# --- mark extraction ----------------------------------------------------------


def to_events(merged: MergedChanges, *, init_a: float, init_b: float,
              tick_a: float, tick_b: float, t_start: float, horizon: float,
              out_init1: float | None = None, out_init2: float | None = None,
              out_tick1: float | None = None, out_tick2: float | None = None) -> EventStream:
    """Emit one up/down mark per tick move, splitting an m-tick change into m
    marks spaced evenly through the gap since the asset's previous observation.

    The output stream's init/tick metadata defaults to the inputs but can be
    overridden (the ingest pipeline substitutes level-adjusted values there).
    """
    run_price = {1: init_a, 2: init_b}
    prev_time = {1: t_start, 2: t_start}
    tick = {1: tick_a, 2: tick_b}
    up = {1: Mark.UP1, 2: Mark.UP2}
    down = {1: Mark.DOWN1, 2: Mark.DOWN2}

    times: list[float] = []
    marks: list[int] = []
    for t, asset, p in zip(merged.times, merged.assets, merged.prices):
        asset = int(asset)
        delta = p - run_price[asset]
        steps = delta / tick[asset]
        m = int(round(steps))
        if abs(delta - m * tick[asset]) > 1e-9:
            raise NonTickMoveError(
                f"asset {asset} moved {delta!r} at t={t!r}, not a tick multiple of {tick[asset]!r}")
        if m != 0:
            mark = up[asset] if m > 0 else down[asset]
            gap_start = prev_time[asset]
            for j in range(1, abs(m) + 1):
                times.append(gap_start + (t - gap_start) * j / abs(m))
                marks.append(int(mark))
        run_price[asset] = p
        prev_time[asset] = t

    times_arr = np.asarray(times, dtype=float)
    marks_arr = np.asarray(marks, dtype=np.int64)
    order = np.argsort(times_arr, kind="stable")
    times_arr, marks_arr = times_arr[order], marks_arr[order]
    # Restore strictness after splitting at float-coincident points.
    floor = t_start
    for i in range(len(times_arr)):
        if times_arr[i] <= floor:
            times_arr[i] = np.nextafter(floor, np.inf)
        floor = times_arr[i]

    return EventStream(
        times=times_arr - t_start, marks=marks_arr, horizon=horizon,
        init1=init_a if out_init1 is None else out_init1,
        init2=init_b if out_init2 is None else out_init2,
        tick1=tick_a if out_tick1 is None else out_tick1,
        tick2=tick_b if out_tick2 is None else out_tick2,
    )


# --- full pipeline ------------------------------------------------------------


@dataclass(frozen=True)
class IngestReport:
    """Sidecar metadata: what the pipeline did to the raw files."""

    t_start: float
    horizon: float
    window_starts: list = field(default_factory=list)
    window_stops: list = field(default_factory=list)
    window_ratios: list = field(default_factory=list)
    mark_counts: dict = field(default_factory=dict)
    dropped_rows: dict = field(default_factory=dict)
    tick1: float = 1.0
    tick2: float = 1.0
    init1: float = 0.0
    init2: float = 0.0

    def to_dict(self) -> dict:
        return {
            "t_start": self.t_start,
            "horizon": self.horizon,
            "windows": [
                {"start": s, "stop": e, "ratio": r}
                for s, e, r in zip(self.window_starts, self.window_stops, self.window_ratios)
            ],
            "mark_counts": self.mark_counts,
            "dropped_rows": self.dropped_rows,
            "tick1": self.tick1, "tick2": self.tick2,
            "init1": self.init1, "init2": self.init2,
        }

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


def ingest_pair(x: RawTickSeries, y: RawTickSeries,
                cfg: AdjustConfig = AdjustConfig(),
                dropped: tuple[int, int] = (0, 0)) -> tuple[EventStream, IngestReport]:
    """Run the whole wrangling pipeline on one trading window of paired ticks.

    Marks are counted off the raw tick grids (adjacent-window ratio changes are
    level artifacts, not trades); the level adjustment enters through the output
    stream's init values and the rescaled tick of the adjusted series, recorded
    in the report.
    """
    if len(x) < 2 or len(y) < 2:
        raise ValueError("need at least two observations per series")
    _, _, info = adjust_levels(x, y, cfg)

    t_start = min(x.times[0], y.times[0])
    t_end = max(x.times[-1], y.times[-1])
    if t_end <= t_start:
        raise ValueError("window has no positive time span")

    cx = spread_subsecond(price_changes(x))
    cy = spread_subsecond(price_changes(y))
    merged = deconflict(cx, cy)

    overall = float(np.mean(x.prices) / np.mean(y.prices))
    if cfg.scale_target == 2:
        init1, tick1 = float(x.prices[0]), x.tick
        init2, tick2 = float(info.ratios[0] * y.prices[0]), overall * y.tick
    else:
        init1, tick1 = float(x.prices[0] / info.ratios[0]), x.tick / overall
        init2, tick2 = float(y.prices[0]), y.tick

    stream = to_events(
        merged, init_a=float(x.prices[0]), init_b=float(y.prices[0]),
        tick_a=x.tick, tick_b=y.tick, t_start=t_start, horizon=t_end - t_start,
        out_init1=init1, out_init2=init2, out_tick1=tick1, out_tick2=tick2,
    )
    counts = stream.counts()
    report = IngestReport(
        t_start=t_start, horizon=t_end - t_start,
        window_starts=info.starts.tolist(), window_stops=info.stops.tolist(),
        window_ratios=info.ratios.tolist(),
        mark_counts={m.label: int(counts[m]) for m in Mark},
        dropped_rows={"series1": dropped[0], "series2": dropped[1]},
        tick1=tick1, tick2=tick2, init1=init1, init2=init2,
    )
    return stream, report
