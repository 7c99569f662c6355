"""Command-line pipelines: simulate, table1, ingest, estimate, risk, covar, pipeline.

Every run writes a manifest (effective config, input/output digests, wall
time).  `HAWKESFLOCK_SEED` overrides any configured seed.  Exit codes: 0 ok,
1 runtime failure, 2 usage or config-schema error, 3 explosive regime.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import covar as covar_mod
from . import estimate as est_mod
from . import ingest as ingest_mod
from . import risk as risk_mod
from . import sim as sim_mod
from .copulas import FAMILIES
from .core import EventStream, FlockParams
from .reference import RECOVERY_COLUMNS, recovery_tolerance

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_EXPLOSIVE = 3


class ConfigError(ValueError):
    """Bad flag/config combination detected before touching data."""


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _env_seed(seed: int) -> int:
    env = os.environ.get("HAWKESFLOCK_SEED")
    return int(env) if env else seed


def _apply_config_file(args: argparse.Namespace, parser_defaults: dict) -> None:
    """Config precedence: explicit CLI flag > config file > built-in default."""
    if not getattr(args, "config", None):
        return
    with open(args.config, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ConfigError("--config must hold a JSON object")
    for key, value in cfg.items():
        attr = key.replace("-", "_")
        if attr not in parser_defaults:
            raise ConfigError(f"unknown config key {key!r}")
        if getattr(args, attr) == parser_defaults[attr]:  # flag left at default
            setattr(args, attr, value)


def _write_manifest(out_dir: Path, command: str, config: dict, inputs: list[Path],
                    outputs: list[Path], t0: float, errors: list | None = None) -> Path:
    manifest = {
        "command": command,
        "config": config,
        "seed": config.get("seed"),
        "inputs": [{"path": str(p), "sha256": _sha256(p)} for p in inputs],
        "outputs": [{"path": str(p), "sha256": _sha256(p)} for p in outputs],
        "errors": errors or [],
        "wall_time_s": round(time.time() - t0, 3),
    }
    path = out_dir / "manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _load_params(path: str) -> FlockParams:
    try:
        return FlockParams.from_json(path)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"parameter file {path}: {exc}") from exc


# --- simulate ----------------------------------------------------------------------


def _simulate_one(job):
    cfg, index = job
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(index + 1)[index])
    try:
        return sim_mod.simulate(cfg, rng=rng), None
    except sim_mod.ExplosiveRegimeError as exc:
        return None, str(exc)


def cmd_simulate(args) -> int:
    t0 = time.time()
    if args.paths <= 0:
        raise ConfigError("--paths must be a positive integer")
    params = _load_params(args.params)
    seed = _env_seed(args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = sim_mod.SimConfig(params=params, horizon=args.horizon, seed=seed,
                            burnin=args.burnin, init1=args.init1, init2=args.init2,
                            max_events=args.max_events)

    jobs = [(cfg, i) for i in range(args.paths)]
    if args.jobs > 1 and args.paths > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_simulate_one, jobs))
    else:
        results = [_simulate_one(j) for j in jobs]

    outputs, errors = [], []
    for i, (stream, err) in enumerate(results):
        if err is not None:
            errors.append({"path_index": i, "error": "explosive regime", "detail": err})
            continue
        path = out_dir / f"events_{i:04d}.csv"
        stream.to_csv(path)
        outputs.append(path)

    config = {"params": params.to_dict(), "horizon": args.horizon, "paths": args.paths,
              "seed": seed, "burnin": args.burnin, "init1": args.init1,
              "init2": args.init2, "max_events": args.max_events}
    _write_manifest(out_dir, "simulate", config, [Path(args.params)], outputs, t0, errors)
    print(f"simulate: wrote {len(outputs)} event files to {out_dir}"
          + (f" ({len(errors)} explosive paths)" if errors else ""))
    return EXIT_EXPLOSIVE if errors else EXIT_OK


# --- table1 (simulation-recovery benchmark) -----------------------------------------


def _recover_one(job):
    cfg, index, model = job
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(index + 1)[index])
    stream = sim_mod.simulate(cfg, rng=rng)
    res = est_mod.fit(stream, model=model, compute_stderr=False)
    return res.params.as_array()


def recovery_study(column: int, n_paths: int, seed: int, jobs: int = 1,
                   horizon: float | None = None, target_events: float = 1e4):
    """Simulate n_paths from a reference column and re-estimate each one."""
    ref = RECOVERY_COLUMNS[column]
    params: FlockParams = ref["params"]
    if horizon is None:
        total_rate = float(np.sum(risk_mod.stationary_rates(params)))
        horizon = float(target_events / total_rate)
    # burnin 0: the estimator's lambda(0) = mu start then matches the generator exactly
    cfg = sim_mod.SimConfig(params=params, horizon=horizon, seed=seed, burnin=0.0)
    jobs_list = [(cfg, i, est_mod.MODEL_FLOCKING) for i in range(n_paths)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            estimates = list(pool.map(_recover_one, jobs_list))
    else:
        estimates = [_recover_one(j) for j in jobs_list]
    return np.vstack(estimates), horizon


def cmd_table1(args) -> int:
    t0 = time.time()
    if args.column not in RECOVERY_COLUMNS:
        raise ConfigError("--column must be 1, 2, or 3")
    if args.paths <= 0:
        raise ConfigError("--paths must be positive")
    seed = _env_seed(args.seed)
    est, horizon = recovery_study(args.column, args.paths, seed, jobs=args.jobs,
                                  horizon=args.horizon)
    ref = RECOVERY_COLUMNS[args.column]
    true = ref["params"].as_array()
    tol = recovery_tolerance(args.column, args.paths)
    mean = est.mean(axis=0)
    std = est.std(axis=0, ddof=1)

    from .core import PARAM_NAMES
    ok_all = True
    print(f"column {args.column}: {args.paths} paths, horizon {horizon:.0f}")
    print(f"{'param':>8} {'True':>9} {'Mean':>9} {'Std.':>9}  within")
    rows = []
    for i, name in enumerate(PARAM_NAMES):
        ok = abs(mean[i] - true[i]) <= tol[i]
        ok_all &= ok
        print(f"{name:>8} {true[i]:9.4f} {mean[i]:9.4f} {std[i]:9.4f}  "
              f"{'ok' if ok else 'FAIL'} (|diff| {abs(mean[i]-true[i]):.4f} <= {tol[i]:.4f})")
        rows.append({"param": name, "true": true[i], "mean": mean[i], "std": std[i],
                     "tolerance": tol[i], "ok": bool(ok)})
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8") as fh:
            json.dump({"column": args.column, "paths": args.paths, "seed": seed,
                       "horizon": horizon, "rows": rows, "passed": bool(ok_all)},
                      fh, indent=2)
            fh.write("\n")
        _write_manifest(out.parent, "table1",
                        {"column": args.column, "paths": args.paths, "seed": seed,
                         "horizon": horizon}, [], [out], t0)
    print("PASS" if ok_all else "FAIL")
    return EXIT_OK if ok_all else EXIT_FAIL


# --- ingest -------------------------------------------------------------------------


def cmd_ingest(args) -> int:
    t0 = time.time()
    x, dropped_x = ingest_mod.load_ticks(args.x, tick=args.tick1, instrument="1")
    y, dropped_y = ingest_mod.load_ticks(args.y, tick=args.tick2, instrument="2")
    cfg = ingest_mod.AdjustConfig(window=args.window, scale_target=args.scale_target)
    stream, report = ingest_mod.ingest_pair(x, y, cfg, dropped=(dropped_x, dropped_y))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    stream.to_csv(out)
    sidecar = Path(args.sidecar) if args.sidecar else out.with_suffix(out.suffix + ".json")
    report.to_json(sidecar)
    _write_manifest(out.parent, "ingest",
                    {"x": args.x, "y": args.y, "tick1": args.tick1, "tick2": args.tick2,
                     "window": args.window, "scale_target": args.scale_target},
                    [Path(args.x), Path(args.y)], [out, sidecar], t0)
    print(f"ingest: {len(stream)} events -> {out}")
    return EXIT_OK


# --- estimate -----------------------------------------------------------------------


def _stream_from_csv(path: Path, horizon: float | None) -> EventStream:
    if horizon is None:
        sidecar = path.parent / "manifest.json"
        if sidecar.exists():
            with open(sidecar, "r", encoding="utf-8") as fh:
                horizon = json.load(fh).get("config", {}).get("horizon")
    return EventStream.from_csv(path, horizon=horizon)


def cmd_estimate(args) -> int:
    t0 = time.time()
    if args.model not in (est_mod.MODEL_FLOCKING, est_mod.MODEL_SYMMETRIC):
        raise ConfigError("--model must be flocking or symmetric")
    init = _load_params(args.init) if args.init else None
    paths = [Path(p) for p in args.events]
    if not paths:
        raise ConfigError("no event files given")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    errors = []
    for path in paths:
        try:
            stream = _stream_from_csv(path, args.horizon)
            res = est_mod.fit(stream, model=args.model, init=init,
                              max_iter=args.max_iter, floor_events=args.floor_events)
            row = res.to_dict()
            row["source"] = str(path)
            row["date"] = path.stem
            pp = sim_mod.price_path(stream)
            row["p"] = risk_mod.empirical_p(pp).p
            lines.append(json.dumps(row))
        except Exception as exc:
            errors.append({"source": str(path), "error": f"{type(exc).__name__}: {exc}"})
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + ("\n" if lines else ""))
    _write_manifest(out.parent, "estimate",
                    {"model": args.model, "max_iter": args.max_iter,
                     "floor_events": args.floor_events, "horizon": args.horizon},
                    paths, [out], t0, errors)
    print(f"estimate: {len(lines)} fits ({len(errors)} failures) -> {out}")
    return EXIT_OK if lines else EXIT_FAIL


# --- risk ---------------------------------------------------------------------------


def risk_rows_from_jsonl(path: Path) -> list[dict]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            fit = est_mod.FitResult.from_dict(rec)
            summary = risk_mod.risk_summary(fit.params, p=rec.get("p", 0.5))
            rows.append({
                "date": rec.get("date", rec.get("source", str(i))),
                "rho": summary.rho,
                "q11": summary.ratios.q11, "q22": summary.ratios.q22,
                "q12": summary.ratios.q12, "q21": summary.ratios.q21,
                "p": summary.p,
            })
    return rows


def _write_risk_csv(rows: list[dict], out: Path) -> None:
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("date,rho,q11,q22,q12,q21,p\n")
        for r in rows:
            fh.write(f"{r['date']},{r['rho']:.10g},{r['q11']:.10g},{r['q22']:.10g},"
                     f"{r['q12']:.10g},{r['q21']:.10g},{r['p']:.10g}\n")


def cmd_risk(args) -> int:
    t0 = time.time()
    rows = risk_rows_from_jsonl(Path(args.fits))
    if not rows:
        raise ConfigError(f"{args.fits} holds no fit records")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    _write_risk_csv(rows, out)
    _write_manifest(out.parent, "risk", {"fits": args.fits}, [Path(args.fits)], [out], t0)
    print(f"risk: {len(rows)} rows -> {out}")
    return EXIT_OK


# --- covar --------------------------------------------------------------------------


def _read_close_csv(path: Path) -> tuple[list[str], np.ndarray, np.ndarray]:
    dates, c1, c2 = [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().lower()
        if header.split(",")[:3] != ["date", "close1", "close2"]:
            raise ConfigError(f"{path}: expected header 'date,close1,close2'")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d, a, b = line.split(",")[:3]
            dates.append(d)
            c1.append(float(a))
            c2.append(float(b))
    return dates, np.asarray(c1), np.asarray(c2)


def cmd_covar(args) -> int:
    t0 = time.time()
    families = tuple(f.strip() for f in args.families.split(",") if f.strip())
    bad = [f for f in families if f not in FAMILIES]
    if bad:
        raise ConfigError(f"unknown copula families {bad}; choose from {FAMILIES}")
    if args.marginal not in ("empirical", "tgarch"):
        raise ConfigError("--marginal must be empirical or tgarch")
    dates, c1, c2 = _read_close_csv(Path(args.prices))
    r1 = covar_mod.simple_returns(c1)
    r2 = covar_mod.simple_returns(c2)
    series = covar_mod.rolling_covar(r1, r2, window=args.window, alpha=args.alpha,
                                     beta=args.beta, families=families,
                                     marginal_kind=args.marginal)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    series.to_csv(out, labels=dates[1:])  # returns are one shorter than closes
    _write_manifest(out.parent, "covar",
                    {"prices": args.prices, "alpha": args.alpha, "beta": args.beta,
                     "window": args.window, "families": list(families),
                     "marginal": args.marginal},
                    [Path(args.prices)], [out], t0,
                    [{"window_end": i, "error": msg} for i, msg in series.skipped])
    print(f"covar: {len(series)} windows ({len(series.skipped)} skipped) -> {out}")
    return EXIT_OK


# --- pipeline -----------------------------------------------------------------------


def _pipeline_day(job):
    label, path1, path2, tick1, tick2, window, model = job
    try:
        x, dx = ingest_mod.load_ticks(path1, tick=tick1, instrument="1")
        y, dy = ingest_mod.load_ticks(path2, tick=tick2, instrument="2")
        stream, report = ingest_mod.ingest_pair(
            x, y, ingest_mod.AdjustConfig(window=window), dropped=(dx, dy))
        res = est_mod.fit(stream, model=model, compute_stderr=False)
        pp = sim_mod.price_path(stream)
        p_emp = risk_mod.empirical_p(pp).p
        closes = (float(pp.c1[-1]), float(pp.c2[-1]))
        return {"label": label, "fit": res.to_dict(), "p": p_emp, "closes": closes}, None
    except Exception as exc:
        return None, {"label": label, "error": f"{type(exc).__name__}: {exc}"}


def cmd_pipeline(args) -> int:
    t0 = time.time()
    tick_dir = Path(args.ticks)
    if not tick_dir.is_dir():
        raise ConfigError(f"{tick_dir} is not a directory")
    firsts = sorted(tick_dir.glob("*_1.csv"))
    day_jobs = []
    for p1 in firsts:
        label = p1.name[: -len("_1.csv")]
        p2 = tick_dir / f"{label}_2.csv"
        if p2.exists():
            day_jobs.append((label, p1, p2, args.tick1, args.tick2,
                             args.adjust_window, args.model))
    if not day_jobs:
        raise ConfigError(f"no paired '<day>_1.csv'/'<day>_2.csv' files in {tick_dir}")

    if args.jobs > 1 and len(day_jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_pipeline_day, day_jobs))
    else:
        outcomes = [_pipeline_day(j) for j in day_jobs]

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    errors = [err for _, err in outcomes if err is not None]
    days = [rec for rec, _ in outcomes if rec is not None]

    # daily fits -> jsonl
    fits_path = out_dir / "fits.jsonl"
    with open(fits_path, "w", encoding="utf-8") as fh:
        for rec in days:
            row = dict(rec["fit"])
            row["date"] = rec["label"]
            row["p"] = rec["p"]
            fh.write(json.dumps(row) + "\n")

    # risk series
    risk_rows = []
    monthly: dict[str, list] = {}
    for rec in days:
        params = FlockParams.from_dict(rec["fit"]["params"])
        summary = risk_mod.risk_summary(params, p=rec["p"])
        risk_rows.append({"date": rec["label"], "rho": summary.rho,
                          "q11": summary.ratios.q11, "q22": summary.ratios.q22,
                          "q12": summary.ratios.q12, "q21": summary.ratios.q21,
                          "p": summary.p})
        month = rec["label"][:7] if len(rec["label"]) >= 7 else "all"
        monthly.setdefault(month, []).append(params.as_array())
    risk_path = out_dir / "risk.csv"
    _write_risk_csv(risk_rows, risk_path)

    from .core import PARAM_NAMES
    monthly_path = out_dir / "monthly_averages.json"
    with open(monthly_path, "w", encoding="utf-8") as fh:
        json.dump({month: dict(zip(PARAM_NAMES, np.mean(np.vstack(v), axis=0).tolist()))
                   for month, v in sorted(monthly.items())}, fh, indent=2)
        fh.write("\n")

    # daily-close CoVaR series when there are enough days for one window
    outputs = [fits_path, risk_path, monthly_path]
    covar_note = None
    closes1 = np.array([rec["closes"][0] for rec in days])
    closes2 = np.array([rec["closes"][1] for rec in days])
    if len(days) > args.covar_window:
        r1 = covar_mod.simple_returns(closes1)
        r2 = covar_mod.simple_returns(closes2)
        series = covar_mod.rolling_covar(r1, r2, window=args.covar_window,
                                         alpha=args.alpha, beta=args.beta)
        covar_path = out_dir / "covar.csv"
        series.to_csv(covar_path, labels=[rec["label"] for rec in days][1:])
        outputs.append(covar_path)
    else:
        covar_note = (f"{len(days)} days <= covar window {args.covar_window}; "
                      "covar series skipped")

    config = {"ticks": str(tick_dir), "tick1": args.tick1, "tick2": args.tick2,
              "adjust_window": args.adjust_window, "model": args.model,
              "covar_window": args.covar_window, "alpha": args.alpha,
              "beta": args.beta, "jobs": args.jobs, "covar_note": covar_note}
    inputs = [p for _, p1, p2, *_ in [(j[0], j[1], j[2]) for j in day_jobs] for p in (p1, p2)]
    _write_manifest(out_dir, "pipeline", config, inputs, outputs, t0, errors)
    print(f"pipeline: {len(days)} days fitted ({len(errors)} skipped) -> {out_dir}")
    return EXIT_OK if days else EXIT_FAIL


# --- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hawkesflock",
        description="Hawkes flocking model: simulation, calibration, branching-ratio "
                    "risk metrics, tick ingestion, and copula CoVaR.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate event-stream paths")
    p.add_argument("--params", required=True, help="12-key parameter JSON")
    p.add_argument("--paths", type=int, default=1)
    p.add_argument("--horizon", type=float, default=10000.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burnin", type=float, default=None)
    p.add_argument("--init1", type=float, default=0.0)
    p.add_argument("--init2", type=float, default=0.0)
    p.add_argument("--max-events", type=int, default=10_000_000)
    p.add_argument("--out", default="sim_out")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--config", default=None, help="JSON file of flag defaults")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("table1", help="simulation-recovery benchmark")
    p.add_argument("--column", type=int, default=1)
    p.add_argument("--paths", type=int, default=100)
    p.add_argument("--horizon", type=float, default=None,
                   help="override the ~1e4-events auto horizon")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write the report JSON here")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("ingest", help="paired tick CSVs -> event stream CSV")
    p.add_argument("--x", required=True, help="asset-1 tick file (timestamp_ms,price)")
    p.add_argument("--y", required=True, help="asset-2 tick file")
    p.add_argument("--tick1", type=float, required=True)
    p.add_argument("--tick2", type=float, required=True)
    p.add_argument("--window", type=float, default=600.0, help="adjustment window, seconds")
    p.add_argument("--scale-target", type=int, default=2, dest="scale_target")
    p.add_argument("--out", default="events.csv")
    p.add_argument("--sidecar", default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("estimate", help="fit the model to event CSVs")
    p.add_argument("--events", nargs="+", required=True)
    p.add_argument("--model", default="flocking", choices=["flocking", "symmetric"])
    p.add_argument("--init", default=None, help="parameter JSON to start from")
    p.add_argument("--max-iter", type=int, default=2000, dest="max_iter")
    p.add_argument("--floor-events", type=int, default=100, dest="floor_events")
    p.add_argument("--horizon", type=float, default=None,
                   help="window length; defaults to a sibling manifest or the last event")
    p.add_argument("--out", default="fits.jsonl")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("risk", help="fit JSONL -> branching-ratio CSV")
    p.add_argument("--fits", required=True)
    p.add_argument("--out", default="risk.csv")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_risk)

    p = sub.add_parser("covar", help="daily closes -> rolling copula CoVaR CSV")
    p.add_argument("--prices", required=True, help="CSV date,close1,close2")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--beta", type=float, default=0.05)
    p.add_argument("--window", type=int, default=250)
    p.add_argument("--families", default="gaussian,t,gumbel,clayton")
    p.add_argument("--marginal", default="empirical", choices=["empirical", "tgarch"])
    p.add_argument("--out", default="covar.csv")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_covar)

    p = sub.add_parser("pipeline", help="per-day tick dir -> fits, risk, covar")
    p.add_argument("--ticks", required=True,
                   help="directory of '<day>_1.csv' / '<day>_2.csv' pairs")
    p.add_argument("--tick1", type=float, default=0.01)
    p.add_argument("--tick2", type=float, default=0.01)
    p.add_argument("--adjust-window", type=float, default=600.0, dest="adjust_window")
    p.add_argument("--model", default="flocking", choices=["flocking", "symmetric"])
    p.add_argument("--covar-window", type=int, default=250, dest="covar_window")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--beta", type=float, default=0.05)
    p.add_argument("--out", default="pipeline_out")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    defaults = {a.dest: a.default for a in parser._subparsers._group_actions[0]
                .choices[args.command]._actions}
    try:
        _apply_config_file(args, defaults)
        return args.func(args)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "detail": str(exc)}), file=sys.stderr)
        return EXIT_USAGE
    except sim_mod.ExplosiveRegimeError as exc:
        print(json.dumps({"error": "explosive_regime", "detail": str(exc)}), file=sys.stderr)
        return EXIT_EXPLOSIVE
    except Exception as exc:
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}), file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
