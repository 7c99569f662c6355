import json
import os

import numpy as np
import pytest

from hawkesflock.cli import main
from hawkesflock.core import EventStream, FlockParams
from hawkesflock.sim import SimConfig, price_path, simulate
from hawkesflock.ingest import write_ticks


@pytest.fixture()
def params_file(tmp_path, col1):
    f = tmp_path / "params.json"
    col1.to_json(f)
    return f


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


class TestSimulateCommand:
    def test_outputs_and_manifest(self, tmp_path, params_file):
        out = tmp_path / "sim"
        rc = main(["simulate", "--params", str(params_file), "--paths", "2",
                   "--horizon", "400", "--seed", "3", "--out", str(out), "--jobs", "1"])
        assert rc == 0
        manifest = json.loads(read(out / "manifest.json"))
        assert manifest["command"] == "simulate"
        assert len(manifest["outputs"]) == 2
        for entry in manifest["outputs"]:
            assert os.path.exists(entry["path"])

    def test_reruns_are_byte_identical(self, tmp_path, params_file):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert main(["simulate", "--params", str(params_file), "--paths", "2",
                         "--horizon", "400", "--seed", "9", "--out", str(out),
                         "--jobs", "1"]) == 0
        assert read(a / "events_0000.csv") == read(b / "events_0000.csv")
        assert read(a / "events_0001.csv") == read(b / "events_0001.csv")

    def test_zero_paths_is_usage_error(self, params_file):
        assert main(["simulate", "--params", str(params_file), "--paths", "0"]) == 2

    def test_eleven_key_params_rejected(self, tmp_path, params_file):
        d = json.loads(read(params_file))
        d.pop("alpha2w")
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(d))
        assert main(["simulate", "--params", str(bad), "--paths", "1"]) == 2

    def test_explosive_params_exit_code(self, tmp_path, col1):
        hot = FlockParams(**{k: (v * 1.4 if k.startswith("alpha") else v)
                             for k, v in col1.to_dict().items()})
        f = tmp_path / "hot.json"
        hot.to_json(f)
        out = tmp_path / "sim"
        rc = main(["simulate", "--params", str(f), "--paths", "1", "--horizon", "50000",
                   "--max-events", "20000", "--out", str(out), "--jobs", "1"])
        assert rc == 3
        manifest = json.loads(read(out / "manifest.json"))
        assert manifest["errors"][0]["error"] == "explosive regime"

    def test_env_seed_override(self, tmp_path, params_file, monkeypatch):
        a, b = tmp_path / "a", tmp_path / "b"
        monkeypatch.setenv("HAWKESFLOCK_SEED", "77")
        main(["simulate", "--params", str(params_file), "--paths", "1",
              "--horizon", "300", "--seed", "1", "--out", str(a), "--jobs", "1"])
        monkeypatch.delenv("HAWKESFLOCK_SEED")
        main(["simulate", "--params", str(params_file), "--paths", "1",
              "--horizon", "300", "--seed", "77", "--out", str(b), "--jobs", "1"])
        assert read(a / "events_0000.csv") == read(b / "events_0000.csv")

    def test_config_file_precedence(self, tmp_path, params_file):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"horizon": 250.0, "seed": 4}))
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        main(["simulate", "--params", str(params_file), "--paths", "1",
              "--config", str(cfg), "--out", str(out1), "--jobs", "1"])
        m = json.loads(read(out1 / "manifest.json"))
        assert m["config"]["horizon"] == 250.0 and m["config"]["seed"] == 4
        # explicit flag beats the config file
        main(["simulate", "--params", str(params_file), "--paths", "1",
              "--config", str(cfg), "--seed", "8", "--out", str(out2), "--jobs", "1"])
        m2 = json.loads(read(out2 / "manifest.json"))
        assert m2["config"]["seed"] == 8


class TestEstimateRiskFlow:
    def test_end_to_end(self, tmp_path, params_file, col1):
        sim_dir = tmp_path / "sim"
        main(["simulate", "--params", str(params_file), "--paths", "1",
              "--horizon", "3000", "--seed", "21", "--out", str(sim_dir), "--jobs", "1"])
        fits = tmp_path / "fits.jsonl"
        rc = main(["estimate", "--events", str(sim_dir / "events_0000.csv"),
                   "--out", str(fits)])
        assert rc == 0
        row = json.loads(read(fits).splitlines()[0])
        assert row["model"] == "flocking" and row["converged"]
        assert 0.0 <= row["p"] <= 1.0

        risk_csv = tmp_path / "risk.csv"
        assert main(["risk", "--fits", str(fits), "--out", str(risk_csv)]) == 0
        lines = read(risk_csv).decode().strip().splitlines()
        assert lines[0] == "date,rho,q11,q22,q12,q21,p"
        rho = float(lines[1].split(",")[1])
        assert 0.5 < rho < 1.0  # near the generating value 0.75

    def test_symmetric_flag(self, tmp_path, params_file):
        sim_dir = tmp_path / "sim"
        main(["simulate", "--params", str(params_file), "--paths", "1",
              "--horizon", "2500", "--seed", "22", "--out", str(sim_dir), "--jobs", "1"])
        fits = tmp_path / "fits.jsonl"
        rc = main(["estimate", "--events", str(sim_dir / "events_0000.csv"),
                   "--model", "symmetric", "--out", str(fits)])
        assert rc == 0
        row = json.loads(read(fits).splitlines()[0])
        assert row["params"]["alpha1w"] == 0.0


class TestIngestCommand:
    def test_ingest_writes_stream_and_sidecar(self, tmp_path, col1):
        stream = simulate(SimConfig(params=col1, horizon=900.0, seed=5, burnin=0.0))
        path = price_path(stream)
        is1 = np.concatenate(([True], stream.marks < 2))
        is2 = np.concatenate(([True], stream.marks >= 2))
        x_f, y_f = tmp_path / "x.csv", tmp_path / "y.csv"
        write_ticks(x_f, path.times[is1], 50.0 + 0.01 * path.c1[is1])
        write_ticks(y_f, path.times[is2], (40.0 + 0.01 * path.c2[is2]) / 42.0)
        out = tmp_path / "events.csv"
        rc = main(["ingest", "--x", str(x_f), "--y", str(y_f), "--tick1", "0.01",
                   "--tick2", str(0.01 / 42.0), "--window", "300", "--out", str(out)])
        assert rc == 0
        back = EventStream.from_csv(out)
        assert back.counts().sum() == len(stream)
        sidecar = json.loads(read(out.with_suffix(".csv.json")))
        assert sidecar["windows"] and sidecar["mark_counts"]


class TestPipelineCommand:
    def _make_day(self, tmp_path, col1, label, seed, horizon=1200.0):
        stream = simulate(SimConfig(params=col1, horizon=horizon, seed=seed, burnin=0.0))
        path = price_path(stream)
        is1 = np.concatenate(([True], stream.marks < 2))
        is2 = np.concatenate(([True], stream.marks >= 2))
        t0 = 1.7e9
        write_ticks(tmp_path / f"{label}_1.csv", t0 + path.times[is1],
                    60.0 + 0.01 * path.c1[is1])
        write_ticks(tmp_path / f"{label}_2.csv", t0 + path.times[is2],
                    (60.0 + 0.01 * path.c2[is2]) / 42.0)

    def test_corrupt_day_is_skipped(self, tmp_path, col1):
        ticks = tmp_path / "ticks"
        ticks.mkdir()
        for i in range(3):
            self._make_day(ticks, col1, f"2024-02-0{i+1}", seed=50 + i)
        (ticks / "2024-02-04_1.csv").write_text("garbage\n")
        (ticks / "2024-02-04_2.csv").write_text("garbage\n")
        out = tmp_path / "pipe"
        rc = main(["pipeline", "--ticks", str(ticks), "--tick1", "0.01",
                   "--tick2", str(0.01 / 42.0), "--adjust-window", "300",
                   "--out", str(out), "--jobs", "1"])
        assert rc == 0
        manifest = json.loads(read(out / "manifest.json"))
        assert len(manifest["errors"]) == 1
        risk_lines = read(out / "risk.csv").decode().strip().splitlines()
        assert len(risk_lines) == 4  # header + 3 good days
        monthly = json.loads(read(out / "monthly_averages.json"))
        assert "2024-02" in monthly

    def test_empty_directory_is_config_error(self, tmp_path):
        empty = tmp_path / "none"
        empty.mkdir()
        assert main(["pipeline", "--ticks", str(empty)]) == 2


class TestCovarCommand:
    def test_covar_csv(self, tmp_path):
        rng = np.random.default_rng(2)
        n = 140
        z = rng.multivariate_normal([0, 0], [[1, 0.5], [0.5, 1]], size=n)
        c1 = 60 * np.exp(np.cumsum(0.01 * z[:, 0]))
        c2 = 45 * np.exp(np.cumsum(0.012 * z[:, 1]))
        prices = tmp_path / "closes.csv"
        with open(prices, "w") as fh:
            fh.write("date,close1,close2\n")
            for i in range(n):
                fh.write(f"d{i:03d},{c1[i]:.8f},{c2[i]:.8f}\n")
        out = tmp_path / "covar.csv"
        rc = main(["covar", "--prices", str(prices), "--window", "120",
                   "--families", "gaussian,clayton", "--out", str(out)])
        assert rc == 0
        lines = read(out).decode().strip().splitlines()
        assert lines[0].startswith("date,var1,var2,covar12")
        assert len(lines) == (n - 1) - 120 + 1 + 1

    def test_unknown_family_rejected(self, tmp_path):
        prices = tmp_path / "closes.csv"
        prices.write_text("date,close1,close2\nd0,1,1\n")
        assert main(["covar", "--prices", str(prices), "--families", "frank"]) == 2
