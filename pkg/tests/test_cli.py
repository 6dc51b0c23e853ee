import csv
import json
from pathlib import Path

import numpy as np
import pytest

from voidplace import cli

SMALL = {
    "seed": 7,
    "grid": {"origin_m": 0.0, "spacing_m": 50.0, "n_cells": 40},
    "matern": {"sigma2": 0.5, "zeta": 1.5, "beta_m": 300.0},
    "prior_mean": -4.0,
    "sensor": {"rho": 0.95, "sigma_l": 5000.0},
    "horizon_ratio": 0.1,
    "n_samples": 600,
    "m_max": 6,
    "m_list": [1, 2, 3],
    "candidate_stride": 2,
    "synthetic": {"kind": "bimodal", "base": -5.0, "scale": 2.5},
}


def write_config(tmp_path, **over):
    cfg = {**SMALL, **over, "out_dir": str(tmp_path / "out")}
    p = tmp_path / "config.json"
    p.write_text(json.dumps(cfg))
    return p


def run_pipeline(cfg_path, out_dir, workers=1):
    common = ["--config", str(cfg_path), "--out-dir", str(out_dir), "--workers", str(workers)]
    assert cli.main(["simulate", *common]) == 0
    assert cli.main(["fit", *common, "--counts", str(Path(out_dir) / "counts.json")]) == 0
    assert cli.main(["place", *common, "--lazy", "--brute-force", "--M", "3"]) == 0
    assert cli.main(["place", *common]) == 0
    assert cli.main(["evaluate", *common]) == 0
    assert cli.main(["compare", *common]) == 0


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli")
    cfg = write_config(tmp)
    run_pipeline(cfg, tmp / "out")
    return cfg, tmp / "out"


def test_fit_outputs(pipeline):
    _, out = pipeline
    rows = read_rows(out / "quantiles.csv")
    assert len(rows) == 40
    for r in rows:
        assert float(r["q025"]) <= float(r["q50"]) <= float(r["q975"])
    fit = json.loads((out / "fit.json").read_text())
    assert len(fit["mean"]) == 40 and len(fit["cov"]) == 40
    assert fit["diagnostics"]["converged"]


def test_place_reports(tmp_path, pipeline):
    cfg, out = pipeline
    assert cli.main(["place", "--config", str(cfg), "--out-dir", str(tmp_path), "--fit",
                     str(out / "fit.json"), "--lazy", "--brute-force", "--M", "2"]) == 0
    rep = json.loads((tmp_path / "placement.json").read_text())
    assert rep["greedy"] == rep["lazy_greedy"]
    assert rep["brute_force"]["F"] >= rep["greedy"]["F"][-1] - 1e-12
    # the two synthetic modes sit near cells 12 and 28 of 40
    cells = sorted(rep["brute_force"]["cells"])
    assert cells[0] < 20 <= cells[1]
    assert sorted(rep["greedy"]["cells"]) == cells
    assert rep["greedy"]["positions_m"] == [50.0 * c + 25.0 for c in rep["greedy"]["cells"]]


def test_place_zero(tmp_path, pipeline):
    cfg, out = pipeline
    assert cli.main(["place", "--config", str(cfg), "--out-dir", str(tmp_path), "--fit",
                     str(out / "fit.json"), "--M", "0"]) == 0
    rep = json.loads((tmp_path / "placement.json").read_text())
    assert rep["greedy"]["cells"] == [] and rep["greedy"]["F"] == []
    assert read_rows(tmp_path / "greedy_trace.csv") == []


def test_evaluate_rows(pipeline):
    _, out = pipeline
    rows = read_rows(out / "evaluation.csv")
    assert [int(r["M"]) for r in rows] == list(range(7))
    fit = json.loads((out / "fit.json").read_text())
    mean, var = np.array(fit["mean"]), np.diag(np.array(fit["cov"]))
    total = 0.1 * np.exp(mean + var / 2).sum() * 50.0
    assert float(rows[0]["lower_bound"]) == pytest.approx(np.exp(-total), rel=1e-12)
    vp = [float(r["vp_mc"]) for r in rows]
    for r in rows:
        assert float(r["gap"]) <= float(r["gap_bound"]) + 3 * float(r["vp_se"])
    for a, b, r in zip(vp, vp[1:], rows[1:]):
        assert b >= a - 3 * float(r["vp_se"])


def test_compare_rows(pipeline):
    _, out = pipeline
    rows = read_rows(out / "compare.csv")
    assert [r["M"] for r in rows] == ["1", "2", "3"]
    assert float(rows[0]["ratio_pct"]) == 100.0
    for r in rows:
        assert float(r["ratio_pct"]) <= 100.0 + 3 * float(r["combined_se_pct"])
    timings = json.loads((out / "timings.json").read_text())
    assert [t["M"] for t in timings] == [1, 2, 3]


def test_compare_cap_marks_skipped(tmp_path, pipeline):
    _, out = pipeline
    cfg = write_config(tmp_path, enumeration_cap=25)
    assert cli.main(["compare", "--config", str(cfg), "--fit", str(out / "fit.json"),
                     "--m-list", "1,3"]) == 0
    rows = read_rows(tmp_path / "out" / "compare.csv")
    assert rows[0]["status"] == "ok" and rows[1]["status"].startswith("skipped")


def test_rerun_byte_identical(tmp_path, pipeline):
    cfg, out = pipeline
    run_pipeline(cfg, tmp_path / "again", workers=8)
    names = sorted(p.name for p in out.iterdir() if p.name != "timings.json")
    assert names
    for name in names:
        assert (out / name).read_bytes() == (tmp_path / "again" / name).read_bytes(), name


def test_seed_override_changes_output(tmp_path, pipeline):
    cfg, out = pipeline
    assert cli.main(["simulate", "--config", str(cfg), "--out-dir", str(tmp_path), "--seed", "8"]) == 0
    assert (tmp_path / "counts.json").read_bytes() != (out / "counts.json").read_bytes()


def test_exit_codes(tmp_path, pipeline, monkeypatch):
    _, out = pipeline
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({k: v for k, v in SMALL.items() if k != "seed"}))
    assert cli.main(["simulate", "--config", str(bad)]) == cli.EXIT_CONFIG
    assert cli.main(["simulate", "--config", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG
    cfg = write_config(tmp_path, enumeration_cap=5)
    assert cli.main(["place", "--config", str(cfg), "--fit", str(out / "fit.json"),
                     "--brute-force", "--M", "3"]) == cli.EXIT_CAP
    from voidplace import lgcp_fit
    monkeypatch.setattr(lgcp_fit, "MAX_ITER", 1)
    assert cli.main(["fit", "--config", str(cfg), "--counts", str(out / "counts.json")]) == cli.EXIT_FIT


def test_fit_from_ais_csv(tmp_path):
    cfg = {
        "seed": 1,
        "segment": {"lat_min": 36.91676, "lat_max": 37.08721, "lon_center": -76.08209,
                    "corridor_halfwidth": 0.01, "start": "2020-03-01T00:00:00",
                    "end": "2020-04-01T00:00:00"},
        "spacing_m": 500.0,
        "events_path": str(Path(__file__).parent / "data" / "ais_small.csv"),
        "matern": {"sigma2": 0.25, "zeta": 1.5, "beta_m": 1500.0},
        "prior_mean": -8.0,
        "out_dir": str(tmp_path),
    }
    p = tmp_path / "seg.json"
    p.write_text(json.dumps(cfg))
    assert cli.main(["fit", "--config", str(p)]) == 0
    binned = json.loads((tmp_path / "counts_binned.json").read_text())
    assert sum(binned["counts"]) == 3  # 367001 in two different cells, 367002 once
    assert binned["skipped"] == 1 and binned["filtered"] == 1
    assert binned["dedupe"] == "per-vessel-per-cell"
    assert len(read_rows(tmp_path / "quantiles.csv")) == 38
