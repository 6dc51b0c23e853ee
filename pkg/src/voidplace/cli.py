"""Command-line pipeline: simulate -> fit -> place -> evaluate / compare.

Every command reads one JSON config; ``--seed``, ``--workers`` and
``--out-dir`` override the corresponding entries.  Outputs are pure functions
of the config and input artifacts, except ``timings.json`` from ``compare``.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import reports
from .gp_prior import FactorizationError, MaternParams, sample_field, prior_field
from .grid import Grid1D
from .ingest import DEDUPE_POLICIES, SegmentSpec, bimodal_log_field, bin_events, load_events, synth_generate
from .lgcp_fit import ConvergenceError, laplace_fit, posterior_quantiles
from .placement import (DEFAULT_ENUMERATION_CAP, EnumerationCapError, brute_force_place,
                        greedy_place, lazy_greedy_place, mean_intensity, objective_F)
from .sensor_model import Placement, SensorParams
from .void_eval import draw_intensity_samples, evaluate_prefixes, mc_void_probability

logger = logging.getLogger("voidplace")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FIT = 3
EXIT_CAP = 4


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    grid: Grid1D
    matern: MaternParams
    sensor: SensorParams
    seed: int
    jitter: float = 0.0
    prior_mean: float = 0.0
    horizon_ratio: float = 1.0
    n_samples: int = 10_000
    m_max: int = 10
    m_list: list = field(default_factory=lambda: [2, 3, 4, 5])
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP
    candidate_stride: int = 1
    dedupe: str = "per-vessel-per-cell"
    segment: SegmentSpec | None = None
    events_path: str | None = None
    counts_path: str | None = None
    synthetic: dict = field(default_factory=dict)
    out_dir: str = "out"

    @property
    def candidates(self) -> list:
        return list(range(0, self.grid.n_cells, self.candidate_stride))

    @classmethod
    def from_dict(cls, d: dict, base: Path = Path(".")) -> "RunConfig":
        try:
            if "seed" not in d:
                raise ConfigError("config must set 'seed'")
            segment = SegmentSpec.from_dict(d["segment"]) if d.get("segment") else None
            if "grid" in d:
                grid = Grid1D.from_dict(d["grid"])
            elif segment is not None:
                grid = segment.grid(d.get("spacing_m", 50.0))
            else:
                raise ConfigError("config needs 'grid' or 'segment'")
            m = d.get("matern", {})
            cfg = cls(
                grid=grid,
                matern=MaternParams(m.get("sigma2", 0.25), m.get("zeta", 1.5),
                                    m.get("beta_m", 150.0)),
                jitter=float(m.get("jitter", 0.0)),
                sensor=SensorParams.from_dict(d.get("sensor", {"rho": 0.95, "sigma_l": 0.9})),
                seed=int(d["seed"]),
                prior_mean=float(d.get("prior_mean", 0.0)),
                horizon_ratio=float(d.get("horizon_ratio", 1.0)),
                n_samples=int(d.get("n_samples", 10_000)),
                m_max=int(d.get("m_max", 10)),
                m_list=[int(x) for x in d.get("m_list", [2, 3, 4, 5])],
                enumeration_cap=int(d.get("enumeration_cap", DEFAULT_ENUMERATION_CAP)),
                candidate_stride=int(d.get("candidate_stride", 1)),
                dedupe=d.get("dedupe", "per-vessel-per-cell"),
                segment=segment,
                events_path=_resolve(base, d.get("events_path")),
                counts_path=_resolve(base, d.get("counts_path")),
                synthetic=dict(d.get("synthetic", {})),
                out_dir=_resolve(base, d.get("out_dir", "out")),
            )
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc
        if cfg.dedupe not in DEDUPE_POLICIES:
            raise ConfigError(f"unknown dedupe policy {cfg.dedupe!r}")
        if cfg.n_samples < 2 or cfg.horizon_ratio <= 0 or cfg.candidate_stride < 1:
            raise ConfigError("n_samples >= 2, horizon_ratio > 0, candidate_stride >= 1 required")
        return cfg

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "matern": {**self.matern.to_dict(), "jitter": self.jitter},
            "prior_mean": self.prior_mean,
            "sensor": self.sensor.to_dict(),
            "horizon_ratio": self.horizon_ratio,
            "n_samples": self.n_samples,
            "m_max": self.m_max,
            "m_list": self.m_list,
            "seed": self.seed,
            "enumeration_cap": self.enumeration_cap,
            "candidate_stride": self.candidate_stride,
            "dedupe": self.dedupe,
            "segment": self.segment.to_dict() if self.segment else None,
            "synthetic": self.synthetic,
        }


def _resolve(base: Path, p):
    if p is None:
        return None
    p = Path(p)
    return str(p if p.is_absolute() else base / p)


def load_config(path, seed=None, out_dir=None) -> RunConfig:
    path = Path(path)
    try:
        d = reports.read_json(path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if seed is not None:
        d["seed"] = seed
    cfg = RunConfig.from_dict(d, path.parent)
    if out_dir is not None:
        cfg.out_dir = out_dir
    return cfg


def _out(cfg: RunConfig) -> Path:
    p = Path(cfg.out_dir)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _true_log_field(cfg: RunConfig) -> np.ndarray:
    syn = cfg.synthetic
    kind = syn.get("kind", "bimodal")
    if kind == "bimodal":
        peaks = [tuple(p) for p in syn.get("peaks", [[0.3, 0.05], [0.7, 0.08]])]
        return bimodal_log_field(cfg.grid, peaks, syn.get("heights", [1.0, 0.8]),
                                 syn.get("base", -7.0), syn.get("scale", 3.0))
    if kind == "prior_draw":
        return sample_field(prior_field(cfg.grid, cfg.matern, cfg.prior_mean, cfg.jitter),
                            np.random.SeedSequence([cfg.seed, 1]))
    raise ConfigError(f"unknown synthetic kind {kind!r}")


def cmd_simulate(cfg: RunConfig, args) -> list:
    f = _true_log_field(cfg)
    counts = synth_generate(f, cfg.grid, np.random.SeedSequence([cfg.seed, 2]),
                            cfg.synthetic.get("collection_span", 1.0))
    out = _out(cfg)
    reports.write_json(out / "counts.json", reports.counts_to_dict(
        counts, source="synthetic", config=cfg.to_dict()))
    reports.write_csv(out / "true_field.csv", ["cell", "center_m", "log_intensity"],
                      [(i, c, v) for i, (c, v) in enumerate(zip(cfg.grid.centers, f))])
    return [out / "counts.json", out / "true_field.csv"]


def _load_counts(cfg: RunConfig, args):
    if getattr(args, "events", None) or (cfg.events_path and not getattr(args, "counts", None)):
        path = args.events or cfg.events_path
        if cfg.segment is None:
            raise ConfigError("loading events requires a 'segment' in the config")
        events = load_events(path, cfg.segment)
        counts = bin_events(events, cfg.segment, cfg.grid, cfg.dedupe)
        return counts, {"source": Path(path).name, "skipped": events.skipped,
                        "filtered": events.filtered, "dedupe": cfg.dedupe,
                        "window": [cfg.segment.to_dict()["start"], cfg.segment.to_dict()["end"]]}
    path = getattr(args, "counts", None) or cfg.counts_path
    if path is None:
        raise ConfigError("no counts or events input given")
    return reports.counts_from_dict(reports.read_json(path)), {"source": Path(path).name}


def cmd_fit(cfg: RunConfig, args) -> list:
    counts, meta = _load_counts(cfg, args)
    if counts.grid != cfg.grid:
        raise ConfigError("counts grid does not match config grid")
    post = laplace_fit(counts, cfg.prior_mean, cfg.matern, cfg.jitter)
    out = _out(cfg)
    reports.write_json(out / "counts_binned.json", reports.counts_to_dict(counts, **meta))
    reports.write_json(out / "fit.json", reports.fit_to_dict(
        post, cfg.matern, cfg.prior_mean, config=cfg.to_dict()))
    q = {lvl: posterior_quantiles(post, lvl) for lvl in (0.025, 0.5, 0.975)}
    rows = [(i, cfg.grid.centers[i], counts.counts[i], post.mean[i], q[0.025][i], q[0.5][i],
             q[0.975][i]) for i in range(cfg.grid.n_cells)]
    reports.write_csv(out / "quantiles.csv",
                      ["cell", "center_m", "count", "post_mean_log", "q025", "q50", "q975"], rows)
    return [out / "fit.json", out / "quantiles.csv"]


def _fit_path(cfg, args) -> Path:
    return Path(args.fit) if getattr(args, "fit", None) else Path(cfg.out_dir) / "fit.json"


def _trace_dict(trace, field_):
    return {**reports.placement_to_dict(trace.chosen), "gains": trace.gains,
            "F": trace.objective_values}


def cmd_place(cfg: RunConfig, args) -> list:
    post = reports.fit_from_dict(reports.read_json(_fit_path(cfg, args)))
    lam = mean_intensity(post, cfg.horizon_ratio)
    M = cfg.m_max if args.M is None else args.M
    cand = cfg.candidates
    greedy = greedy_place(lam, cfg.sensor, cand, M)
    report = {"M": M, "candidates": cand, "greedy": _trace_dict(greedy, lam),
              "F_max": lam.total, "config": cfg.to_dict()}
    if args.lazy:
        report["lazy_greedy"] = _trace_dict(lazy_greedy_place(lam, cfg.sensor, cand, M), lam)
    if args.brute_force:
        bf = brute_force_place(lam, cfg.sensor, cand, M, cfg.enumeration_cap, args.workers)
        report["brute_force"] = {**reports.placement_to_dict(bf),
                                 "F": objective_F(lam, cfg.sensor, bf)}
    out = _out(cfg)
    reports.write_json(out / "placement.json", report)
    rows = [(k + 1, c, g, F) for k, (c, g, F) in
            enumerate(zip(greedy.chosen.cells, greedy.gains, greedy.objective_values))]
    reports.write_csv(out / "greedy_trace.csv", ["step", "cell", "gain", "F"], rows)
    return [out / "placement.json", out / "greedy_trace.csv"]


EVAL_COLUMNS = ["M", "vp_mc", "vp_se", "lower_bound", "gap", "gap_ratio", "gap_bound",
                "mu_u", "sigma2_u"]


def cmd_evaluate(cfg: RunConfig, args) -> list:
    post = reports.fit_from_dict(reports.read_json(_fit_path(cfg, args)))
    lam = mean_intensity(post, cfg.horizon_ratio)
    ppath = Path(args.placement) if args.placement else Path(cfg.out_dir) / "placement.json"
    placement = reports.placement_from_dict(reports.read_json(ppath)["greedy"], post.grid)
    samples = draw_intensity_samples(post, cfg.horizon_ratio, cfg.n_samples, cfg.seed,
                                     args.workers)
    ests = evaluate_prefixes(samples, cfg.sensor, placement, lam, cfg.m_max)
    rows = [(m, e.vp_mc, e.vp_se, e.lower_bound, e.gap, e.gap / e.vp_mc if e.vp_mc > 0 else 0.0,
             e.gap_bound, e.mu_u, e.sigma2_u) for m, e in enumerate(ests)]
    out = _out(cfg)
    reports.write_csv(out / "evaluation.csv", EVAL_COLUMNS, rows)
    return [out / "evaluation.csv"]


COMPARE_COLUMNS = ["M", "status", "greedy_cells", "optimal_cells", "F_greedy", "F_optimal",
                   "vp_greedy", "vp_greedy_se", "vp_optimal", "vp_optimal_se", "ratio_pct",
                   "combined_se_pct"]


def compare_rows(cfg: RunConfig, post, workers: int = 1):
    """One row per M in ``cfg.m_list``, plus wall-clock timings per M."""
    lam = mean_intensity(post, cfg.horizon_ratio)
    samples = draw_intensity_samples(post, cfg.horizon_ratio, cfg.n_samples, cfg.seed, workers)
    rows, timings = [], []
    for M in cfg.m_list:
        t0 = time.perf_counter()
        g = greedy_place(lam, cfg.sensor, cfg.candidates, M).chosen
        t1 = time.perf_counter()
        try:
            opt = brute_force_place(lam, cfg.sensor, cfg.candidates, M, cfg.enumeration_cap,
                                    workers)
        except EnumerationCapError as exc:
            rows.append([M, f"skipped: {exc.required} subsets > cap {exc.cap}"]
                        + [""] * (len(COMPARE_COLUMNS) - 2))
            timings.append({"M": M, "greedy_s": t1 - t0, "optimal_s": None})
            continue
        t2 = time.perf_counter()
        eg = mc_void_probability(samples, cfg.sensor, g, lam)
        eo = mc_void_probability(samples, cfg.sensor, opt, lam)
        ratio = 100.0 * eg.vp_mc / eo.vp_mc
        comb = ratio * math.hypot(eg.vp_se / eg.vp_mc, eo.vp_se / eo.vp_mc)
        rows.append([M, "ok", " ".join(map(str, g.cells)), " ".join(map(str, opt.cells)),
                     objective_F(lam, cfg.sensor, g), objective_F(lam, cfg.sensor, opt),
                     eg.vp_mc, eg.vp_se, eo.vp_mc, eo.vp_se, ratio, comb])
        timings.append({"M": M, "greedy_s": t1 - t0, "optimal_s": t2 - t1})
    return rows, timings


def cmd_compare(cfg: RunConfig, args) -> list:
    if args.m_list:
        cfg.m_list = [int(x) for x in args.m_list.split(",")]
    post = reports.fit_from_dict(reports.read_json(_fit_path(cfg, args)))
    rows, timings = compare_rows(cfg, post, args.workers)
    out = _out(cfg)
    reports.write_csv(out / "compare.csv", COMPARE_COLUMNS, rows)
    reports.write_json(out / "compare.json", {"rows": [dict(zip(COMPARE_COLUMNS, r)) for r in rows],
                                              "config": cfg.to_dict()})
    # wall-clock times vary between runs; kept out of the deterministic outputs
    reports.write_json(out / "timings.json", timings)
    return [out / "compare.csv", out / "compare.json"]


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "place": cmd_place,
            "evaluate": cmd_evaluate, "compare": cmd_compare}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="voidplace", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out-dir")
        if name == "fit":
            src = p.add_mutually_exclusive_group()
            src.add_argument("--counts", help="counts JSON (from simulate)")
            src.add_argument("--events", help="AIS CSV file")
        if name in ("place", "evaluate", "compare"):
            p.add_argument("--fit", help="fit artifact (default: <out-dir>/fit.json)")
        if name == "place":
            p.add_argument("--M", type=int)
            p.add_argument("--lazy", action="store_true")
            p.add_argument("--brute-force", action="store_true")
        if name == "evaluate":
            p.add_argument("--placement")
        if name == "compare":
            p.add_argument("--m-list", help="comma-separated sensor counts")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.workers < 1:
        logger.error("--workers must be >= 1")
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.seed, args.out_dir)
        written = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG
    except (ConvergenceError, FactorizationError) as exc:
        logger.error("fit failed: %s", exc)
        for row in getattr(exc, "trace", [])[-5:]:
            logger.error("  %s", row)
        return EXIT_FIT
    except EnumerationCapError as exc:
        logger.error("%s", exc)
        return EXIT_CAP
    except (OSError, ValueError) as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG
    for p in written:
        logger.info("wrote %s", p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
