"""JSON/CSV serialization of counts, fits, placements and evaluation tables.

Floats are written with ``repr`` so reruns produce byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .gp_prior import GaussianFieldPosterior, MaternParams, cholesky_jittered
from .grid import Grid1D
from .lgcp_fit import EventCounts
from .sensor_model import Placement


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, allow_nan=False) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    Path(path).write_text(buf.getvalue())


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def counts_to_dict(counts: EventCounts, **extra) -> dict:
    return {"grid": counts.grid.to_dict(), "counts": [int(c) for c in counts.counts],
            "collection_span": counts.collection_span, "excluded": counts.n_excluded, **extra}


def counts_from_dict(d: dict) -> EventCounts:
    return EventCounts(np.asarray(d["counts"]), d.get("collection_span", 1.0),
                       Grid1D.from_dict(d["grid"]), d.get("excluded", 0))


def fit_to_dict(post: GaussianFieldPosterior, prior: MaternParams, prior_mean: float,
                **extra) -> dict:
    diag = dict(post.diagnostics)
    return {
        "grid": post.grid.to_dict(),
        "prior": {**prior.to_dict(), "prior_mean": prior_mean},
        "mean": post.mean.tolist(),
        "cov": post.cov.tolist(),
        "diagnostics": diag,
        **extra,
    }


def fit_from_dict(d: dict) -> GaussianFieldPosterior:
    grid = Grid1D.from_dict(d["grid"])
    cov = np.asarray(d["cov"], dtype=float)
    L, _ = cholesky_jittered(cov, float(np.max(np.diag(cov))), 0.0)
    return GaussianFieldPosterior(np.asarray(d["mean"]), L, grid, d.get("diagnostics", {}))


def placement_to_dict(p: Placement) -> dict:
    return {"cells": list(p.cells), "positions_m": p.positions.tolist()}


def placement_from_dict(d: dict, grid: Grid1D) -> Placement:
    return Placement(tuple(d["cells"]), grid)
