"""AIS-style CSV loading, projection onto the segment, binning and synthetic counts."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from .grid import Grid1D
from .lgcp_fit import EventCounts

logger = logging.getLogger(__name__)

METERS_PER_DEG_LAT = 111_320.0
TIME_FORMAT = "%Y-%m-%dT%H:%M:%S"
DEDUPE_POLICIES = ("none", "per-vessel-per-cell")


@dataclass(frozen=True)
class EventRecord:
    timestamp: datetime
    lat: float
    lon: float
    vessel_id: str | None = None
    vessel_type: str | None = None


@dataclass(frozen=True)
class SegmentSpec:
    """Latitude extent of a fixed-longitude segment plus a collection window."""

    lat_min: float
    lat_max: float
    lon_center: float
    corridor_halfwidth: float
    start: datetime
    end: datetime

    def __post_init__(self):
        if not self.lat_min < self.lat_max:
            raise ValueError("lat_min must be below lat_max")
        if not self.corridor_halfwidth > 0:
            raise ValueError("corridor_halfwidth must be positive")
        if not self.start < self.end:
            raise ValueError("time window start must precede end")

    @property
    def length_m(self) -> float:
        return (self.lat_max - self.lat_min) * METERS_PER_DEG_LAT

    @property
    def span_days(self) -> float:
        return (self.end - self.start).total_seconds() / 86400.0

    def grid(self, spacing: float) -> Grid1D:
        return Grid1D(0.0, spacing, max(1, math.ceil(self.length_m / spacing - 1e-9)))

    def to_dict(self) -> dict:
        return {"lat_min": self.lat_min, "lat_max": self.lat_max,
                "lon_center": self.lon_center, "corridor_halfwidth": self.corridor_halfwidth,
                "start": self.start.strftime(TIME_FORMAT), "end": self.end.strftime(TIME_FORMAT)}

    @classmethod
    def from_dict(cls, d: dict) -> "SegmentSpec":
        return cls(d["lat_min"], d["lat_max"], d["lon_center"], d["corridor_halfwidth"],
                   parse_time(d["start"]), parse_time(d["end"]))


class EventList(list):
    """Loaded records, with counts of malformed (``skipped``) and
    out-of-segment (``filtered``) rows."""

    def __init__(self, records=(), skipped: int = 0, filtered: int = 0):
        super().__init__(records)
        self.skipped = skipped
        self.filtered = filtered


def parse_time(text: str) -> datetime:
    return datetime.strptime(text.strip(), TIME_FORMAT).replace(tzinfo=timezone.utc)


def _parse_row(row, cols) -> EventRecord:
    lat = float(row[cols["LAT"]])
    lon = float(row[cols["LON"]])
    if not (-90 <= lat <= 90 and -180 <= lon <= 180):
        raise ValueError("coordinates out of range")
    ts = parse_time(row[cols["BASEDATETIME"]])
    vid = row[cols["MMSI"]].strip() or None if "MMSI" in cols else None
    vtype = row[cols["VESSELTYPE"]].strip() or None if "VESSELTYPE" in cols else None
    return EventRecord(ts, lat, lon, vid, vtype)


def load_events(path, spec: SegmentSpec) -> EventList:
    """Read a marinecadastre-style CSV and keep pings inside the segment and window.

    Required columns (any case): LAT, LON, BaseDateTime.  MMSI and VesselType
    are picked up when present.
    """
    records, skipped, filtered = [], 0, 0
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file, no header")
        cols = {name.strip().upper(): i for i, name in enumerate(header)}
        missing = [c for c in ("LAT", "LON", "BASEDATETIME") if c not in cols]
        if missing:
            raise ValueError(f"{path}: missing required columns {missing}")
        for row in reader:
            if not row:
                continue
            try:
                rec = _parse_row(row, cols)
            except (ValueError, IndexError):
                skipped += 1
                continue
            if (spec.lat_min <= rec.lat <= spec.lat_max
                    and abs(rec.lon - spec.lon_center) <= spec.corridor_halfwidth
                    and spec.start <= rec.timestamp < spec.end):
                records.append(rec)
            else:
                filtered += 1
    logger.info("%s: %d records, %d skipped, %d filtered", path, len(records), skipped, filtered)
    return EventList(records, skipped, filtered)


def bin_events(events, spec: SegmentSpec, grid: Grid1D,
               dedupe: str = "per-vessel-per-cell") -> EventCounts:
    """Histogram events along the segment by latitude.

    With ``per-vessel-per-cell`` a vessel counts at most once per cell;
    records without a vessel id are always counted.
    """
    if dedupe not in DEDUPE_POLICIES:
        raise ValueError(f"unknown dedupe policy {dedupe!r}")
    counts = np.zeros(grid.n_cells, dtype=np.int64)
    seen = set()
    excluded = 0
    for ev in events:
        s = (ev.lat - spec.lat_min) * METERS_PER_DEG_LAT
        cell = math.floor((s - grid.origin) / grid.spacing)
        if not 0 <= cell < grid.n_cells:
            excluded += 1
            continue
        if dedupe == "per-vessel-per-cell" and ev.vessel_id is not None:
            key = (ev.vessel_id, cell)
            if key in seen:
                continue
            seen.add(key)
        counts[cell] += 1
    return EventCounts(counts, spec.span_days, grid, n_excluded=excluded)


def synth_generate(true_log_field, grid: Grid1D, seed, collection_span: float = 1.0
                   ) -> EventCounts:
    """Independent ``Poisson(exp(f_i) * spacing)`` counts per cell."""
    f = np.asarray(true_log_field, dtype=float)
    if f.shape != (grid.n_cells,) or not np.all(np.isfinite(f)):
        raise ValueError("true_log_field must be finite with one value per cell")
    rng = np.random.default_rng(seed)
    return EventCounts(rng.poisson(np.exp(f) * grid.spacing), collection_span, grid)


def bimodal_log_field(grid: Grid1D, peaks=((0.3, 0.05), (0.7, 0.08)), heights=(1.0, 0.8),
                      base: float = -7.0, scale: float = 3.0) -> np.ndarray:
    """Log-intensity with Gaussian bumps at fractional positions along the grid.

    ``peaks`` holds ``(center, width)`` pairs as fractions of the segment length.
    """
    x = (grid.centers - grid.origin) / grid.length
    bumps = sum(h * np.exp(-0.5 * ((x - c) / w) ** 2) for (c, w), h in zip(peaks, heights))
    return base + scale * bumps
