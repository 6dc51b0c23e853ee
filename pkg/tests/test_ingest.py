from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pytest

from voidplace import EventRecord, Grid1D, SegmentSpec, bin_events, load_events, synth_generate
from voidplace.ingest import METERS_PER_DEG_LAT, bimodal_log_field

DATA = Path(__file__).parent / "data"
UTC = timezone.utc


@pytest.fixture
def segment():
    return SegmentSpec(36.91676, 37.08721, -76.08209, 0.01,
                       datetime(2020, 3, 1, tzinfo=UTC), datetime(2020, 4, 1, tzinfo=UTC))


def ev(lat, vessel=None, day=2):
    return EventRecord(datetime(2020, 3, day, tzinfo=UTC), lat, -76.08209, vessel)


def test_fixture_file(segment):
    events = load_events(DATA / "ais_small.csv", segment)
    assert len(events) == 3
    assert events.skipped == 1
    assert events.filtered == 1
    assert [e.vessel_id for e in events] == ["367001", "367002", "367001"]
    assert events[0].timestamp == datetime(2020, 3, 1, 0, 0, 5, tzinfo=UTC)


def test_empty_file(tmp_path, segment):
    p = tmp_path / "empty.csv"
    p.write_text("lat,lon,basedatetime\n")
    events = load_events(p, segment)
    assert list(events) == [] and events.skipped == 0


def test_missing_columns(tmp_path, segment):
    p = tmp_path / "bad.csv"
    p.write_text("MMSI,LAT,LON\n1,37.0,-76.08\n")
    with pytest.raises(ValueError, match="BASEDATETIME"):
        load_events(p, segment)
    with pytest.raises(OSError):
        load_events(tmp_path / "nope.csv", segment)


def test_time_window_filter(tmp_path, segment):
    p = tmp_path / "late.csv"
    p.write_text("BaseDateTime,LAT,LON\n2020-04-02T00:00:00,37.0,-76.08209\n"
                 "2020-03-10T00:00:00,37.0,-76.08209\n")
    events = load_events(p, segment)
    assert len(events) == 1 and events.filtered == 1


def test_bin_first_cell(segment):
    g = segment.grid(50.0)
    counts = bin_events([ev(segment.lat_min + 1e-7)], segment, g, "none")
    assert counts.counts[0] == 1 and counts.total == 1


def test_bin_dedupe(segment):
    g = segment.grid(50.0)
    pings = [ev(36.95, "a", 2), ev(36.95001, "a", 3)]
    assert bin_events(pings, segment, g, "per-vessel-per-cell").total == 1
    assert bin_events(pings, segment, g, "none").total == 2
    with pytest.raises(ValueError):
        bin_events(pings, segment, g, "sometimes")


def test_bin_hand_histogram(segment):
    g = Grid1D(0.0, 50.0, 4)
    # offsets in meters from lat_min; cells are [0,50), [50,100), [100,150), [150,200)
    offsets = [1, 10, 49, 51, 60, 70, 99, 100, 101, 120, 140, 149, 150, 151, 160, 170, 180, 190,
               199, 10]
    expected = [4, 4, 5, 7]
    events = [ev(segment.lat_min + o / METERS_PER_DEG_LAT) for o in offsets]
    counts = bin_events(events, segment, g, "none")
    np.testing.assert_array_equal(counts.counts, expected)
    out = bin_events(events + [ev(segment.lat_min + 250 / METERS_PER_DEG_LAT)], segment, g, "none")
    assert out.n_excluded == 1 and out.total == 20


def test_bin_order_invariant(segment):
    rng = np.random.default_rng(0)
    g = segment.grid(50.0)
    events = [ev(lat, str(rng.integers(5))) for lat in rng.uniform(36.92, 37.08, 200)]
    a = bin_events(events, segment, g, "none").counts
    b = bin_events([events[i] for i in rng.permutation(200)], segment, g, "none").counts
    np.testing.assert_array_equal(a, b)
    assert a.sum() <= len(events)


def test_segment_grid(segment):
    g = segment.grid(50.0)
    assert g.n_cells == 380
    assert segment.span_days == 31


def test_segment_validation():
    t0, t1 = datetime(2020, 3, 1, tzinfo=UTC), datetime(2020, 4, 1, tzinfo=UTC)
    with pytest.raises(ValueError):
        SegmentSpec(37.0, 36.0, -76, 0.01, t0, t1)
    with pytest.raises(ValueError):
        SegmentSpec(36.0, 37.0, -76, 0.01, t1, t0)


def test_synth_generate():
    g = Grid1D(0, 50, 20)
    assert synth_generate(np.full(20, -50.0), g, 0).total == 0
    np.testing.assert_array_equal(synth_generate(np.zeros(20), g, 4).counts,
                                  synth_generate(np.zeros(20), g, 4).counts)
    f = np.full(20, np.log(100 / 50))
    means = np.array([synth_generate(f, g, s).counts[0] for s in range(500)])
    assert abs(means.mean() - 100) < 3 * np.sqrt(100 / 500)


def test_bimodal_field_has_two_peaks():
    g = Grid1D(0, 50, 100)
    f = bimodal_log_field(g)
    peaks = [i for i in range(1, 99) if f[i] > f[i - 1] and f[i] > f[i + 1]]
    assert len(peaks) == 2 and peaks[0] in (29, 30) and peaks[1] in (69, 70)
