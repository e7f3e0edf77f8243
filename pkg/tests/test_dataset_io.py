import json
import struct

import numpy as np
import pytest

from oms import EVENT_DTYPE, Event, SensorGeometry, as_event_array
from oms.dataset_io import (
    DatasetManifest,
    ParseError,
    event_file_geometry,
    import_evimo,
    import_mod,
    load_dataset,
    mask_filename,
    read_events,
    read_mask,
    write_dataset,
    write_events,
    write_mask,
)

GEOM = SensorGeometry(64, 48)


def random_events(rng, n, geom=GEOM):
    ev = np.zeros(n, dtype=EVENT_DTYPE)
    ev["t"] = np.sort(rng.integers(0, 10**6, n))
    ev["x"] = rng.integers(0, geom.width, n)
    ev["y"] = rng.integers(0, geom.height, n)
    ev["p"] = rng.choice([-1, 1], n)
    return ev


class TestEventFiles:
    def test_header_only(self, tmp_path):
        path = tmp_path / "empty.evt"
        write_events(np.empty(0, dtype=EVENT_DTYPE), GEOM, path)
        assert path.stat().st_size == 16
        assert len(read_events(path)) == 0

    def test_one_event_file_size(self, tmp_path):
        path = tmp_path / "one.evt"
        write_events(as_event_array([Event(1, 2, 3, 1)]), GEOM, path)
        assert path.stat().st_size == 29  # 16 + 13

    def test_round_trip(self, tmp_path, rng):
        path = tmp_path / "events.evt"
        ev = random_events(rng, 10_000)
        write_events(ev, GEOM, path)
        assert np.array_equal(read_events(path), ev)
        assert event_file_geometry(path) == GEOM

    def test_hand_built_record(self, tmp_path):
        header = b"EVT1" + struct.pack("<HH", 10, 10) + b"\x00" * 8
        record = struct.pack("<QHHb", 1, 2, 3, 1)
        path = tmp_path / "hand.evt"
        path.write_bytes(header + record)
        ev = read_events(path)
        assert tuple(ev[0]) == (1, 2, 3, 1)

    def test_truncated_record(self, tmp_path):
        header = b"EVT1" + struct.pack("<HH", 10, 10) + b"\x00" * 8
        path = tmp_path / "trunc.evt"
        path.write_bytes(header + b"\x00" * 20)  # 1 full record + 7 stray bytes
        with pytest.raises(ParseError, match="byte offset 29"):
            read_events(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.evt"
        path.write_bytes(b"\x89PNGxxxxxxxxxxxxxxx")
        with pytest.raises(ParseError, match="offset 0"):
            read_events(path)

    def test_bad_polarity_offset(self, tmp_path):
        header = b"EVT1" + struct.pack("<HH", 10, 10) + b"\x00" * 8
        good = struct.pack("<QHHb", 1, 2, 3, 1)
        bad = struct.pack("<QHHb", 2, 2, 3, 5)
        path = tmp_path / "badp.evt"
        path.write_bytes(header + good + bad)
        with pytest.raises(ParseError, match="byte offset 29"):
            read_events(path)

    def test_csv_fallback(self, tmp_path):
        path = tmp_path / "events.csv"
        path.write_text("t,x,y,p\n1,2,3,1\n5,4,0,-1\n")
        ev = read_events(path)
        assert [tuple(e) for e in ev] == [(1, 2, 3, 1), (5, 4, 0, -1)]


class TestMaskFiles:
    def test_all_zero(self, tmp_path):
        path = tmp_path / "m.pgm"
        write_mask(np.zeros((8, 12), np.uint8), path)
        assert not read_mask(path).any()

    def test_round_trip(self, tmp_path, rng):
        mask = (rng.random((48, 64)) < 0.3).astype(np.uint8)
        path = tmp_path / "m.pgm"
        write_mask(mask, path)
        assert np.array_equal(read_mask(path), mask)

    def test_strict_write_values(self, tmp_path):
        path = tmp_path / "m.pgm"
        write_mask(np.eye(4, dtype=np.uint8), path)
        body = path.read_bytes().split(b"255\n", 1)[1]
        assert set(body) <= {0, 255}

    def test_tolerant_read_of_gray_levels(self, tmp_path):
        # dataset masks encode object ids as gray levels; any nonzero -> 1
        path = tmp_path / "gray.pgm"
        body = bytes([0, 128, 255, 7])
        path.write_bytes(b"P5\n2 2\n255\n" + body)
        assert np.array_equal(read_mask(path), [[0, 1], [1, 1]])

    def test_geometry_mismatch(self, tmp_path):
        path = tmp_path / "m.pgm"
        write_mask(np.zeros((8, 8), np.uint8), path)
        with pytest.raises(ParseError, match="8x8"):
            read_mask(path, SensorGeometry(16, 16))

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"P6\n2 2\n255\n" + bytes(12))
        with pytest.raises(ParseError):
            read_mask(path)


class TestManifest:
    def test_round_trip(self, tmp_path):
        manifest = DatasetManifest(GEOM, "events.evt", "masks", (10, 20, 30), "native")
        path = tmp_path / "manifest.json"
        manifest.save(path)
        assert DatasetManifest.load(path) == manifest

    def test_nonincreasing_timestamps_rejected(self):
        with pytest.raises(Exception):
            DatasetManifest(GEOM, "e", "m", (10, 10), "native")

    def test_write_then_load_dataset(self, tmp_path, rng):
        ev = random_events(rng, 500)
        masks = [(rng.random((48, 64)) < 0.2).astype(np.uint8) for _ in range(3)]
        manifest_path = write_dataset(tmp_path / "ds", ev, GEOM, masks, [10, 20, 30])
        manifest, events, loaded = load_dataset(manifest_path)
        assert manifest.mask_timestamps == (10, 20, 30)
        assert np.array_equal(events, ev)
        assert all(np.array_equal(a, b) for a, b in zip(masks, loaded))


def build_evimo_fixture(root, rng):
    """Miniature directory in the documented EV-IMO adapter layout."""
    root.mkdir()
    geom = SensorGeometry(32, 24)
    (root / "meta.json").write_text(json.dumps({"width": 32, "height": 24}))
    t = np.sort(rng.random(200)) * 0.3
    x = rng.integers(0, 32, 200)
    y = rng.integers(0, 24, 200)
    p = rng.integers(0, 2, 200)
    lines = [f"{ti:.9f} {xi} {yi} {pi}" for ti, xi, yi, pi in zip(t, x, y, p)]
    (root / "events.txt").write_text("\n".join(lines) + "\n")
    (root / "timestamps.txt").write_text("0.1\n0.2\n0.3\n")
    mask_dir = root / "masks"
    mask_dir.mkdir()
    for i in range(3):
        write_mask((rng.random((24, 32)) < 0.2).astype(np.uint8), mask_dir / mask_filename(i))
    return geom


class TestImporters:
    def test_import_evimo_fixture(self, tmp_path, rng):
        src = tmp_path / "evimo"
        build_evimo_fixture(src, rng)
        manifest = import_evimo(src, tmp_path / "native")
        assert manifest.source == "evimo"
        assert len(manifest.mask_timestamps) == 3
        assert manifest.mask_timestamps == (100_000, 200_000, 300_000)
        _, events, masks = load_dataset(tmp_path / "native" / "manifest.json")
        assert len(events) == 200 and len(masks) == 3
        assert (np.diff(events["t"].astype(np.int64)) >= 0).all()

    def test_import_empty_directory(self, tmp_path):
        src = tmp_path / "empty"
        src.mkdir()
        with pytest.raises(ParseError, match="missing required entries"):
            import_evimo(src, tmp_path / "native")
        with pytest.raises(ParseError, match="missing required entries"):
            import_mod(src, tmp_path / "native")

    def test_reimport_is_deterministic(self, tmp_path, rng):
        src = tmp_path / "evimo"
        build_evimo_fixture(src, rng)
        import_evimo(src, tmp_path / "a")
        import_evimo(src, tmp_path / "b")
        assert (tmp_path / "a" / "events.evt").read_bytes() == (
            tmp_path / "b" / "events.evt"
        ).read_bytes()
        for i in range(3):
            assert (tmp_path / "a" / "masks" / mask_filename(i)).read_bytes() == (
                tmp_path / "b" / "masks" / mask_filename(i)
            ).read_bytes()

    def test_import_mod_fixture(self, tmp_path, rng):
        src = tmp_path / "mod"
        src.mkdir()
        (src / "meta.json").write_text(json.dumps({"width": 32, "height": 24}))
        raw = np.zeros((100, 4))
        raw[:, 0] = np.sort(rng.random(100)) * 0.2
        raw[:, 1] = rng.integers(0, 32, 100)
        raw[:, 2] = rng.integers(0, 24, 100)
        raw[:, 3] = rng.choice([-1, 1], 100)
        np.save(src / "events.npy", raw)
        np.save(src / "timestamps.npy", np.array([0.1, 0.2]))
        mask_dir = src / "masks"
        mask_dir.mkdir()
        for i in range(2):
            write_mask((rng.random((24, 32)) < 0.2).astype(np.uint8), mask_dir / mask_filename(i))
        manifest = import_mod(src, tmp_path / "native")
        assert manifest.source == "mod"
        assert manifest.mask_timestamps == (100_000, 200_000)
