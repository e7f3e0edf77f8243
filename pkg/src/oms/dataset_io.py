"""On-disk formats: native event files, PGM masks, dataset manifests, and
importers for EV-IMO- and MOD-style directory layouts.

Native event file (".evt"):
    16-byte header: magic "EVT1", width (u16 LE), height (u16 LE),
    8 reserved zero bytes; then 13-byte packed records
    t (u64 LE, microseconds), x (u16 LE), y (u16 LE), p (i8, -1 or +1).
    A CSV fallback with header line "t,x,y,p" is also accepted on read.

Masks are binary PGM (P5, maxval 255): 0 background, 255 moving object.
Reads are tolerant (any nonzero byte decodes to 1, since public dataset
masks encode object ids as gray levels); writes are strict 0/255.

The manifest is JSON with fields geometry {width, height}, event_file,
mask_dir, mask_timestamps (integers, microseconds), source.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ParseError, ValidationError
from .events import EVENT_DTYPE, SensorGeometry, validate_stream

MAGIC = b"EVT1"
HEADER_SIZE = 16
RECORD_SIZE = EVENT_DTYPE.itemsize  # 13
FORMAT_VERSION = 1

CSV_HEADER = "t,x,y,p"


def write_events(events, geometry: SensorGeometry, path) -> None:
    """Write the native binary event format (validates bounds first)."""
    geometry = SensorGeometry(*geometry).validate()
    ev = validate_stream(events, geometry)
    header = MAGIC + struct.pack("<HH", geometry.width, geometry.height) + b"\x00" * 8
    Path(path).write_bytes(header + ev.tobytes())


def read_events(path) -> np.ndarray:
    """Read a native binary event file (or the CSV fallback) into EVENT_DTYPE."""
    path = Path(path)
    data = path.read_bytes()
    if data[:4] == MAGIC:
        return _parse_native(data, path)
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError:
        text = None
    if text is not None and text.lstrip().startswith(CSV_HEADER):
        return _parse_csv(text, path)
    raise ParseError(f"{path}: bad magic at byte offset 0 (not {MAGIC!r} or CSV)")


def event_file_geometry(path) -> SensorGeometry:
    """Sensor geometry from a native event file header."""
    data = Path(path).read_bytes()
    if data[:4] != MAGIC or len(data) < HEADER_SIZE:
        raise ParseError(f"{path}: not a native event file")
    w, h = struct.unpack("<HH", data[4:8])
    return SensorGeometry(w, h)


def _parse_native(data: bytes, path: Path) -> np.ndarray:
    if len(data) < HEADER_SIZE:
        raise ParseError(f"{path}: truncated header at byte offset {len(data)}")
    w, h = struct.unpack("<HH", data[4:8])
    body = len(data) - HEADER_SIZE
    if body % RECORD_SIZE:
        raise ParseError(
            f"{path}: truncated record at byte offset "
            f"{HEADER_SIZE + (body // RECORD_SIZE) * RECORD_SIZE}"
        )
    events = np.frombuffer(data, dtype=EVENT_DTYPE, offset=HEADER_SIZE).copy()
    bad = np.nonzero(
        ~np.isin(events["p"], (-1, 1)) | (events["x"] >= w) | (events["y"] >= h)
    )[0]
    if bad.size:
        i = int(bad[0])
        raise ParseError(f"{path}: invalid record at byte offset {HEADER_SIZE + i * RECORD_SIZE}")
    return events


def _parse_csv(text: str, path: Path) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(text.splitlines()):
        line = line.strip()
        if not line or lineno == 0:
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ParseError(f"{path}: malformed CSV line {lineno + 1}")
        try:
            rows.append(tuple(int(v) for v in parts))
        except ValueError as exc:
            raise ParseError(f"{path}: malformed CSV line {lineno + 1}: {exc}") from exc
    events = np.array(rows, dtype=EVENT_DTYPE) if rows else np.empty(0, dtype=EVENT_DTYPE)
    bad = np.nonzero(~np.isin(events["p"], (-1, 1)))[0]
    if bad.size:
        raise ParseError(f"{path}: invalid polarity on CSV row {int(bad[0]) + 1}")
    return events


# --- PGM masks -------------------------------------------------------------


def write_mask(mask: np.ndarray, path) -> None:
    """Write a {0,1} mask as binary PGM with values 0/255."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValidationError(f"mask must be 2D, got shape {mask.shape}")
    h, w = mask.shape
    body = ((mask > 0).astype(np.uint8) * 255).tobytes()
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + body)


def read_mask(path, geometry: SensorGeometry | None = None) -> np.ndarray:
    """Read a binary PGM into a {0,1} uint8 mask (any nonzero byte -> 1)."""
    path = Path(path)
    data = path.read_bytes()
    if data[:2] != b"P5":
        raise ParseError(f"{path}: not a binary PGM (P5) file")
    # Header: magic, width, height, maxval as whitespace-separated tokens,
    # with optional '#' comment lines.
    tokens: list[bytes] = []
    i = 2
    while len(tokens) < 3 and i < len(data):
        c = data[i : i + 1]
        if c == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(data) and not data[j : j + 1].isspace():
                j += 1
            tokens.append(data[i:j])
            i = j
    if len(tokens) < 3:
        raise ParseError(f"{path}: truncated PGM header")
    i += 1  # single whitespace byte after maxval
    try:
        w, h, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise ParseError(f"{path}: malformed PGM header: {exc}") from exc
    if maxval > 255:
        raise ParseError(f"{path}: only 8-bit PGM supported (maxval {maxval})")
    if len(data) - i < w * h:
        raise ParseError(f"{path}: truncated pixel data at byte offset {len(data)}")
    pixels = np.frombuffer(data, dtype=np.uint8, offset=i, count=w * h).reshape(h, w)
    if geometry is not None and (w, h) != (geometry.width, geometry.height):
        raise ParseError(f"{path}: mask is {w}x{h}, manifest geometry is "
                         f"{geometry.width}x{geometry.height}")
    return (pixels > 0).astype(np.uint8)


# --- manifests and whole datasets -------------------------------------------


def mask_filename(index: int) -> str:
    return f"mask_{index:05d}.pgm"


@dataclass(frozen=True)
class DatasetManifest:
    geometry: SensorGeometry
    event_file: str
    mask_dir: str
    mask_timestamps: tuple[int, ...]
    source: str = "native"

    def __post_init__(self):
        object.__setattr__(self, "geometry", SensorGeometry(*self.geometry).validate())
        ts = tuple(int(t) for t in self.mask_timestamps)
        object.__setattr__(self, "mask_timestamps", ts)
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValidationError("mask timestamps must be strictly increasing")

    def save(self, path) -> None:
        doc = {
            "geometry": {"width": self.geometry.width, "height": self.geometry.height},
            "event_file": self.event_file,
            "mask_dir": self.mask_dir,
            "mask_timestamps": list(self.mask_timestamps),
            "source": self.source,
        }
        Path(path).write_text(json.dumps(doc, indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid manifest JSON: {exc}") from exc
        try:
            return cls(
                geometry=SensorGeometry(doc["geometry"]["width"], doc["geometry"]["height"]),
                event_file=doc["event_file"],
                mask_dir=doc["mask_dir"],
                mask_timestamps=tuple(doc["mask_timestamps"]),
                source=doc.get("source", "native"),
            )
        except KeyError as exc:
            raise ParseError(f"{path}: manifest missing field {exc}") from exc

    def resolve(self, base) -> tuple[Path, Path]:
        """Event file and mask dir paths, relative to the manifest location."""
        base = Path(base)
        return base / self.event_file, base / self.mask_dir


def write_dataset(
    out_dir,
    events,
    geometry: SensorGeometry,
    masks: Sequence[np.ndarray],
    timestamps: Sequence[int],
    source: str = "native",
) -> Path:
    """Write events + masks + manifest into out_dir; returns the manifest path."""
    if len(masks) != len(timestamps):
        raise ValidationError(f"{len(masks)} masks but {len(timestamps)} timestamps")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    mask_dir = out_dir / "masks"
    mask_dir.mkdir(exist_ok=True)
    write_events(events, geometry, out_dir / "events.evt")
    for i, mask in enumerate(masks):
        write_mask(mask, mask_dir / mask_filename(i))
    manifest = DatasetManifest(
        geometry=geometry,
        event_file="events.evt",
        mask_dir="masks",
        mask_timestamps=tuple(timestamps),
        source=source,
    )
    manifest_path = out_dir / "manifest.json"
    manifest.save(manifest_path)
    return manifest_path


def load_dataset(manifest_path):
    """Load (manifest, events, masks) referenced by a manifest file."""
    manifest_path = Path(manifest_path)
    manifest = DatasetManifest.load(manifest_path)
    event_path, mask_dir = manifest.resolve(manifest_path.parent)
    events = read_events(event_path)
    masks = [
        read_mask(mask_dir / mask_filename(i), manifest.geometry)
        for i in range(len(manifest.mask_timestamps))
    ]
    return manifest, events, masks


# --- external dataset importers ---------------------------------------------


def _load_importer_masks(mask_dir: Path, geometry: SensorGeometry) -> list[np.ndarray]:
    files = sorted(mask_dir.glob("*.pgm"))
    if not files:
        raise ParseError(f"no .pgm masks found in {mask_dir}")
    return [read_mask(f, geometry) for f in files]


def _finish_import(out_dir, t_us, x, y, p, geometry, masks, timestamps, source):
    order = np.argsort(t_us, kind="stable")
    events = np.empty(len(t_us), dtype=EVENT_DTYPE)
    events["t"] = t_us[order]
    events["x"] = x[order]
    events["y"] = y[order]
    events["p"] = p[order]
    ts = [int(t) for t in timestamps]
    if len(ts) != len(masks):
        raise ParseError(f"{len(masks)} masks but {len(ts)} timestamps")
    manifest_path = write_dataset(out_dir, events, geometry, masks, ts, source=source)
    return DatasetManifest.load(manifest_path)


def import_evimo(src_dir, out_dir) -> DatasetManifest:
    """Convert an EV-IMO-style directory to the native layout.

    Expected layout (documented in the README):
      events.txt      whitespace-separated "t x y p" rows, t in seconds
                      (float), p in {0, 1}
      timestamps.txt  one mask timestamp in seconds per line
      masks/*.pgm     one mask per timestamp, sorted by filename
      meta.json       optional {"width": W, "height": H}; default 346x260
    """
    src = Path(src_dir)
    missing = [n for n in ("events.txt", "timestamps.txt", "masks") if not (src / n).exists()]
    if missing:
        raise ParseError(f"{src}: missing required entries: {', '.join(missing)}")
    geometry = _read_meta_geometry(src, default=SensorGeometry(346, 260))
    raw = np.loadtxt(src / "events.txt", ndmin=2)
    if raw.size == 0:
        raw = raw.reshape(0, 4)
    if raw.shape[1] != 4:
        raise ParseError(f"{src}/events.txt: expected 4 columns, got {raw.shape[1]}")
    t_us = np.round(raw[:, 0] * 1e6).astype(np.int64)
    p01 = raw[:, 3].astype(np.int64)
    if not np.isin(p01, (0, 1)).all():
        raise ParseError(f"{src}/events.txt: polarity column must be 0/1")
    ts_s = np.loadtxt(src / "timestamps.txt", ndmin=1)
    masks = _load_importer_masks(src / "masks", geometry)
    return _finish_import(
        out_dir,
        t_us,
        raw[:, 1].astype(np.int64),
        raw[:, 2].astype(np.int64),
        np.where(p01 == 1, 1, -1).astype(np.int8),
        geometry,
        masks,
        np.round(ts_s * 1e6).astype(np.int64),
        source="evimo",
    )


def import_mod(src_dir, out_dir) -> DatasetManifest:
    """Convert a MOD-style directory to the native layout.

    Expected layout (documented in the README):
      events.npy      float array of shape (N, 4): t [s], x, y, p with
                      p in {-1, +1} (0/1 also accepted)
      timestamps.npy  float array of mask timestamps in seconds
      masks/*.pgm     one mask per timestamp, sorted by filename
      meta.json       optional {"width": W, "height": H}; default 346x260
    """
    src = Path(src_dir)
    missing = [n for n in ("events.npy", "timestamps.npy", "masks") if not (src / n).exists()]
    if missing:
        raise ParseError(f"{src}: missing required entries: {', '.join(missing)}")
    geometry = _read_meta_geometry(src, default=SensorGeometry(346, 260))
    raw = np.load(src / "events.npy")
    if raw.ndim != 2 or raw.shape[1] != 4:
        raise ParseError(f"{src}/events.npy: expected shape (N, 4), got {raw.shape}")
    p = raw[:, 3].astype(np.int64)
    if np.isin(p, (0, 1)).all():
        p = np.where(p == 1, 1, -1)
    if not np.isin(p, (-1, 1)).all():
        raise ParseError(f"{src}/events.npy: polarity column must be -1/+1 or 0/1")
    ts_s = np.load(src / "timestamps.npy")
    masks = _load_importer_masks(src / "masks", geometry)
    return _finish_import(
        out_dir,
        np.round(raw[:, 0] * 1e6).astype(np.int64),
        raw[:, 1].astype(np.int64),
        raw[:, 2].astype(np.int64),
        p.astype(np.int8),
        geometry,
        masks,
        np.round(np.asarray(ts_s) * 1e6).astype(np.int64),
        source="mod",
    )


def _read_meta_geometry(src: Path, default: SensorGeometry) -> SensorGeometry:
    meta = src / "meta.json"
    if not meta.exists():
        return default
    try:
        doc = json.loads(meta.read_text())
        return SensorGeometry(doc["width"], doc["height"]).validate()
    except (json.JSONDecodeError, KeyError) as exc:
        raise ParseError(f"{meta}: malformed meta file: {exc}") from exc
