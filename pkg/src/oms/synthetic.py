"""Synthetic scene generator: desk-scale event streams with ground truth.

A scene is a binary background texture translated toroidally by a constant
camera velocity, plus opaque moving objects (disks or rectangles) painted
on top. Frame k is rendered at t = k * 1000 us; an event is emitted for
every pixel whose rendered value changes between consecutive frames (+1
for 0->1, -1 for 1->0), timestamped at the later frame. Optional Poisson
noise events are scattered uniformly per frame.

Randomness comes from numpy's default_rng (PCG64), so a fixed seed fully
determines the scene. Ground-truth masks are the object footprints; they
never depend on camera velocity or noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .events import EVENT_DTYPE, SensorGeometry, accumulate_frame, window_events
from .metrics import bf_ratio

FRAME_DT_US = 1000

SHAPES = ("disk", "rect")


@dataclass(frozen=True)
class SceneObject:
    """One moving object. `size` is the disk radius or the rectangle side
    length in pixels; `start` is the object center (x, y) at frame 0;
    `velocity` is (vx, vy) in pixels per frame."""

    shape: str
    size: int
    velocity: tuple[float, float]
    start: tuple[float, float]

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ParameterError(f"object shape must be one of {SHAPES}, got {self.shape!r}")
        if self.size < 1:
            raise ParameterError(f"object size must be >= 1, got {self.size}")


@dataclass(frozen=True)
class SceneConfig:
    geometry: SensorGeometry
    n_frames: int
    bg_density: float
    camera_velocity: tuple[float, float]
    objects: tuple[SceneObject, ...]
    noise_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "geometry", SensorGeometry(*self.geometry).validate())
        object.__setattr__(self, "objects", tuple(self.objects))
        if self.n_frames < 2:
            raise ParameterError(f"need at least 2 frames, got {self.n_frames}")
        if not 0.0 < self.bg_density < 1.0:
            raise ParameterError(f"bg_density must lie in (0, 1), got {self.bg_density}")
        if self.noise_rate < 0:
            raise ParameterError("noise_rate must be >= 0")
        w, h = self.geometry.width, self.geometry.height
        for obj in self.objects:
            x, y = obj.start
            if not (0 <= x < w and 0 <= y < h):
                raise ParameterError(f"object start {obj.start} outside {w}x{h} frame")
            extent = 2 * obj.size if obj.shape == "disk" else obj.size
            if extent > min(w, h):
                raise ParameterError(f"object of extent {extent} does not fit a {w}x{h} frame")

    def to_dict(self) -> dict:
        return {
            "geometry": {"width": self.geometry.width, "height": self.geometry.height},
            "n_frames": self.n_frames,
            "bg_density": self.bg_density,
            "camera_velocity": list(self.camera_velocity),
            "objects": [
                {
                    "shape": o.shape,
                    "size": o.size,
                    "velocity": list(o.velocity),
                    "start": list(o.start),
                }
                for o in self.objects
            ],
            "noise_rate": self.noise_rate,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SceneConfig":
        return cls(
            geometry=SensorGeometry(d["geometry"]["width"], d["geometry"]["height"]),
            n_frames=d["n_frames"],
            bg_density=d["bg_density"],
            camera_velocity=tuple(d["camera_velocity"]),
            objects=tuple(
                SceneObject(
                    shape=o["shape"],
                    size=o["size"],
                    velocity=tuple(o["velocity"]),
                    start=tuple(o["start"]),
                )
                for o in d["objects"]
            ),
            noise_rate=d.get("noise_rate", 0.0),
            seed=d.get("seed", 0),
        )


def _object_footprint(obj: SceneObject, frame_index: int, shape: tuple[int, int]) -> np.ndarray:
    h, w = shape
    cx = obj.start[0] + frame_index * obj.velocity[0]
    cy = obj.start[1] + frame_index * obj.velocity[1]
    # Sub-pixel positions accumulate as reals and are rounded at render time.
    cx, cy = round(cx), round(cy)
    mask = np.zeros((h, w), dtype=bool)
    if obj.shape == "disk":
        yy, xx = np.ogrid[:h, :w]
        mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= obj.size**2
    else:
        half = obj.size // 2
        x0, x1 = cx - half, cx - half + obj.size
        y0, y1 = cy - half, cy - half + obj.size
        mask[max(y0, 0) : max(y1, 0), max(x0, 0) : max(x1, 0)] = True
    return mask


def render_frames(config: SceneConfig) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Rendered boolean frames and per-frame object footprints, frame 0..n-1."""
    rng = np.random.default_rng(config.seed)
    h, w = config.geometry.shape
    bg = rng.random((h, w)) < config.bg_density
    vx, vy = config.camera_velocity
    frames = []
    footprints = []
    for k in range(config.n_frames):
        shifted = np.roll(bg, (round(k * vy), round(k * vx)), axis=(0, 1))
        fp = np.zeros((h, w), dtype=bool)
        for obj in config.objects:
            fp |= _object_footprint(obj, k, (h, w))
        frames.append(shifted | fp)
        footprints.append(fp)
    return frames, footprints


def generate_scene(
    config: SceneConfig,
) -> tuple[np.ndarray, list[np.ndarray], list[int]]:
    """Generate (events, ground-truth masks, mask timestamps).

    Masks and timestamps cover frames 1..n-1 (frame 0 is the reference
    image and produces no events). Event order inside a frame is row-major
    change pixels followed by noise events; timestamps are non-decreasing.
    """
    frames, footprints = render_frames(config)
    # Independent noise stream so footprints/frames stay noise-free.
    rng = np.random.default_rng((config.seed, 1))
    h, w = config.geometry.shape
    chunks = []
    masks = []
    timestamps = []
    for k in range(1, config.n_frames):
        t = k * FRAME_DT_US
        diff = frames[k] != frames[k - 1]
        ys, xs = np.nonzero(diff)
        ev = np.empty(len(ys), dtype=EVENT_DTYPE)
        ev["t"] = t
        ev["x"] = xs
        ev["y"] = ys
        ev["p"] = np.where(frames[k][ys, xs], 1, -1)
        chunks.append(ev)
        n_noise = int(rng.poisson(config.noise_rate))
        if n_noise:
            nev = np.empty(n_noise, dtype=EVENT_DTYPE)
            nev["t"] = t
            nev["x"] = rng.integers(0, w, n_noise)
            nev["y"] = rng.integers(0, h, n_noise)
            nev["p"] = rng.choice(np.array([-1, 1], dtype=np.int8), n_noise)
            chunks.append(nev)
        masks.append(footprints[k].astype(np.uint8))
        timestamps.append(t)
    events = np.concatenate(chunks) if chunks else np.empty(0, dtype=EVENT_DTYPE)
    return events, masks, timestamps


def scene_br(config: SceneConfig) -> float:
    """Mean background-to-foreground ratio over the generated frames.

    Frames with no activity inside the ground truth are excluded; if every
    frame is excluded the result is +inf.
    """
    if not config.objects:
        raise ParameterError("scene_br needs at least one object")
    events, masks, timestamps = generate_scene(config)
    windows = window_events(events, timestamps)
    ratios = []
    for win, mask in zip(windows, masks):
        r = bf_ratio(accumulate_frame(win, config.geometry), mask)
        if np.isfinite(r):
            ratios.append(r)
    return float(np.mean(ratios)) if ratios else float("inf")
