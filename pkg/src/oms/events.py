"""Event-stream primitives.

Events are DVS brightness-change records (t, x, y, p) with t in integer
microseconds and polarity p in {-1, +1}. Streams are kept as numpy
structured arrays (EVENT_DTYPE) so that windowing and accumulation are
vectorized; single records use the Event named tuple.

The accumulation step collapses both time and polarity: a pixel of the
output binary frame is 1 iff at least one event of either polarity landed
there inside the window. This mimics bipolar-cell activation feeding the
downstream center-surround stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np

from .errors import ValidationError

# 13 bytes packed, little-endian: matches the on-disk record layout exactly.
EVENT_DTYPE = np.dtype([("t", "<u8"), ("x", "<u2"), ("y", "<u2"), ("p", "i1")])
assert EVENT_DTYPE.itemsize == 13


class SensorGeometry(NamedTuple):
    width: int
    height: int

    def validate(self) -> "SensorGeometry":
        if self.width < 1 or self.height < 1:
            raise ValidationError(f"sensor geometry must be >= 1x1, got {self}")
        return self

    @property
    def shape(self) -> tuple[int, int]:
        """(rows, cols) shape of frames on this sensor."""
        return (self.height, self.width)


class Event(NamedTuple):
    t: int
    x: int
    y: int
    p: int


EventsLike = Union[np.ndarray, Sequence[Event], Sequence[tuple]]


def as_event_array(events: EventsLike) -> np.ndarray:
    """Coerce a sequence of Event tuples (or a structured array) to EVENT_DTYPE."""
    if isinstance(events, np.ndarray) and events.dtype == EVENT_DTYPE:
        return events
    rows = [tuple(e) for e in events]
    if not rows:
        return np.empty(0, dtype=EVENT_DTYPE)
    return np.array(rows, dtype=EVENT_DTYPE)


def validate_stream(events: np.ndarray, geometry: SensorGeometry | None = None) -> np.ndarray:
    """Check ordering, polarity, and (optionally) coordinate bounds of a stream.

    Raises ValidationError naming the first offending index.
    """
    events = as_event_array(events)
    t = events["t"].astype(np.int64)
    if len(t) > 1:
        bad = np.nonzero(np.diff(t) < 0)[0]
        if bad.size:
            raise ValidationError(f"event stream unsorted: t decreases at index {int(bad[0]) + 1}")
    bad_p = np.nonzero(~np.isin(events["p"], (-1, 1)))[0]
    if bad_p.size:
        raise ValidationError(f"invalid polarity at event index {int(bad_p[0])}")
    if geometry is not None:
        oob = np.nonzero((events["x"] >= geometry.width) | (events["y"] >= geometry.height))[0]
        if oob.size:
            i = int(oob[0])
            raise ValidationError(
                f"event {i} at (x={int(events['x'][i])}, y={int(events['y'][i])}) "
                f"outside {geometry.width}x{geometry.height} sensor"
            )
    return events


@dataclass(frozen=True)
class EventWindow:
    """Events with t in the half-open interval (t_start, t_end]."""

    events: np.ndarray
    t_start: int
    t_end: int

    def __post_init__(self):
        ev = as_event_array(self.events)
        object.__setattr__(self, "events", ev)
        t = ev["t"].astype(np.int64)
        if t.size:
            if t.min() <= self.t_start or t.max() > self.t_end:
                raise ValidationError(
                    f"window events outside ({self.t_start}, {self.t_end}]"
                )
            if np.any(np.diff(t) < 0):
                raise ValidationError("window events not time-ordered")

    def __len__(self) -> int:
        return len(self.events)


def window_events(
    stream: EventsLike, mask_timestamps: Sequence[int]
) -> list[EventWindow]:
    """Partition a sorted stream into one window per mask timestamp.

    Window k holds events with t in (t_{k-1}, t_k], with t_0 = -1 so the
    first window takes everything up to and including the first timestamp.
    Events after the last timestamp are dropped (no ground truth exists
    for them).
    """
    ev = validate_stream(stream)
    ts = np.asarray(mask_timestamps, dtype=np.int64)
    if ts.size and np.any(np.diff(ts) <= 0):
        raise ValidationError("mask timestamps must be strictly increasing")
    bounds = np.searchsorted(ev["t"].astype(np.int64), ts, side="right")
    windows = []
    lo = 0
    t_prev = -1
    for k, hi in enumerate(bounds):
        windows.append(EventWindow(ev[lo:hi], t_prev, int(ts[k])))
        lo = int(hi)
        t_prev = int(ts[k])
    return windows


def accumulate_frame(
    window: EventWindow | EventsLike, geometry: SensorGeometry
) -> np.ndarray:
    """Collapse a window into a binary frame: pixel = 1 iff any event hit it.

    Polarity is ignored ("compressed") on purpose. Returns a uint8 array of
    shape (height, width) with values in {0, 1}.
    """
    geometry = SensorGeometry(*geometry).validate()
    ev = window.events if isinstance(window, EventWindow) else as_event_array(window)
    oob = np.nonzero((ev["x"] >= geometry.width) | (ev["y"] >= geometry.height))[0]
    if oob.size:
        raise ValidationError(f"event {int(oob[0])} outside sensor bounds")
    frame = np.zeros(geometry.shape, dtype=np.uint8)
    frame[ev["y"], ev["x"]] = 1
    return frame
