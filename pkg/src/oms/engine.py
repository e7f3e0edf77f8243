"""Center-surround motion computation on binary frames.

The pipeline filters a binary frame with a small center kernel and a larger
surround kernel, takes the absolute difference of the two responses, and
thresholds it: a pixel spikes only where local activity differs from the
wider neighborhood. Globally coherent (ego-motion) activity drives both
responses equally and is suppressed.

Two filtering modes are provided:

* dense (default): both kernels slide at stride 1 over a zero-padded frame,
  so both response maps have the input resolution and the subtraction is
  spatially aligned pixel-for-pixel.
* strided: valid (no-padding) correlation with the surround at stride s_s
  and the center at stride s_c = s_s + r2 - r1. The two output grids have
  different sizes; they are truncated from the top-left to common
  dimensions, subtracted elementwise, thresholded, and the coarse result is
  mapped back to input resolution by nearest-neighbor upsampling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, ParameterError, ValidationError
from .kernels import Kernel, make_feathered_kernel

MODES = ("dense", "strided")


def center_stride(s_s: int, r1: int, r2: int) -> int:
    """Stride of the center kernel derived from the surround stride: s_s + r2 - r1."""
    return s_s + r2 - r1


@dataclass(frozen=True)
class OmsParams:
    """Algorithm parameters. Defaults match the published EV-IMO setting:
    r1=2, r2=4, s_s=1, alpha=0.96, dense mode; sigma defaults to radius/2."""

    r1: int = 2
    r2: int = 4
    s_s: int = 1
    alpha: float = 0.96
    sigma_c: float | None = None
    sigma_s: float | None = None
    mode: str = "dense"

    def __post_init__(self):
        if self.r1 < 1 or self.r2 < 1:
            raise ParameterError("radii must be >= 1")
        if self.r1 >= self.r2:
            raise ParameterError(f"center radius must be < surround radius (r1={self.r1}, r2={self.r2})")
        if self.s_s < 1:
            raise ParameterError(f"surround stride must be >= 1, got {self.s_s}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ParameterError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")

    @property
    def center_sigma(self) -> float:
        return self.sigma_c if self.sigma_c is not None else self.r1 / 2.0

    @property
    def surround_sigma(self) -> float:
        return self.sigma_s if self.sigma_s is not None else self.r2 / 2.0

    @property
    def s_c(self) -> int:
        return center_stride(self.s_s, self.r1, self.r2)

    def make_kernels(self) -> tuple[Kernel, Kernel]:
        return (
            make_feathered_kernel(self.r1, self.center_sigma),
            make_feathered_kernel(self.r2, self.surround_sigma),
        )


def _check_frame(frame: np.ndarray) -> np.ndarray:
    frame = np.asarray(frame)
    if frame.ndim != 2:
        raise ValidationError(f"frame must be 2D, got shape {frame.shape}")
    return frame


def filter_frame(
    frame: np.ndarray, kernel: Kernel, stride: int = 1, mode: str = "dense"
) -> np.ndarray:
    """Cross-correlate a binary frame with a kernel.

    Dense mode ignores `stride` (effective stride 1) and zero-pads so the
    output matches the input shape; output pixel (y, x) covers input rows
    y-r .. y+r-1 and the analogous columns (the even kernel is anchored at
    its continuous center, biased half a pixel up-left). Strided mode is a
    valid correlation with the given stride, output shape
    floor((H - 2r)/stride) + 1 by floor((W - 2r)/stride) + 1.

    Returns float64; values lie in [0, 1] for a {0,1} frame because the
    kernel is non-negative and sums to one.
    """
    frame = _check_frame(frame)
    r = kernel.radius
    n = kernel.size
    h, w = frame.shape
    if n > min(h, w):
        raise ValidationError(f"{n}x{n} kernel does not fit a {h}x{w} frame")
    if mode not in MODES:
        raise ParameterError(f"unknown filter mode {mode!r}")
    data = frame.astype(np.float64)
    if mode == "dense":
        padded = np.pad(data, ((r, r - 1), (r, r - 1)))
        windows = sliding_window_view(padded, (n, n))
    else:
        if stride < 1:
            raise ParameterError(f"stride must be >= 1, got {stride}")
        windows = sliding_window_view(data, (n, n))[::stride, ::stride]
    return np.einsum("ijkl,kl->ij", windows, kernel.weights)


def oms_scores(
    frame: np.ndarray,
    params: OmsParams,
    center: Kernel | None = None,
    surround: Kernel | None = None,
) -> np.ndarray:
    """Per-position |center - surround| response before thresholding.

    Dense mode returns a full-resolution map; strided mode returns the
    coarse (pre-upsampling) grid.
    """
    if center is None or surround is None:
        center, surround = params.make_kernels()
    if params.mode == "dense":
        fc = filter_frame(frame, center, 1, "dense")
        fs = filter_frame(frame, surround, 1, "dense")
        return np.abs(fc - fs)
    fc = filter_frame(frame, center, params.s_c, "strided")
    fs = filter_frame(frame, surround, params.s_s, "strided")
    h = min(fc.shape[0], fs.shape[0])
    w = min(fc.shape[1], fs.shape[1])
    if h == 0 or w == 0:
        raise ConfigError("strided responses share no valid positions on this frame size")
    return np.abs(fc[:h, :w] - fs[:h, :w])


def _upsample_nearest(coarse: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Nearest-neighbor map of a coarse grid onto a full-resolution shape:
    full pixel (y, x) reads coarse cell (floor(y*h'/H), floor(x*w'/W))."""
    h_full, w_full = shape
    hc, wc = coarse.shape
    rows = (np.arange(h_full) * hc) // h_full
    cols = (np.arange(w_full) * wc) // w_full
    return coarse[np.ix_(rows, cols)]


def oms_frame(
    frame: np.ndarray,
    params: OmsParams,
    center: Kernel | None = None,
    surround: Kernel | None = None,
) -> np.ndarray:
    """Threshold the center-surround score into a {0,1} motion mask with the
    input frame's shape. Spikes use strict inequality: score > alpha."""
    frame = _check_frame(frame)
    scores = oms_scores(frame, params, center, surround)
    mask = (scores > params.alpha).astype(np.uint8)
    if params.mode == "strided":
        mask = _upsample_nearest(mask, frame.shape)
    return mask


def oms_sequence(
    frames: Sequence[np.ndarray], params: OmsParams, threads: int = 1
) -> list[np.ndarray]:
    """Apply oms_frame to every frame with kernels built once.

    All frames must share one shape. Per-frame work is pure, so threaded
    execution is bitwise identical to sequential; output order always
    matches input order.
    """
    frames = [_check_frame(f) for f in frames]
    if not frames:
        return []
    shape = frames[0].shape
    for i, f in enumerate(frames):
        if f.shape != shape:
            raise ValidationError(f"frame {i} has shape {f.shape}, expected {shape}")
    center, surround = params.make_kernels()
    if threads <= 1:
        return [oms_frame(f, params, center, surround) for f in frames]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda f: oms_frame(f, params, center, surround), frames))


def apply_mask(frame: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Pixel-wise AND of a binary frame and a mask, as uint8 {0,1}."""
    frame = _check_frame(frame)
    mask = _check_frame(mask)
    if frame.shape != mask.shape:
        raise ValidationError(f"shape mismatch: frame {frame.shape} vs mask {mask.shape}")
    return (frame.astype(bool) & mask.astype(bool)).astype(np.uint8)
