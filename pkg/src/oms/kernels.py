"""Feathered-circle Gaussian receptive-field kernels.

A kernel of radius r is a (2r x 2r) grid of non-negative weights: a
Gaussian evaluated at cell centers, cut to a circular support of radius r,
then normalized to sum to one. The even grid has no center pixel, so the
Gaussian origin is the continuous matrix center (r, r) and cells are
sampled at (i + 0.5, j + 0.5); this keeps exact 4-fold symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class Kernel:
    radius: int
    sigma: float
    weights: np.ndarray

    @property
    def size(self) -> int:
        return 2 * self.radius


def make_feathered_kernel(radius: int, sigma: float) -> Kernel:
    """Build a normalized feathered-circle Gaussian kernel.

    Weight at cell (i, j) is exp(-d^2 / (2 sigma^2)) where d is the distance
    from the cell center (i + 0.5, j + 0.5) to the matrix center (radius,
    radius); cells with d > radius are zeroed, then the grid is divided by
    its sum.
    """
    if not isinstance(radius, (int, np.integer)) or radius < 1:
        raise ParameterError(f"kernel radius must be a positive integer, got {radius!r}")
    if sigma <= 0:
        raise ParameterError(f"kernel sigma must be > 0, got {sigma!r}")
    n = 2 * radius
    offsets = np.arange(n) + 0.5 - radius  # cell-center offsets from the matrix center
    dy, dx = np.meshgrid(offsets, offsets, indexing="ij")
    d2 = dx * dx + dy * dy
    weights = np.exp(-d2 / (2.0 * sigma * sigma))
    weights[d2 > radius * radius] = 0.0
    weights /= weights.sum()
    weights.setflags(write=False)
    return Kernel(radius=int(radius), sigma=float(sigma), weights=weights)


def kernel_to_text(kernel: Kernel) -> str:
    """Render weights as a row-major plain-text grid, 12 significant digits."""
    return "\n".join(
        " ".join(f"{w:.12g}" for w in row) for row in kernel.weights
    )
