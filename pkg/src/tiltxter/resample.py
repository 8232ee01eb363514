"""Stage-1 rendering: bicubic reduction of the 10x10 sensor grid to 5x4.

The resampler uses the classic two-piece cubic kernel

    W(t) = (a+2)|t|^3 - (a+3)|t|^2 + 1          for |t| <= 1
    W(t) = a|t|^3 - 5a|t|^2 + 8a|t| - 4a        for 1 < |t| < 2
    W(t) = 0                                     otherwise

with a = -0.5 (the Catmull-Rom member, smooth with few artifacts) and
pixel-center alignment: output cell (i, j) samples source position

    y = (i + 0.5) * src_rows / out_rows - 0.5
    x = (j + 0.5) * src_cols / out_cols - 0.5

with clamp-to-edge replication outside the grid.  Pixel-center alignment
makes mirrored input produce mirrored output exactly, which downstream
symmetry checks rely on.  Bicubic interpolation can overshoot, so public
results are clamped back to the physical [0, 9] N force range.
"""

from __future__ import annotations

import numpy as np

from .core import (
    ELECTRODE_COLS,
    ELECTRODE_ROWS,
    FORCE_MAX_N,
    SENSOR_COLS,
    SENSOR_ROWS,
    BiFrame,
    DownsizedFrame,
)

#: Default sharpness coefficient (Catmull-Rom).
DEFAULT_A = -0.5


def kernel_weight(t: float, a: float = DEFAULT_A) -> float:
    """Cubic kernel weight at offset ``t``; requires a negative coefficient."""
    if a >= 0:
        raise ValueError("cubic kernel coefficient must be negative")
    at = abs(t)
    if at <= 1.0:
        return (a + 2.0) * at**3 - (a + 3.0) * at**2 + 1.0
    if at < 2.0:
        return a * at**3 - 5.0 * a * at**2 + 8.0 * a * at - 4.0 * a
    return 0.0


def _axis_weights(n_src: int, n_out: int, a: float) -> np.ndarray:
    """(n_out, n_src) matrix of cubic weights with clamp-to-edge folding.

    Row i holds the weights that produce output sample i as a dot product
    with the source axis; out-of-range taps are accumulated onto the
    nearest edge sample, so each row still sums to the kernel's unit mass.
    """
    w = np.zeros((n_out, n_src))
    for i in range(n_out):
        pos = (i + 0.5) * n_src / n_out - 0.5
        base = int(np.floor(pos))
        for k in range(base - 1, base + 3):
            src = min(max(k, 0), n_src - 1)
            w[i, src] += kernel_weight(pos - k, a)
    return w


class _Plan:
    """Precomputed separable weight matrices for one grid geometry."""

    def __init__(self, src_shape: tuple[int, int], out_shape: tuple[int, int], a: float):
        self.wy = _axis_weights(src_shape[0], out_shape[0], a)
        self.wx = _axis_weights(src_shape[1], out_shape[1], a)

    def apply(self, grid: np.ndarray) -> np.ndarray:
        return self.wy @ grid @ self.wx.T


_default_plan = _Plan((SENSOR_ROWS, SENSOR_COLS), (ELECTRODE_ROWS, ELECTRODE_COLS), DEFAULT_A)


def bicubic_downsize_raw(grid: np.ndarray, a: float = DEFAULT_A) -> np.ndarray:
    """Downsize a 10x10 grid to 5x4 without the final range clamp.

    Exposed so linearity can be observed before clamping; most callers
    want :func:`bicubic_downsize`.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.shape != (SENSOR_ROWS, SENSOR_COLS):
        raise ValueError(f"expected a {SENSOR_ROWS}x{SENSOR_COLS} grid, got {grid.shape}")
    plan = _default_plan if a == DEFAULT_A else _Plan(grid.shape, (ELECTRODE_ROWS, ELECTRODE_COLS), a)
    return plan.apply(grid)


def bicubic_downsize(grid: np.ndarray, a: float = DEFAULT_A) -> DownsizedFrame:
    """Bicubic 10x10 -> 5x4 reduction, clamped to the [0, 9] N force range."""
    out = np.clip(bicubic_downsize_raw(grid, a), 0.0, FORCE_MAX_N)
    return DownsizedFrame(out)


def downsize_pair(biframe: BiFrame) -> tuple[DownsizedFrame, DownsizedFrame]:
    """Downsize both finger grids independently: (left, right)."""
    return bicubic_downsize(biframe.left.forces), bicubic_downsize(biframe.right.forces)
