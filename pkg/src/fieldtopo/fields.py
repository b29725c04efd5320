"""Dense integer-level fields, quantization, and seeded synthetic field generators.

A field stores one intensity level per top cell (pixel in 2D, voxel in 3D).
Levels are integers in [0, max_level]; the value max_level + 1 is reserved as
the "never activates" sentinel used by the gather kernels for out-of-bounds
neighbors. Index order is fixed as (i=row/height, j=column/width, k=depth),
with k varying fastest in memory for 3D data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Wide enough to hold any supported level plus the sentinel max_level + 1.
LEVEL_DTYPE = np.int32


def quantize_with_range(raw, lo, hi, max_level):
    """Map samples onto 0..max_level given an explicit source range [lo, hi].

    Linear rescale with round-half-away-from-zero, clamped to the level range.
    A degenerate range (hi == lo) maps everything to level 0. Works on scalars
    and arrays alike; file-backed sources rely on this being pointwise.
    """
    if max_level < 1:
        raise ValueError("max_level must be >= 1")
    arr = np.asarray(raw, dtype=np.float64)
    if hi == lo:
        return np.zeros(arr.shape, dtype=LEVEL_DTYPE)
    scaled = (arr - lo) * float(max_level) / (hi - lo)
    return np.clip(np.floor(scaled + 0.5), 0, max_level).astype(LEVEL_DTYPE)


def quantize(raw, max_level):
    """Quantize raw samples onto integer levels 0..max_level.

    The source range is taken from the data itself (min and max). Constant
    input quantizes to all zeros. Raises ValueError on empty input.
    """
    arr = np.asarray(raw, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("empty field")
    return quantize_with_range(arr, arr.min(), arr.max(), max_level)


def _validate_levels(values, max_level, ndim):
    if max_level < 0:
        raise ValueError("max_level must be >= 0")
    arr = np.ascontiguousarray(values, dtype=LEVEL_DTYPE)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}D array, got ndim={arr.ndim}")
    if min(arr.shape) < 1:
        raise ValueError(f"all dimensions must be >= 1, got shape {arr.shape}")
    if arr.size and (arr.min() < 0 or arr.max() > max_level):
        raise ValueError(f"levels must lie in [0, {max_level}]")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Field2D:
    """2D grid of levels, shape (height, width). Immutable once built."""

    values: np.ndarray
    max_level: int

    def __post_init__(self):
        object.__setattr__(self, "values", _validate_levels(self.values, self.max_level, 2))

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]

    @property
    def cell_count(self):
        return self.values.size


@dataclass(frozen=True, eq=False)
class Field3D:
    """3D grid of levels, shape (height, width, depth), depth fastest."""

    values: np.ndarray
    max_level: int

    def __post_init__(self):
        object.__setattr__(self, "values", _validate_levels(self.values, self.max_level, 3))

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]

    @property
    def depth(self):
        return self.values.shape[2]

    @property
    def cell_count(self):
        return self.values.size


def random_field(dims, distribution="uniform", seed=0, max_level=255):
    """Generate a seeded random Field2D or Field3D.

    dims is (w, h) or (w, h, d). "uniform" draws integer levels equiprobably
    from 0..max_level; "normal" draws standard normal samples and quantizes
    them. Deterministic for a fixed seed regardless of how the result is
    later processed.
    """
    dims = tuple(int(n) for n in dims)
    if len(dims) not in (2, 3):
        raise ValueError("dims must be (w, h) or (w, h, d)")
    if min(dims) < 1:
        raise ValueError(f"dimensions must be >= 1, got {dims}")
    if max_level < 0:
        raise ValueError("max_level must be >= 0")
    if len(dims) == 2:
        shape = (dims[1], dims[0])
    else:
        shape = (dims[1], dims[0], dims[2])
    rng = np.random.default_rng(seed)
    if distribution == "uniform":
        values = rng.integers(0, max_level + 1, size=shape, dtype=LEVEL_DTYPE)
    elif distribution == "normal":
        if max_level == 0:
            values = np.zeros(shape, dtype=LEVEL_DTYPE)
        else:
            values = quantize(rng.standard_normal(shape), max_level)
    else:
        raise ValueError(f"unknown distribution {distribution!r}")
    cls = Field2D if len(dims) == 2 else Field3D
    return cls(values, max_level)
