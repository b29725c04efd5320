"""Descriptor curves from contribution maps.

A contribution map fixes, for every filtration level, how many vertex
neighborhoods sit in each configuration type. Dotting those counts with a
per-type weight table yields a descriptor curve: Euler characteristic,
perimeter, area, surface area, or volume, or anything a custom table
encodes. All weights are exact multiples of 1/8, so the whole pipeline runs
in integer arithmetic (numerators over 8) and converts to decimal only at
output. Connectivity choices (4C/8C in 2D, 26C in 3D) only change weights,
never the map itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .contrib2d import TYPE_NAMES_2D
from .contrib3d import TYPE_NAMES_3D

QUANTUM = 8  # weights and curve values are integer numerators over this


@dataclass(frozen=True)
class WeightTable:
    """Per-type weights (numerators over 8) for one descriptor."""

    descriptor: str
    dimension: int
    connectivity: str
    eighths: tuple

    def __post_init__(self):
        names = TYPE_NAMES_2D if self.dimension == 2 else TYPE_NAMES_3D
        if len(self.eighths) != len(names):
            raise ValueError(
                f"{self.dimension}D table needs {len(names)} weights, got {len(self.eighths)}"
            )

    @property
    def type_names(self):
        return TYPE_NAMES_2D if self.dimension == 2 else TYPE_NAMES_3D

    def weight_of(self, type_name):
        return self.eighths[self.type_names.index(type_name)] / QUANTUM


@dataclass(frozen=True)
class DescriptorCurve:
    """Descriptor value at every level 0..max_level, stored as eighths."""

    descriptor: str
    connectivity: str
    max_level: int
    numerators: np.ndarray  # int64, value * 8 per level

    @property
    def values(self):
        return self.numerators / QUANTUM

    def value_at(self, level):
        return self.numerators[level] / QUANTUM

    def decimals(self):
        return [format_eighths(n) for n in self.numerators]


def format_eighths(numerator):
    """Exact decimal string of numerator/8 with no trailing zeros."""
    n = int(numerator)
    sign = "-" if n < 0 else ""
    whole, frac = divmod(abs(n), QUANTUM)
    if frac == 0:
        return f"{sign}{whole}"
    digits = f"{frac * 125:03d}".rstrip("0")
    return f"{sign}{whole}.{digits}"


# Type order: q1, q2, qd, q3, q4.
_BUILTIN_2D = {
    ("ec", "8C"): (2, 0, -4, -2, 0),
    ("ec", "4C"): (2, 0, 4, -2, 0),
    ("perimeter", None): (8, 8, 16, 8, 0),
    ("area", None): (2, 4, 4, 6, 8),
}

# Type order: q10, q20, q21, q22, q30, q31, q32, q40..q45, q50..q52,
# q60..q62, q70, q80.
_BUILTIN_3D = {
    ("ec", "26C"): (1, 0, -2, -6, -1, -3, -1, 0, -2, -2, 0, 0, 4, -1, 1, 3, 0, 2, 2, 1, 0),
    ("perimeter", None): (12, 8, 24, 24, 12, 20, 36, 0, 24, 16, 24, 16, 48, 12, 20, 36, 8, 24, 24, 12, 0),
    ("surface-area", None): (6, 8, 12, 12, 10, 14, 18, 8, 12, 12, 16, 16, 24, 10, 14, 18, 8, 12, 12, 6, 0),
    ("volume", None): (1, 2, 2, 2, 3, 3, 3, 4, 4, 4, 4, 4, 4, 5, 5, 5, 6, 6, 6, 7, 8),
}


def normalize_connectivity(connectivity):
    c = str(connectivity).upper().replace("-", "")
    if not c.endswith("C"):
        c += "C"
    if c not in ("4C", "8C", "26C"):
        raise ValueError(f"unknown connectivity {connectivity!r}")
    return c


def builtin_weights(descriptor, connectivity):
    """Built-in weight table for (descriptor, connectivity).

    Dimensionality follows the connectivity: 4C/8C are 2D, 26C is 3D. In 3D
    "area" means surface area; "volume" does not exist in 2D. Perimeter and
    area weights do not depend on connectivity.
    """
    conn = normalize_connectivity(connectivity)
    dim = 2 if conn in ("4C", "8C") else 3
    name = descriptor.lower().replace("_", "-")
    if dim == 3 and name == "area":
        name = "surface-area"
    table = _BUILTIN_2D if dim == 2 else _BUILTIN_3D
    for (desc, c), eighths in table.items():
        if desc == name and c in (None, conn):
            return WeightTable(name, dim, conn, eighths)
    raise ValueError(f"no built-in {descriptor!r} weights for {conn} ({dim}D)")


def load_weight_table(source_json):
    """Weight table from JSON: {"dimension", "connectivity", "weights"}.

    `weights` maps type names to integer numerators over 8; omitted types
    weigh 0 and unknown names are rejected. Accepts a path or a dict.
    """
    if isinstance(source_json, (str, Path)):
        data = json.loads(Path(source_json).read_text())
        name = Path(source_json).stem
    else:
        data = source_json
        name = data.get("descriptor", "custom")
    dim = int(data["dimension"])
    if dim not in (2, 3):
        raise ValueError(f"dimension must be 2 or 3, got {dim}")
    conn = normalize_connectivity(data["connectivity"])
    names = TYPE_NAMES_2D if dim == 2 else TYPE_NAMES_3D
    weights = dict(data["weights"])
    unknown = set(weights) - set(names)
    if unknown:
        raise ValueError(f"unknown contribution types in weight table: {sorted(unknown)}")
    eighths = tuple(int(weights.get(n, 0)) for n in names)
    return WeightTable(name, dim, conn, eighths)


def counts_at_levels(cmap):
    """Cumulative per-type neighborhood counts at levels 0..max_level.

    count[t, c] = births of type t through level c minus deaths through c;
    the sentinel slot never enters. Single prefix-sum pass per type.
    """
    births = np.cumsum(cmap.q_in.astype(np.int64), axis=1)
    deaths = np.cumsum(cmap.q_out.astype(np.int64), axis=1)
    return (births - deaths)[:, : cmap.max_level + 1]


def back_calc_empty(cmap):
    """Per-level count of all-inactive neighborhoods, from the vertex total."""
    return cmap.total_vertices - counts_at_levels(cmap).sum(axis=0)


def descriptor_curve(cmap, weights):
    """Dot per-level type counts with a weight table; exact fixed point."""
    if weights.dimension != cmap.ndim:
        raise ValueError(
            f"{weights.dimension}D weight table applied to a {cmap.ndim}D map"
        )
    eighths = np.asarray(weights.eighths, dtype=np.int64)
    numerators = eighths @ counts_at_levels(cmap)
    return DescriptorCurve(weights.descriptor, weights.connectivity,
                           cmap.max_level, numerators)
