"""Brute-force reference implementations of the descriptor curves.

Everything here binarizes the field at one level and counts simplexes
directly on the induced complex. Deliberately simple and O(cells) per level;
the test suite uses these as ground truth for the contribution kernels, which
share no code with this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BinaryComplex:
    """Active top cells of a binarized field; lower cells are induced."""

    active: np.ndarray  # bool, shape (h, w) or (h, w, d)

    @property
    def ndim(self):
        return self.active.ndim


def binarize(field, level):
    """Sublevel cut: a top cell is active iff its value is <= level."""
    if level < 0 or level > field.max_level:
        raise ValueError(f"level {level} outside [0, {field.max_level}]")
    return BinaryComplex(field.values <= level)


def _padded(active):
    shape = tuple(n + 2 for n in active.shape)
    p = np.zeros(shape, dtype=bool)
    p[(slice(1, -1),) * active.ndim] = active
    return p


def euler_bruteforce(cpx, connectivity="8C"):
    """Alternating simplex count of the induced complex.

    2D: V - E + F with 8C (vertex adjacency) or 4C (edge adjacency). Under 4C
    a lattice vertex where two active faces meet only diagonally glues
    nothing, so it is counted once per face cluster (twice for a diagonal
    pair). 3D: V - E + F - C, 26C only.
    """
    a = cpx.active
    if a.ndim == 2:
        if connectivity not in ("8C", "4C"):
            raise ValueError(f"2D connectivity must be 8C or 4C, got {connectivity}")
        p = _padded(a)
        nw, ne = p[:-1, :-1], p[:-1, 1:]
        sw, se = p[1:, :-1], p[1:, 1:]
        verts = int((nw | ne | sw | se).sum())
        if connectivity == "4C":
            diag = (nw & se & ~ne & ~sw) | (ne & sw & ~nw & ~se)
            verts += int(diag.sum())
        h_edges = int((p[:-1, 1:-1] | p[1:, 1:-1]).sum())
        v_edges = int((p[1:-1, :-1] | p[1:-1, 1:]).sum())
        return verts - (h_edges + v_edges) + int(a.sum())
    if connectivity != "26C":
        raise ValueError(f"3D connectivity must be 26C, got {connectivity}")
    p = _padded(a)
    verts = int(
        (
            p[:-1, :-1, :-1] | p[:-1, :-1, 1:] | p[:-1, 1:, :-1] | p[:-1, 1:, 1:]
            | p[1:, :-1, :-1] | p[1:, :-1, 1:] | p[1:, 1:, :-1] | p[1:, 1:, 1:]
        ).sum()
    )
    edges = 0
    edges += int((p[1:-1, :-1, :-1] | p[1:-1, :-1, 1:] | p[1:-1, 1:, :-1] | p[1:-1, 1:, 1:]).sum())
    edges += int((p[:-1, 1:-1, :-1] | p[:-1, 1:-1, 1:] | p[1:, 1:-1, :-1] | p[1:, 1:-1, 1:]).sum())
    edges += int((p[:-1, :-1, 1:-1] | p[:-1, 1:, 1:-1] | p[1:, :-1, 1:-1] | p[1:, 1:, 1:-1]).sum())
    faces = 0
    faces += int((p[1:-1, 1:-1, :-1] | p[1:-1, 1:-1, 1:]).sum())  # normal to k
    faces += int((p[1:-1, :-1, 1:-1] | p[1:-1, 1:, 1:-1]).sum())  # normal to j
    faces += int((p[:-1, 1:-1, 1:-1] | p[1:, 1:-1, 1:-1]).sum())  # normal to i
    return verts - edges + faces - int(a.sum())


def area_oracle_2d(cpx):
    """Active face count."""
    return int(cpx.active.sum())


def perimeter_oracle_2d(cpx):
    """Count of lattice edges incident to exactly one active face."""
    p = _padded(cpx.active).astype(np.int8)
    h = ((p[:-1, 1:-1] + p[1:, 1:-1]) == 1).sum()
    v = ((p[1:-1, :-1] + p[1:-1, 1:]) == 1).sum()
    return int(h + v)


def volume_oracle_3d(cpx):
    """Active voxel count."""
    return int(cpx.active.sum())


def surface_area_oracle_3d(cpx):
    """Count of grid faces incident to exactly one active voxel."""
    p = _padded(cpx.active).astype(np.int8)
    total = ((p[1:-1, 1:-1, :-1] + p[1:-1, 1:-1, 1:]) == 1).sum()
    total += ((p[1:-1, :-1, 1:-1] + p[1:-1, 1:, 1:-1]) == 1).sum()
    total += ((p[:-1, 1:-1, 1:-1] + p[1:, 1:-1, 1:-1]) == 1).sum()
    return int(total)


def sharp_edge_perimeter_oracle_3d(cpx):
    """Total length of creased (sharp) grid edges on the active-voxel boundary.

    Each grid edge sees at most 4 incident voxels arranged in a 2x2 square
    perpendicular to it. The edge is sharp once when exactly 1 or exactly 3
    of them are active, and twice when exactly 2 are active in a diagonal
    pattern (two creases meet there). Flat and interior edges add nothing.
    """
    p = _padded(cpx.active)
    total = 0
    for axis in range(3):
        sl = [slice(None)] * 3
        sl[axis] = slice(1, -1)

        def quadrant(b, c, off_b, off_c, sl=sl, axis=axis):
            q = list(sl)
            q[b] = slice(None, -1) if off_b == 0 else slice(1, None)
            q[c] = slice(None, -1) if off_c == 0 else slice(1, None)
            return p[tuple(q)]

        b, c = [ax for ax in range(3) if ax != axis]
        q00 = quadrant(b, c, 0, 0)
        q01 = quadrant(b, c, 0, 1)
        q10 = quadrant(b, c, 1, 0)
        q11 = quadrant(b, c, 1, 1)
        n = q00.astype(np.int8) + q01 + q10 + q11
        diag = (q00 & q11 & ~q01 & ~q10) | (q01 & q10 & ~q00 & ~q11)
        total += int(((n == 1) | (n == 3)).sum()) + 2 * int(diag.sum())
    return total


_ORACLES_2D = {
    "ec": euler_bruteforce,
    "perimeter": lambda cpx: perimeter_oracle_2d(cpx),
    "area": lambda cpx: area_oracle_2d(cpx),
}

_ORACLES_3D = {
    "ec": euler_bruteforce,
    "perimeter": lambda cpx: sharp_edge_perimeter_oracle_3d(cpx),
    "area": lambda cpx: surface_area_oracle_3d(cpx),
    "surface-area": lambda cpx: surface_area_oracle_3d(cpx),
    "volume": lambda cpx: volume_oracle_3d(cpx),
}


def curve_bruteforce(field, descriptor, connectivity=None):
    """Descriptor value at every level 0..max_level, one binarization each.

    Ground truth for the contribution-map pipeline; returns an int64 array.
    """
    ndim = field.values.ndim
    table = _ORACLES_2D if ndim == 2 else _ORACLES_3D
    if descriptor not in table:
        raise ValueError(f"no {ndim}D oracle for descriptor {descriptor!r}")
    if connectivity is None:
        connectivity = "8C" if ndim == 2 else "26C"
    out = np.zeros(field.max_level + 1, dtype=np.int64)
    for c in range(field.max_level + 1):
        cpx = binarize(field, c)
        if descriptor == "ec":
            out[c] = euler_bruteforce(cpx, connectivity)
        else:
            out[c] = table[descriptor](cpx)
    return out
