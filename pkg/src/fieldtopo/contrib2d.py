"""2D vertex-contribution gathering.

Every lattice vertex of a field is surrounded by up to four faces. Sorting
the four face levels (absent faces carry the sentinel max_level + 1) walks
the neighborhood through its activation states as the filtration level rises;
each state transition books one birth and one death into per-type level
histograms. Five states are stored, keyed by active-face count plus the
diagonal variant:

    q1  one face            q3  three faces
    q2  two faces sharing an edge
    qd  two faces touching only diagonally
    q4  all four faces

The empty state books nothing and is recoverable from the vertex total.
Histograms have max_level + 2 slots; the last slot catches events at the
sentinel and is excluded from every curve.

gather_2d_serial / gather_2d_parallel run a fused kernel: one pass over an
in-memory padded array, or a two-row sliding window streamed from a
file-backed source. Results are bit-identical across worker counts and
between the two source modes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ._parallel import run_blocks, split_blocks
from .fields import LEVEL_DTYPE
from .sources import as_source

TYPE_NAMES_2D = ("q1", "q2", "qd", "q3", "q4")
Q1, Q2, QD, Q3, Q4 = range(5)

# Lattice coordinates (row, col) of the slots [NW, NE, SW, SE].
SLOT_COORDS_2D = ((0, 0), (0, 1), (1, 0), (1, 1))

_ONE = np.uint64(1)


@dataclass(eq=False)
class ContributionMap2D:
    """Birth/death histograms per contribution type for one 2D field."""

    width: int
    height: int
    max_level: int
    q_in: np.ndarray   # (5, max_level + 2) uint64 birth counts
    q_out: np.ndarray  # same shape, death counts

    @classmethod
    def zeros(cls, width, height, max_level):
        shape = (len(TYPE_NAMES_2D), max_level + 2)
        return cls(width, height, max_level,
                   np.zeros(shape, np.uint64), np.zeros(shape, np.uint64))

    @property
    def ndim(self):
        return 2

    @property
    def total_vertices(self):
        return (self.width + 1) * (self.height + 1)

    @property
    def cell_count(self):
        return self.width * self.height

    @property
    def type_names(self):
        return TYPE_NAMES_2D

    def __eq__(self, other):
        return (
            isinstance(other, ContributionMap2D)
            and (self.width, self.height, self.max_level)
            == (other.width, other.height, other.max_level)
            and np.array_equal(self.q_in, other.q_in)
            and np.array_equal(self.q_out, other.q_out)
        )

    def to_dict(self):
        return {
            "dimension": 2,
            "dims": {"w": self.width, "h": self.height},
            "max_level": self.max_level,
            "types": {
                name: {"in": self.q_in[t].tolist(), "out": self.q_out[t].tolist()}
                for t, name in enumerate(TYPE_NAMES_2D)
            },
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("dimension") != 2:
            raise ValueError("not a 2D contribution map")
        m = cls.zeros(int(d["dims"]["w"]), int(d["dims"]["h"]), int(d["max_level"]))
        for t, name in enumerate(TYPE_NAMES_2D):
            m.q_in[t] = np.asarray(d["types"][name]["in"], np.uint64)
            m.q_out[t] = np.asarray(d["types"][name]["out"], np.uint64)
        return m


@dataclass(frozen=True)
class VertexNeighborhood2D:
    """Levels of the four faces around one vertex, ordered [NW, NE, SW, SE]."""

    data: tuple

    slot_coords = SLOT_COORDS_2D


def neighborhood_data_2d(source, i, j):
    """Face levels around vertex (i, j); absent faces get the sentinel.

    Valid vertex indices are 0 <= i <= height and 0 <= j <= width. The four
    bounds checks are independent, so edge and corner vertices keep every
    face that exists.
    """
    src = as_source(source)
    h, w = src.height, src.width
    sentinel = src.max_level + 1
    nw = src.sample_at(i - 1, j - 1) if i > 0 and j > 0 else sentinel
    ne = src.sample_at(i - 1, j) if i > 0 and j < w else sentinel
    sw = src.sample_at(i, j - 1) if i < h and j > 0 else sentinel
    se = src.sample_at(i, j) if i < h and j < w else sentinel
    return VertexNeighborhood2D((nw, ne, sw, se))


def diagonal_check(pos0, pos1):
    """True when two distinct 2x2 lattice slots touch only at the center."""
    return pos0[0] != pos1[0] and pos0[1] != pos1[1]


def accumulate_vertex_2d(nbhd, cmap):
    """Book one vertex neighborhood into a contribution map.

    The four levels are sorted (stable on slot order); consecutive sorted
    values delimit the life of each activation state. Ties produce states
    that are born and die at the same level and therefore never show up in
    any curve.
    """
    data = nbhd.data
    order = sorted(range(4), key=lambda s: data[s])
    v0, v1, v2, v3 = (data[s] for s in order)
    cmap.q_in[Q1, v0] += 1
    cmap.q_out[Q1, v1] += 1
    two = QD if diagonal_check(SLOT_COORDS_2D[order[0]], SLOT_COORDS_2D[order[1]]) else Q2
    cmap.q_in[two, v1] += 1
    cmap.q_out[two, v2] += 1
    cmap.q_in[Q3, v2] += 1
    cmap.q_out[Q3, v3] += 1
    cmap.q_in[Q4, v3] += 1
    return cmap


@njit(cache=True, nogil=True)
def _scan_rows_2d(padded, i0, i1, q_in, q_out):
    # padded row r = field row r - 1; vertex (i, j) reads rows i, i+1 and
    # cols j, j+1. Works on the full padded field or on a 2-row window.
    ncols = padded.shape[1] - 1
    for i in range(i0, i1):
        top = padded[i]
        bot = padded[i + 1]
        for j in range(ncols):
            a = top[j]
            b = top[j + 1]
            c = bot[j]
            d = bot[j + 1]
            # First slot holding the minimum, then the next in stable order.
            p0 = 0
            v0 = a
            if b < v0:
                v0 = b
                p0 = 1
            if c < v0:
                v0 = c
                p0 = 2
            if d < v0:
                v0 = d
                p0 = 3
            p1 = -1
            v1 = np.int64(1 << 60)
            if p0 != 0 and a < v1:
                v1 = a
                p1 = 0
            if p0 != 1 and b < v1:
                v1 = b
                p1 = 1
            if p0 != 2 and c < v1:
                v1 = c
                p1 = 2
            if p0 != 3 and d < v1:
                v1 = d
                p1 = 3
            # Remaining two values, ordered.
            v2 = np.int64(0)
            v3 = np.int64(0)
            first = True
            for s in range(4):
                if s == p0 or s == p1:
                    continue
                if s == 0:
                    val = a
                elif s == 1:
                    val = b
                elif s == 2:
                    val = c
                else:
                    val = d
                if first:
                    v2 = np.int64(val)
                    first = False
                else:
                    v3 = np.int64(val)
            if v3 < v2:
                v2, v3 = v3, v2
            q_in[0, v0] += _ONE
            q_out[0, v1] += _ONE
            if p0 + p1 == 3:  # NW+SE or NE+SW: diagonal pair
                q_in[2, v1] += _ONE
                q_out[2, v2] += _ONE
            else:
                q_in[1, v1] += _ONE
                q_out[1, v2] += _ONE
            q_in[3, v2] += _ONE
            q_out[3, v3] += _ONE
            q_in[4, v3] += _ONE


def _stream_rows_2d(src, i0, i1, q_in, q_out):
    # Two-row sliding window; each file row is read once per worker.
    h, w = src.height, src.width
    sentinel = src.max_level + 1
    window = np.full((2, w + 2), sentinel, LEVEL_DTYPE)
    src.note_resident(window.nbytes + src.row_nbytes)
    for i in range(i0, i1):
        if i == i0:
            if i > 0:
                window[0, 1:w + 1] = src.read_row(i - 1)
        else:
            window[0] = window[1]
        if i < h:
            window[1, 1:w + 1] = src.read_row(i)
        else:
            window[1, :] = sentinel
        _scan_rows_2d(window, 0, 1, q_in, q_out)


def _gather_span_2d(src, i0, i1):
    q_in = np.zeros((len(TYPE_NAMES_2D), src.max_level + 2), np.uint64)
    q_out = np.zeros_like(q_in)
    if src.mode == "in-memory":
        _scan_rows_2d(src.padded_levels(), i0, i1, q_in, q_out)
    else:
        _stream_rows_2d(src, i0, i1, q_in, q_out)
    return q_in, q_out


def gather_2d_serial(source):
    """Contribution map of a 2D field, one pass over all (h+1)(w+1) vertices."""
    src = as_source(source)
    cmap = ContributionMap2D.zeros(src.width, src.height, src.max_level)
    q_in, q_out = _gather_span_2d(src, 0, src.height + 1)
    cmap.q_in += q_in
    cmap.q_out += q_out
    return cmap


def gather_2d_parallel(source, workers):
    """Same result as gather_2d_serial, gathered on `workers` threads.

    Vertex rows are split into contiguous blocks, each worker fills a private
    histogram set, and the pieces are summed after the join, so the output is
    bit-identical for every worker count. File-backed sources get one
    independent handle per worker.
    """
    src = as_source(source)
    blocks = split_blocks(src.height + 1, workers)
    srcs = [src] + [src.for_worker() for _ in blocks[1:]]
    try:
        parts = run_blocks(_gather_span_2d, srcs, blocks)
    finally:
        for s in srcs[1:]:
            s.close()
    cmap = ContributionMap2D.zeros(src.width, src.height, src.max_level)
    for q_in, q_out in parts:
        cmap.q_in += q_in
        cmap.q_out += q_out
    return cmap
