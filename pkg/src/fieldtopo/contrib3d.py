"""3D vertex-contribution gathering.

A lattice vertex of a volume touches up to eight cells arranged as a 2x2x2
block. Sorting the eight levels walks the neighborhood through activation
stages 1..8; each stage is classified into one of 21 stored configuration
types and booked as a birth/death pair in per-type level histograms. Type
codes are q<n><variant> where n is the active-cell count:

    q10                       one cell
    q20 q21 q22               two cells: face- / edge- / vertex-adjacent
    q30 q31 q32               three cells, by pair-adjacency profile
    q40 .. q45                four cells, six shapes
    q50 q51 q52               five cells, classified by the 3 empty cells
    q60 q61 q62               six cells, classified by the 2 empty cells
    q70 q80                   seven / eight cells

Classification uses exact pair-class counts: within the 2x2x2 block two
cells are face-, edge-, or vertex-adjacent when their coordinates differ in
1, 2, or 3 axes. The triple (n_face, n_edge, n_vertex) over all active-cell
pairs (empty-cell pairs for stages >= 5) separates every reachable shape, so
the hot path never compares floating-point adjacency sums.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ._parallel import run_blocks, split_blocks
from .fields import LEVEL_DTYPE
from .sources import as_source

TYPE_NAMES_3D = (
    "q10",
    "q20", "q21", "q22",
    "q30", "q31", "q32",
    "q40", "q41", "q42", "q43", "q44", "q45",
    "q50", "q51", "q52",
    "q60", "q61", "q62",
    "q70",
    "q80",
)
_TYPE_INDEX = {name: t for t, name in enumerate(TYPE_NAMES_3D)}

# Slot s holds the cell at offset (s & 1, s >> 1 & 1, s >> 2 & 1) from the
# (i-1, j-1, k-1) corner of the vertex neighborhood.
SLOT_COORDS_3D = tuple((s & 1, (s >> 1) & 1, (s >> 2) & 1) for s in range(8))

_ONE = np.uint64(1)


class ClassificationError(RuntimeError):
    """A neighborhood produced a pair-class profile outside the known table."""


@dataclass(frozen=True)
class PairClassCounts:
    """Pairs at squared lattice distance 1 / 2 / 3 within a 2x2x2 block."""

    n_face: int
    n_edge: int
    n_vertex: int


@dataclass(frozen=True)
class VertexNeighborhood3D:
    """Levels of the eight cells around one vertex, in slot order."""

    data: tuple

    slot_coords = SLOT_COORDS_3D


def pair_classes(slots):
    """Pair-class counts for a set of neighborhood slot indices."""
    slots = list(slots)
    nf = ne = nv = 0
    for a in range(len(slots)):
        for b in range(a + 1, len(slots)):
            x = slots[a] ^ slots[b]
            d2 = (x & 1) + ((x >> 1) & 1) + ((x >> 2) & 1)
            if d2 == 1:
                nf += 1
            elif d2 == 2:
                ne += 1
            else:
                nv += 1
    return PairClassCounts(nf, ne, nv)


_PAIR_TABLE = {(1, 0, 0): 0, (0, 1, 0): 1, (0, 0, 1): 2}
_TRIPLE_TABLE = {(2, 1, 0): 0, (1, 1, 1): 1, (0, 3, 0): 2}
_QUAD_TABLE = {
    (4, 2, 0): 0, (3, 3, 0): 1, (3, 2, 1): 2,
    (2, 3, 1): 3, (2, 2, 2): 4, (0, 6, 0): 5,
}


def classify_config(n, classes):
    """Type index for a configuration of n active cells.

    For n <= 4 `classes` describes the active cells; for n >= 5 it must
    describe the empty cells (there are at most three of those, which keeps
    the profile small). A profile outside the table means the caller fed an
    impossible neighborhood and raises ClassificationError.
    """
    key = (classes.n_face, classes.n_edge, classes.n_vertex)
    try:
        if n == 1:
            if key != (0, 0, 0):
                raise KeyError
            return _TYPE_INDEX["q10"]
        if n == 2:
            return _TYPE_INDEX["q20"] + _PAIR_TABLE[key]
        if n == 3:
            return _TYPE_INDEX["q30"] + _TRIPLE_TABLE[key]
        if n == 4:
            return _TYPE_INDEX["q40"] + _QUAD_TABLE[key]
        if n == 5:
            return _TYPE_INDEX["q50"] + _TRIPLE_TABLE[key]
        if n == 6:
            return _TYPE_INDEX["q60"] + _PAIR_TABLE[key]
        if n == 7:
            if key != (0, 0, 0):
                raise KeyError
            return _TYPE_INDEX["q70"]
        if n == 8:
            if key != (0, 0, 0):
                raise KeyError
            return _TYPE_INDEX["q80"]
    except KeyError:
        pass
    raise ClassificationError(f"no configuration type for n={n}, classes={key}")


@dataclass(eq=False)
class ContributionMap3D:
    """Birth/death histograms per contribution type for one volume."""

    width: int
    height: int
    depth: int
    max_level: int
    q_in: np.ndarray   # (21, max_level + 2) uint64
    q_out: np.ndarray

    @classmethod
    def zeros(cls, width, height, depth, max_level):
        shape = (len(TYPE_NAMES_3D), max_level + 2)
        return cls(width, height, depth, max_level,
                   np.zeros(shape, np.uint64), np.zeros(shape, np.uint64))

    @property
    def ndim(self):
        return 3

    @property
    def total_vertices(self):
        return (self.width + 1) * (self.height + 1) * (self.depth + 1)

    @property
    def cell_count(self):
        return self.width * self.height * self.depth

    @property
    def type_names(self):
        return TYPE_NAMES_3D

    def __eq__(self, other):
        return (
            isinstance(other, ContributionMap3D)
            and (self.width, self.height, self.depth, self.max_level)
            == (other.width, other.height, other.depth, other.max_level)
            and np.array_equal(self.q_in, other.q_in)
            and np.array_equal(self.q_out, other.q_out)
        )

    def to_dict(self):
        return {
            "dimension": 3,
            "dims": {"w": self.width, "h": self.height, "d": self.depth},
            "max_level": self.max_level,
            "types": {
                name: {"in": self.q_in[t].tolist(), "out": self.q_out[t].tolist()}
                for t, name in enumerate(TYPE_NAMES_3D)
            },
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("dimension") != 3:
            raise ValueError("not a 3D contribution map")
        m = cls.zeros(int(d["dims"]["w"]), int(d["dims"]["h"]), int(d["dims"]["d"]),
                      int(d["max_level"]))
        for t, name in enumerate(TYPE_NAMES_3D):
            m.q_in[t] = np.asarray(d["types"][name]["in"], np.uint64)
            m.q_out[t] = np.asarray(d["types"][name]["out"], np.uint64)
        return m


def fill_data_3d(source, i, j, k):
    """Cell levels around vertex (i, j, k); absent cells get the sentinel.

    Valid vertex indices run to each dimension inclusive. The eight bounds
    checks are independent.
    """
    src = as_source(source)
    h, w, d = src.height, src.width, src.depth
    sentinel = src.max_level + 1
    data = [sentinel] * 8
    for s, (ci, cj, ck) in enumerate(SLOT_COORDS_3D):
        fi, fj, fk = i - 1 + ci, j - 1 + cj, k - 1 + ck
        if 0 <= fi < h and 0 <= fj < w and 0 <= fk < d:
            data[s] = src.sample_at(fi, fj, fk)
    return VertexNeighborhood3D(tuple(data))


def accumulate_vertex_3d(nbhd, cmap):
    """Book one 3D vertex neighborhood into a contribution map.

    Stage n covers the n smallest sorted levels (stable on slot order): it is
    born at sorted value n-1 and dies at sorted value n; stage 8 never dies
    below the sentinel. Stages 5..7 are classified by their empty cells.
    """
    data = nbhd.data
    order = sorted(range(8), key=lambda s: data[s])
    for n in range(1, 9):
        if n <= 4:
            classes = pair_classes(order[:n])
        else:
            classes = pair_classes(order[n:])
        t = classify_config(n, classes)
        cmap.q_in[t, data[order[n - 1]]] += 1
        if n < 8:
            cmap.q_out[t, data[order[n]]] += 1
    return cmap


@njit(inline="always")
def _accum_vertex_3d(vals, order, q_in, q_out):
    # Stable insertion argsort of the eight slot values.
    for s in range(8):
        order[s] = s
    for s in range(1, 8):
        o = order[s]
        v = vals[o]
        t = s - 1
        while t >= 0 and vals[order[t]] > v:
            order[t + 1] = order[t]
            t -= 1
        order[t + 1] = o

    q_in[0, vals[order[0]]] += _ONE
    q_out[0, vals[order[1]]] += _ONE

    # Stages 2..4: grow the active pair classes incrementally.
    nf = 0
    ne = 0
    nv = 0
    for n in range(2, 5):
        s_new = order[n - 1]
        for m in range(n - 1):
            x = s_new ^ order[m]
            d2 = (x & 1) + ((x >> 1) & 1) + ((x >> 2) & 1)
            if d2 == 1:
                nf += 1
            elif d2 == 2:
                ne += 1
            else:
                nv += 1
        if n == 2:
            if nf == 1:
                ti = 1
            elif ne == 1:
                ti = 2
            else:
                ti = 3
        elif n == 3:
            if nf == 2 and ne == 1 and nv == 0:
                ti = 4
            elif nf == 1 and ne == 1 and nv == 1:
                ti = 5
            elif nf == 0 and ne == 3 and nv == 0:
                ti = 6
            else:
                ti = -1
        else:
            if nf == 4 and ne == 2 and nv == 0:
                ti = 7
            elif nf == 3 and ne == 3 and nv == 0:
                ti = 8
            elif nf == 3 and ne == 2 and nv == 1:
                ti = 9
            elif nf == 2 and ne == 3 and nv == 1:
                ti = 10
            elif nf == 2 and ne == 2 and nv == 2:
                ti = 11
            elif nf == 0 and ne == 6 and nv == 0:
                ti = 12
            else:
                ti = -1
        if ti < 0:
            raise ValueError("3D neighborhood outside the configuration table")
        q_in[ti, vals[order[n - 1]]] += _ONE
        q_out[ti, vals[order[n]]] += _ONE

    # Stage 5: classify the three largest (still-empty) slots.
    ef = 0
    ee = 0
    ev = 0
    for a in range(5, 8):
        for b in range(a + 1, 8):
            x = order[a] ^ order[b]
            d2 = (x & 1) + ((x >> 1) & 1) + ((x >> 2) & 1)
            if d2 == 1:
                ef += 1
            elif d2 == 2:
                ee += 1
            else:
                ev += 1
    if ef == 2 and ee == 1 and ev == 0:
        t5 = 13
    elif ef == 1 and ee == 1 and ev == 1:
        t5 = 14
    elif ef == 0 and ee == 3 and ev == 0:
        t5 = 15
    else:
        raise ValueError("3D neighborhood outside the configuration table")
    q_in[t5, vals[order[4]]] += _ONE
    q_out[t5, vals[order[5]]] += _ONE

    # Stage 6: classify the two empty slots.
    x = order[6] ^ order[7]
    d2 = (x & 1) + ((x >> 1) & 1) + ((x >> 2) & 1)
    if d2 == 1:
        t6 = 16
    elif d2 == 2:
        t6 = 17
    else:
        t6 = 18
    q_in[t6, vals[order[5]]] += _ONE
    q_out[t6, vals[order[6]]] += _ONE

    q_in[19, vals[order[6]]] += _ONE
    q_out[19, vals[order[7]]] += _ONE
    q_in[20, vals[order[7]]] += _ONE


@njit(cache=True, nogil=True)
def _scan_slabs_3d(padded, i0, i1, q_in, q_out):
    # padded slab r = field slab r - 1; vertex (i, j, k) reads the 2x2x2
    # block at [i:i+2, j:j+2, k:k+2]. Slot order matches SLOT_COORDS_3D.
    nj = padded.shape[1] - 1
    nk = padded.shape[2] - 1
    vals = np.empty(8, np.int64)
    order = np.empty(8, np.int64)
    for i in range(i0, i1):
        for j in range(nj):
            for k in range(nk):
                vals[0] = padded[i, j, k]
                vals[1] = padded[i + 1, j, k]
                vals[2] = padded[i, j + 1, k]
                vals[3] = padded[i + 1, j + 1, k]
                vals[4] = padded[i, j, k + 1]
                vals[5] = padded[i + 1, j, k + 1]
                vals[6] = padded[i, j + 1, k + 1]
                vals[7] = padded[i + 1, j + 1, k + 1]
                _accum_vertex_3d(vals, order, q_in, q_out)


@njit(cache=True, nogil=True)
def _scan_pencil_pair_3d(window, q_in, q_out):
    # window[a, b, :] holds the k-pencil of slab side a, column side b,
    # padded with sentinels at both depth ends.
    nk = window.shape[2] - 1
    vals = np.empty(8, np.int64)
    order = np.empty(8, np.int64)
    for k in range(nk):
        vals[0] = window[0, 0, k]
        vals[1] = window[1, 0, k]
        vals[2] = window[0, 1, k]
        vals[3] = window[1, 1, k]
        vals[4] = window[0, 0, k + 1]
        vals[5] = window[1, 0, k + 1]
        vals[6] = window[0, 1, k + 1]
        vals[7] = window[1, 1, k + 1]
        _accum_vertex_3d(vals, order, q_in, q_out)


def _stream_slabs_3d(src, i0, i1, q_in, q_out):
    # Four-pencil sliding window: two slab sides x two column sides.
    h, w, d = src.height, src.width, src.depth
    sentinel = src.max_level + 1
    window = np.full((2, 2, d + 2), sentinel, LEVEL_DTYPE)
    src.note_resident(window.nbytes + 2 * src.pencil_nbytes)
    for i in range(i0, i1):
        top_ok = i > 0
        bot_ok = i < h
        for j in range(w + 1):
            if j == 0:
                window[:, 0, :] = sentinel
            else:
                window[:, 0, :] = window[:, 1, :]
            if top_ok and j < w:
                window[0, 1, 1:d + 1] = src.read_pencil(i - 1, j)
            else:
                window[0, 1, :] = sentinel
            if bot_ok and j < w:
                window[1, 1, 1:d + 1] = src.read_pencil(i, j)
            else:
                window[1, 1, :] = sentinel
            _scan_pencil_pair_3d(window, q_in, q_out)


def _gather_span_3d(src, i0, i1):
    q_in = np.zeros((len(TYPE_NAMES_3D), src.max_level + 2), np.uint64)
    q_out = np.zeros_like(q_in)
    try:
        if src.mode == "in-memory":
            _scan_slabs_3d(src.padded_levels(), i0, i1, q_in, q_out)
        else:
            _stream_slabs_3d(src, i0, i1, q_in, q_out)
    except ValueError as exc:  # re-raised from the kernel's table guard
        raise ClassificationError(str(exc)) from exc
    return q_in, q_out


def gather_3d_serial(source):
    """Contribution map of a volume, one pass over (h+1)(w+1)(d+1) vertices."""
    src = as_source(source)
    cmap = ContributionMap3D.zeros(src.width, src.height, src.depth, src.max_level)
    q_in, q_out = _gather_span_3d(src, 0, src.height + 1)
    cmap.q_in += q_in
    cmap.q_out += q_out
    return cmap


def gather_3d_parallel(source, workers):
    """Same result as gather_3d_serial on `workers` threads.

    Contiguous i-slab partitioning with private per-worker histograms merged
    after the join; bit-identical for every worker count.
    """
    src = as_source(source)
    blocks = split_blocks(src.height + 1, workers)
    srcs = [src] + [src.for_worker() for _ in blocks[1:]]
    try:
        parts = run_blocks(_gather_span_3d, srcs, blocks)
    finally:
        for s in srcs[1:]:
            s.close()
    cmap = ContributionMap3D.zeros(src.width, src.height, src.depth, src.max_level)
    for q_in, q_out in parts:
        cmap.q_in += q_in
        cmap.q_out += q_out
    return cmap
