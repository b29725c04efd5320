"""Field sources: in-memory arrays and bit-exact file-backed readers.

A field source is anything the gather kernels can consume: it exposes the
grid dimensions, max_level, a definitional per-sample accessor sample_at, and
(for file-backed sources) bounded streaming reads so a gather never holds
more than a sliding window of decoded samples. File-backed sources track the
peak number of field-data bytes resident at any time in peak_field_bytes.

Supported containers:
  * BMP, 8 bits per pixel, uncompressed, standard 14-byte header plus
    BITMAPINFOHEADER, rows padded to 4 bytes. The palette is ignored and the
    raw index is used as the intensity, so max_level is always 255.
  * Headerless raw volumes, little-endian u8 or u16, index order (i, j, k)
    with k fastest. Dimensions come from the caller or from a sidecar JSON
    at <path>.json with schema {"w", "h", "d", "element", "max_level"}.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fields import LEVEL_DTYPE, Field2D, Field3D, quantize, quantize_with_range

_BMP_FILE_HEADER = struct.Struct("<2sIHHI")
_BMP_INFO_HEADER = struct.Struct("<IiiHHIIiiII")
_ELEMENT_DTYPES = {"u8": np.dtype("u1"), "u16": np.dtype("<u2")}


class MemorySource:
    """Whole field held in memory; shared read-only across workers."""

    mode = "in-memory"

    def __init__(self, field):
        self.field = field
        self._padded = None

    @property
    def ndim(self):
        return self.field.values.ndim

    @property
    def max_level(self):
        return self.field.max_level

    @property
    def height(self):
        return self.field.height

    @property
    def width(self):
        return self.field.width

    @property
    def depth(self):
        return self.field.depth

    def sample_at(self, *idx):
        return int(self.field.values[idx])

    def padded_levels(self):
        """Field embedded in a one-cell sentinel border, cached."""
        if self._padded is None:
            v = self.field.values
            shape = tuple(n + 2 for n in v.shape)
            p = np.full(shape, self.max_level + 1, dtype=LEVEL_DTYPE)
            p[(slice(1, -1),) * v.ndim] = v
            self._padded = p
        return self._padded

    def for_worker(self):
        return self

    def close(self):
        pass


class _FileSource:
    """Shared bookkeeping for file-backed sources."""

    mode = "file-backed"

    def __init__(self, path):
        self.path = Path(path)
        self._fh = open(self.path, "rb")
        self.peak_field_bytes = 0

    def note_resident(self, nbytes):
        if nbytes > self.peak_field_bytes:
            self.peak_field_bytes = nbytes

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


@dataclass(frozen=True)
class BmpLayout:
    """Byte layout of an 8-bit uncompressed BMP."""

    data_offset: int
    width: int
    height: int
    bits_per_pixel: int
    row_stride: int
    bottom_up: bool

    def row_offset(self, row):
        """File offset of image row `row`, counting row 0 as the top row."""
        file_row = self.height - 1 - row if self.bottom_up else row
        return self.data_offset + file_row * self.row_stride


def _parse_bmp_layout(fh, path):
    fh.seek(0)
    header = fh.read(_BMP_FILE_HEADER.size)
    if len(header) < _BMP_FILE_HEADER.size:
        raise ValueError(f"{path}: truncated BMP file header")
    magic, _size, _r1, _r2, data_offset = _BMP_FILE_HEADER.unpack(header)
    if magic != b"BM":
        raise ValueError(f"{path}: not a BMP file (bad magic {magic!r})")
    info = fh.read(_BMP_INFO_HEADER.size)
    if len(info) < _BMP_INFO_HEADER.size:
        raise ValueError(f"{path}: truncated BMP info header")
    (_hsize, width, height, _planes, bpp, compression,
     _imgsize, _xppm, _yppm, _ncolors, _nimportant) = _BMP_INFO_HEADER.unpack(info)
    if bpp != 8:
        raise ValueError(f"{path}: only 8-bit BMP supported, file has {bpp} bits per pixel")
    if compression != 0:
        raise ValueError(f"{path}: compressed BMP not supported (compression={compression})")
    if width < 1 or height == 0:
        raise ValueError(f"{path}: bad BMP dimensions {width}x{height}")
    bottom_up = height > 0
    height = abs(height)
    stride = (width + 3) & ~3
    fh.seek(0, 2)
    needed = data_offset + stride * height
    if fh.tell() < needed:
        raise ValueError(f"{path}: truncated BMP pixel data, need {needed} bytes, have {fh.tell()}")
    return BmpLayout(data_offset, width, height, bpp, stride, bottom_up)


def read_bmp(path):
    """Load an 8-bit BMP as a Field2D with max_level 255, top row first."""
    with open(path, "rb") as fh:
        layout = _parse_bmp_layout(fh, path)
        fh.seek(layout.data_offset)
        raw = fh.read(layout.row_stride * layout.height)
    rows = np.frombuffer(raw, dtype=np.uint8).reshape(layout.height, layout.row_stride)
    pixels = rows[:, : layout.width]
    if layout.bottom_up:
        pixels = pixels[::-1]
    return Field2D(pixels.astype(LEVEL_DTYPE), 255)


def write_bmp(path, field):
    """Write a Field2D (max_level <= 255) as an 8-bit grayscale BMP."""
    values = field.values
    if field.max_level > 255:
        raise ValueError("BMP output requires max_level <= 255")
    h, w = values.shape
    stride = (w + 3) & ~3
    palette = bytearray()
    for i in range(256):
        palette += bytes((i, i, i, 0))
    data_offset = _BMP_FILE_HEADER.size + _BMP_INFO_HEADER.size + len(palette)
    file_size = data_offset + stride * h
    with open(path, "wb") as fh:
        fh.write(_BMP_FILE_HEADER.pack(b"BM", file_size, 0, 0, data_offset))
        fh.write(_BMP_INFO_HEADER.pack(_BMP_INFO_HEADER.size, w, h, 1, 8, 0,
                                       stride * h, 0, 0, 256, 0))
        fh.write(palette)
        pad = bytes(stride - w)
        for row in values[::-1]:  # bottom-up row order
            fh.write(row.astype(np.uint8).tobytes())
            fh.write(pad)


class BmpSource(_FileSource):
    """File-backed 2D source reading pixels straight from an open BMP."""

    ndim = 2
    max_level = 255

    def __init__(self, path):
        super().__init__(path)
        try:
            self.layout = _parse_bmp_layout(self._fh, self.path)
        except Exception:
            self.close()
            raise

    @property
    def height(self):
        return self.layout.height

    @property
    def width(self):
        return self.layout.width

    @property
    def row_nbytes(self):
        return self.layout.width

    def sample_at(self, i, j):
        self._fh.seek(self.layout.row_offset(i) + j)
        b = self._fh.read(1)
        if len(b) != 1:
            raise OSError(f"{self.path}: short read at pixel ({i}, {j})")
        return b[0]

    def read_row(self, i):
        self._fh.seek(self.layout.row_offset(i))
        raw = self._fh.read(self.layout.width)
        if len(raw) != self.layout.width:
            raise OSError(f"{self.path}: short read at row {i}")
        return np.frombuffer(raw, dtype=np.uint8)

    def for_worker(self):
        return BmpSource(self.path)


def open_bmp_lowmem(path):
    """Open a BMP for on-demand per-sample access with O(1) field memory."""
    return BmpSource(path)


def _volume_shape(dims):
    dims = tuple(int(n) for n in dims)
    if len(dims) != 3 or min(dims) < 1:
        raise ValueError(f"volume dims must be three positive ints (w, h, d), got {dims}")
    w, h, d = dims
    return w, h, d


def read_raw_volume(path, dims, element="u8", max_level=255):
    """Load a headerless little-endian volume as a Field3D.

    u8 data with max_level 255 pass through untouched; anything else is
    quantized onto 0..max_level from the data's own range.
    """
    w, h, d = _volume_shape(dims)
    if element not in _ELEMENT_DTYPES:
        raise ValueError(f"element must be u8 or u16, got {element!r}")
    dtype = _ELEMENT_DTYPES[element]
    expected = w * h * d * dtype.itemsize
    actual = Path(path).stat().st_size
    if actual != expected:
        raise ValueError(
            f"{path}: size mismatch, expected {expected} bytes for "
            f"{w}x{h}x{d} {element}, found {actual}"
        )
    raw = np.fromfile(path, dtype=dtype).reshape(h, w, d)
    if element == "u8" and max_level == 255:
        values = raw.astype(LEVEL_DTYPE)
    else:
        values = quantize(raw, max_level)
    return Field3D(values, max_level)


def write_raw_volume(path, field, element="u8"):
    """Write the level array of a Field3D as headerless little-endian data."""
    dtype = _ELEMENT_DTYPES[element]
    limit = 255 if element == "u8" else 65535
    if field.max_level > limit:
        raise ValueError(f"{element} output requires max_level <= {limit}")
    field.values.astype(dtype).tofile(path)


def sidecar_path(path):
    return Path(str(path) + ".json")


def write_sidecar(path, dims, element, max_level):
    w, h, d = _volume_shape(dims)
    meta = {"w": w, "h": h, "d": d, "element": element, "max_level": max_level}
    sidecar_path(path).write_text(json.dumps(meta))


def read_sidecar(path):
    """Load volume metadata from <path>.json; returns (dims, element, max_level)."""
    meta = json.loads(sidecar_path(path).read_text())
    dims = (int(meta["w"]), int(meta["h"]), int(meta["d"]))
    return dims, meta["element"], int(meta["max_level"])


class RawVolumeSource(_FileSource):
    """File-backed 3D source reading k-pencils of a headerless volume.

    Non-identity quantization (u16, or u8 with max_level != 255) needs a
    source value range so each sample can be mapped independently. Pass
    value_range=(lo, hi) to pin it, or leave it None to let the constructor
    find min and max in one streaming pass over the file.
    """

    ndim = 3

    def __init__(self, path, dims, element="u8", max_level=255, value_range=None):
        w, h, d = _volume_shape(dims)
        if element not in _ELEMENT_DTYPES:
            raise ValueError(f"element must be u8 or u16, got {element!r}")
        super().__init__(path)
        try:
            self._w, self._h, self._d = w, h, d
            self.element = element
            self.max_level = max_level
            self._dtype = _ELEMENT_DTYPES[element]
            expected = w * h * d * self._dtype.itemsize
            actual = self.path.stat().st_size
            if actual != expected:
                raise ValueError(
                    f"{path}: size mismatch, expected {expected} bytes for "
                    f"{w}x{h}x{d} {element}, found {actual}"
                )
            self._identity = element == "u8" and max_level == 255 and value_range is None
            if self._identity:
                self.value_range = None
            else:
                self.value_range = tuple(value_range) if value_range else self._scan_range()
        except Exception:
            self.close()
            raise

    def _scan_range(self):
        # One bounded-buffer pass; 64 KiB chunks regardless of file size.
        lo, hi = None, None
        self._fh.seek(0)
        chunk_items = max(1, 65536 // self._dtype.itemsize)
        while True:
            block = np.fromfile(self._fh, dtype=self._dtype, count=chunk_items)
            if block.size == 0:
                break
            bmin, bmax = block.min(), block.max()
            lo = bmin if lo is None else min(lo, bmin)
            hi = bmax if hi is None else max(hi, bmax)
        return float(lo), float(hi)

    @property
    def height(self):
        return self._h

    @property
    def width(self):
        return self._w

    @property
    def depth(self):
        return self._d

    @property
    def pencil_nbytes(self):
        return self._d * self._dtype.itemsize

    def _decode(self, raw):
        if self._identity:
            return raw.astype(LEVEL_DTYPE)
        lo, hi = self.value_range
        return quantize_with_range(raw, lo, hi, self.max_level)

    def sample_at(self, i, j, k):
        offset = ((i * self._w + j) * self._d + k) * self._dtype.itemsize
        self._fh.seek(offset)
        raw = self._fh.read(self._dtype.itemsize)
        if len(raw) != self._dtype.itemsize:
            raise OSError(f"{self.path}: short read at voxel ({i}, {j}, {k})")
        return int(self._decode(np.frombuffer(raw, dtype=self._dtype))[0])

    def read_pencil(self, i, j):
        """All depth samples at (i, j), decoded to levels."""
        offset = (i * self._w + j) * self._d * self._dtype.itemsize
        self._fh.seek(offset)
        raw = self._fh.read(self.pencil_nbytes)
        if len(raw) != self.pencil_nbytes:
            raise OSError(f"{self.path}: short read at pencil ({i}, {j})")
        return self._decode(np.frombuffer(raw, dtype=self._dtype))

    def for_worker(self):
        return RawVolumeSource(self.path, (self._w, self._h, self._d), self.element,
                               self.max_level, self.value_range)


def open_raw_lowmem(path, dims, element="u8", max_level=255, value_range=None):
    """Open a raw volume for on-demand access; see RawVolumeSource."""
    return RawVolumeSource(path, dims, element, max_level, value_range)


def as_source(field_or_source):
    """Wrap a bare Field2D/Field3D in a MemorySource; pass sources through."""
    if isinstance(field_or_source, (Field2D, Field3D)):
        return MemorySource(field_or_source)
    return field_or_source
