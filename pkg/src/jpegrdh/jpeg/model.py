"""Structural model of a baseline JPEG at the quantized-coefficient level.

Coefficient planes are numpy arrays of shape ``(block_rows, block_cols, 64)``
holding quantized values in zigzag order, so ``plane[r, c]`` is one 8x8 block
with the DC term at index 0 and the 63 AC terms at 1..63.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np


@dataclass(frozen=True)
class Component:
    id: int
    h: int
    v: int
    quant_id: int
    dc_table: int = 0
    ac_table: int = 0


@dataclass(frozen=True)
class FrameInfo:
    width: int
    height: int
    components: tuple
    precision: int = 8

    @property
    def hmax(self):
        return max(c.h for c in self.components)

    @property
    def vmax(self):
        return max(c.v for c in self.components)

    @property
    def mcu_cols(self):
        return math.ceil(self.width / (8 * self.hmax))

    @property
    def mcu_rows(self):
        return math.ceil(self.height / (8 * self.vmax))

    def component_size(self, i):
        """Sample extent (width, height) of component ``i`` before padding."""
        c = self.components[i]
        return (math.ceil(self.width * c.h / self.hmax),
                math.ceil(self.height * c.v / self.vmax))

    def coded_blocks(self, i):
        """(rows, cols) of blocks a non-interleaved scan codes for component ``i``."""
        w, h = self.component_size(i)
        return math.ceil(h / 8), math.ceil(w / 8)

    def block_grid(self, i):
        """(rows, cols) of the stored coefficient grid for component ``i``.

        A single-component frame is always coded non-interleaved; otherwise
        the grid is padded out to whole MCUs.
        """
        if len(self.components) == 1:
            return self.coded_blocks(i)
        c = self.components[i]
        return self.mcu_rows * c.v, self.mcu_cols * c.h


@dataclass(frozen=True)
class HuffmanTable:
    """A table in DHT form: code counts per length 1..16 and symbols by code order."""

    bits: tuple
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if len(self.bits) != 16:
            raise ValueError("Huffman BITS must have 16 entries")
        if sum(self.bits) != len(self.values):
            raise ValueError("Huffman BITS total does not match symbol count")


@dataclass(frozen=True, eq=False)
class JpegImage:
    """A decoded baseline JPEG.

    ``quant_tables`` maps table id to a zigzag-ordered array of 64 divisors;
    ``dc_tables``/``ac_tables`` map table id to :class:`HuffmanTable`.
    ``app_segments`` holds ``(marker, payload)`` pairs of APPn/COM segments in
    file order.
    """

    frame: FrameInfo
    quant_tables: dict
    dc_tables: dict
    ac_tables: dict
    coefficients: tuple
    restart_interval: int = 0
    app_segments: tuple = field(default_factory=tuple)

    def __post_init__(self):
        planes = []
        for i, plane in enumerate(self.coefficients):
            plane = np.array(plane, dtype=np.int32, copy=True)
            if plane.shape != (*self.frame.block_grid(i), 64):
                raise ValueError(
                    f"component {i}: coefficient grid {plane.shape[:2]} does "
                    f"not match frame grid {self.frame.block_grid(i)}")
            plane.setflags(write=False)
            planes.append(plane)
        if len(planes) != len(self.frame.components):
            raise ValueError("one coefficient plane per component is required")
        object.__setattr__(self, "coefficients", tuple(planes))
        qt = {}
        for k, t in self.quant_tables.items():
            t = np.array(t, dtype=np.int64, copy=True)
            if t.shape != (64,) or t.min() < 1 or t.max() > 65535:
                raise ValueError(f"quant table {k} must hold 64 entries in [1, 65535]")
            t.setflags(write=False)
            qt[int(k)] = t
        object.__setattr__(self, "quant_tables", qt)
        object.__setattr__(self, "dc_tables", dict(self.dc_tables))
        object.__setattr__(self, "ac_tables", dict(self.ac_tables))
        object.__setattr__(self, "app_segments", tuple(
            (int(m), bytes(p)) for m, p in self.app_segments))

    @property
    def width(self):
        return self.frame.width

    @property
    def height(self):
        return self.frame.height

    def with_coefficients(self, planes):
        """Copy of this image with new coefficient planes and everything else kept."""
        return replace(self, coefficients=tuple(planes))

    def same_coefficients(self, other):
        return (len(self.coefficients) == len(other.coefficients)
                and all(np.array_equal(a, b)
                        for a, b in zip(self.coefficients, other.coefficients)))
