"""Pixel-domain conversion: float IDCT decoding, forward-DCT corpus encoding, PGM I/O."""

from dataclasses import dataclass
import math

import numpy as np
from PIL import Image

from .model import Component, FrameInfo, HuffmanTable, JpegImage
from .tables import (MAX_AC, STD_AC_LUMA, STD_DC_LUMA, STD_LUMA_QUANT, UNZIGZAG,
                     ZIGZAG, scaled_quant_table)

JFIF_APP0 = b"JFIF\x00\x01\x01\x00\x00\x01\x00\x01\x00\x00"


@dataclass(frozen=True, eq=False)
class PixelPlane:
    """8-bit samples of one component, ``samples.shape == (height, width)``."""

    width: int
    height: int
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.shape != (self.height, self.width):
            raise ValueError(
                f"sample array shape {samples.shape} does not match {self.height}x{self.width}")
        if samples.dtype != np.uint8:
            if samples.min() < 0 or samples.max() > 255:
                raise ValueError("samples must lie in [0, 255]")
            samples = samples.astype(np.uint8)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_array(cls, array):
        array = np.asarray(array)
        return cls(array.shape[1], array.shape[0], array)


def _dct_basis():
    # basis[u, x] = c(u)/2 * cos((2x + 1) u pi / 16), orthonormal
    u = np.arange(8)[:, None]
    x = np.arange(8)[None, :]
    basis = np.cos((2 * x + 1) * u * np.pi / 16) / 2
    basis[0] /= math.sqrt(2)
    return basis


DCT_BASIS = _dct_basis()


def round_half_away(x):
    return np.where(x >= 0, np.floor(x + 0.5), np.ceil(x - 0.5))


def idct_blocks(coeffs):
    """Inverse DCT of natural-order ``(..., 8, 8)`` coefficient blocks."""
    return DCT_BASIS.T @ coeffs @ DCT_BASIS


def fdct_blocks(samples):
    """Forward DCT of level-shifted ``(..., 8, 8)`` sample blocks."""
    return DCT_BASIS @ samples @ DCT_BASIS.T


def decode_to_pixels(image):
    """Decode every component to a :class:`PixelPlane` at its own resolution.

    Dequantization, 2-D float IDCT, +128 level shift, rounding half away from
    zero and clamping to [0, 255]. Chroma planes are not upsampled.
    """
    planes = []
    for i, comp in enumerate(image.frame.components):
        zz = image.coefficients[i].astype(np.float64) * image.quant_tables[comp.quant_id]
        natural = zz[..., UNZIGZAG].reshape(*zz.shape[:2], 8, 8)
        pix = round_half_away(idct_blocks(natural) + 128.0)
        pix = np.clip(pix, 0, 255).astype(np.uint8)
        rows, cols = pix.shape[:2]
        full = pix.transpose(0, 2, 1, 3).reshape(rows * 8, cols * 8)
        w, h = image.frame.component_size(i)
        planes.append(PixelPlane(w, h, full[:h, :w]))
    return planes


def encode_from_pixels(plane, quality):
    """Compress an 8-bit grayscale plane to quantized coefficients.

    Uses the Annex K luminance table scaled by the IJG quality formula and
    the Annex K Huffman tables; partial edge blocks are filled by edge
    replication.
    """
    qt = scaled_quant_table(STD_LUMA_QUANT, quality)
    samples = np.asarray(plane.samples, dtype=np.float64)
    h, w = samples.shape
    rows, cols = math.ceil(h / 8), math.ceil(w / 8)
    padded = np.pad(samples, ((0, rows * 8 - h), (0, cols * 8 - w)), mode="edge")
    blocks = padded.reshape(rows, 8, cols, 8).transpose(0, 2, 1, 3) - 128.0
    coeffs = fdct_blocks(blocks).reshape(rows, cols, 64)[..., ZIGZAG]
    quantized = round_half_away(coeffs / qt).astype(np.int32)
    quantized[..., 1:] = np.clip(quantized[..., 1:], -MAX_AC, MAX_AC)

    frame = FrameInfo(w, h, (Component(1, 1, 1, 0, 0, 0),))
    return JpegImage(
        frame=frame,
        quant_tables={0: qt},
        dc_tables={0: HuffmanTable(*STD_DC_LUMA)},
        ac_tables={0: HuffmanTable(*STD_AC_LUMA)},
        coefficients=(quantized,),
        app_segments=((0xE0, JFIF_APP0),),
    )


def read_pgm(path):
    """Read a binary PGM (P5, maxval 255) as a :class:`PixelPlane`."""
    with open(path, "rb") as f:
        magic = f.read(2)
        f.seek(0)
        if magic != b"P5":
            raise ValueError(f"{path}: not a binary PGM (P5) file")
        with Image.open(f) as im:
            if im.mode != "L":
                raise ValueError(f"{path}: only maxval 255 PGM is supported (mode {im.mode})")
            return PixelPlane.from_array(np.array(im))


def write_pgm(path, plane):
    Image.fromarray(plane.samples).save(path, format="PPM")
