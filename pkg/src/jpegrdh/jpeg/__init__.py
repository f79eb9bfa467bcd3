"""Baseline JPEG coefficient codec."""

from .model import Component, FrameInfo, HuffmanTable, JpegImage
from .parser import parse_jpeg
from .pixels import (PixelPlane, decode_to_pixels, encode_from_pixels,
                     read_pgm, write_pgm)
from .writer import TablePolicy, serialize_jpeg

__all__ = [
    "Component", "FrameInfo", "HuffmanTable", "JpegImage", "PixelPlane",
    "TablePolicy", "decode_to_pixels", "encode_from_pixels", "parse_jpeg",
    "read_pgm", "serialize_jpeg", "write_pgm",
]
