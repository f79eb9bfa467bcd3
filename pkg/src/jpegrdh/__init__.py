"""Reversible data hiding in quantized JPEG coefficients."""

from .jpeg import (JpegImage, PixelPlane, TablePolicy, decode_to_pixels,
                   encode_from_pixels, parse_jpeg, serialize_jpeg)
from .metrics import MetricsReport, measure, psnr
from .payload import frame, random_payload, unframe
from .rdh import (EmbedReport, Scheme, capacity, embed_coeff, embed_image,
                  extract_coeff, extract_image, shift_coeff, sign)

__version__ = "0.1.0"
