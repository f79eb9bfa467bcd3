"""Quality and cost measurements for marked images."""

from dataclasses import asdict, dataclass
import math

import numpy as np

from .errors import DimensionMismatch
from .jpeg.pixels import decode_to_pixels


def psnr(a, b):
    """Peak signal-to-noise ratio in dB between two 8-bit planes; ``inf`` if identical."""
    x = np.asarray(getattr(a, "samples", a), dtype=np.float64)
    y = np.asarray(getattr(b, "samples", b), dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionMismatch(f"plane shapes differ: {x.shape} vs {y.shape}")
    mse = np.mean((x - y) ** 2)
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(255.0 ** 2 / mse)


@dataclass(frozen=True)
class MetricsReport:
    scheme: str
    payload_bits: int
    psnr_db: float
    file_size_original: int
    file_size_marked: int

    @property
    def size_increase(self):
        return self.file_size_marked - self.file_size_original

    def as_dict(self):
        d = asdict(self)
        d["size_increase"] = self.size_increase
        return d


def _nbytes(x):
    return x if isinstance(x, int) else len(x)


def measure(original, marked, original_bytes, marked_bytes, scheme="", payload_bits=0,
            reference=None):
    """PSNR of the marked luminance plane plus file sizes.

    The reference is the decoded ``original`` unless a ``reference`` plane is
    given (e.g. the uncompressed source). Byte arguments may be the encoded
    bytes themselves or their lengths.
    """
    if (original.width, original.height) != (marked.width, marked.height):
        raise DimensionMismatch("original and marked images differ in size")
    ref = reference if reference is not None else decode_to_pixels(original)[0]
    got = decode_to_pixels(marked)[0]
    return MetricsReport(
        scheme=getattr(scheme, "value", scheme),
        payload_bits=int(payload_bits),
        psnr_db=psnr(ref, got),
        file_size_original=_nbytes(original_bytes),
        file_size_marked=_nbytes(marked_bytes),
    )
