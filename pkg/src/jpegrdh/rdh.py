"""Reversible data hiding in nonzero quantized AC coefficients.

Three schemes share one interface:

``PROPOSED``
    bit 0 maps C to 2C, bit 1 maps C to 2C - sign(C). Every nonzero AC
    carries one bit and magnitude-1 coefficients carrying a 1 stay put.
``LIU2018``
    bit 0 maps C to 2C, bit 1 maps C to 2C + sign(C).
``HUANG2016``
    histogram shifting on magnitudes: |C| = 1 carries a bit (moved outward
    by one for bit 1), larger magnitudes are shifted outward by one.

Coefficients are visited component by component, blocks in raster order,
AC positions 1..63 in zigzag order. The payload is preceded by a 32-bit
length field so extraction needs nothing but the marked image.
"""

from dataclasses import asdict, dataclass
import enum

import numpy as np

from .errors import FrameCorrupt, Overflow, PayloadTooLarge, ZeroInput
from .jpeg.tables import MAX_AC
from .payload import HEADER_BITS, as_bits, bits_to_int, frame


class Scheme(str, enum.Enum):
    PROPOSED = "proposed"
    LIU2018 = "liu2018"
    HUANG2016 = "huang2016"


SCHEMES = tuple(Scheme)


def sign(x):
    if x > 0:
        return 1
    if x < 0:
        return -1
    raise ZeroInput("sign() is undefined for 0")


def embed_coeff(scheme, c, s):
    """Marked value of the nonzero coefficient ``c`` carrying bit ``s``."""
    scheme = Scheme(scheme)
    c = int(c)
    if s not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {s!r}")
    sg = sign(c)
    if scheme is Scheme.PROPOSED:
        out = 2 * c if s == 0 else 2 * c - sg
    elif scheme is Scheme.LIU2018:
        out = 2 * c if s == 0 else 2 * c + sg
    else:
        if abs(c) != 1:
            raise ValueError(f"histogram shifting embeds only in magnitude-1 values, got {c}")
        out = c + sg * s
    if abs(out) > MAX_AC:
        raise Overflow(f"embedding into {c} gives {out}, beyond magnitude {MAX_AC}")
    return out


def shift_coeff(c):
    """Move a magnitude>1 coefficient one step away from zero (histogram shifting)."""
    c = int(c)
    if abs(c) <= 1:
        raise ValueError(f"only magnitudes above 1 are shifted, got {c}")
    out = c + sign(c)
    if abs(out) > MAX_AC:
        raise Overflow(f"shifting {c} gives {out}, beyond magnitude {MAX_AC}")
    return out


def extract_coeff(scheme, cbar):
    """Return ``(bit, restored)``; ``bit`` is None where nothing was embedded."""
    scheme = Scheme(scheme)
    cbar = int(cbar)
    sg = sign(cbar)
    if scheme is Scheme.HUANG2016:
        if abs(cbar) == 1:
            return 0, cbar
        if abs(cbar) == 2:
            return 1, sg
        return None, cbar - sg
    if cbar % 2 == 0:
        return 0, cbar // 2
    if scheme is Scheme.PROPOSED:
        return 1, (cbar + sg) // 2
    return 1, (cbar - sg) // 2


# Array forms used by the image pipelines; they must agree with the scalar
# definitions above on every input.

def _embed_array(scheme, c, s):
    sg = np.sign(c)
    if scheme is Scheme.PROPOSED:
        return 2 * c - sg * s
    if scheme is Scheme.LIU2018:
        return 2 * c + sg * s
    return c + sg * s


def _extract_array(scheme, cbar):
    sg = np.sign(cbar)
    odd = (cbar & 1).astype(np.uint8)
    if scheme is Scheme.PROPOSED:
        return odd, (cbar + sg * odd) // 2
    return odd, (cbar - sg * odd) // 2


@dataclass(frozen=True)
class EmbedReport:
    scheme: Scheme
    capacity_bits: int
    payload_bits: int
    bits_embedded: int
    coeffs_modified: int
    coeffs_visited: int

    def as_dict(self):
        d = asdict(self)
        d["scheme"] = self.scheme.value
        return d


class _AcView:
    """All AC coefficients of an image as one ``(blocks, 63)`` matrix."""

    def __init__(self, image):
        self.image = image
        self.shapes = [p.shape[:2] for p in image.coefficients]
        self.ac = np.concatenate(
            [p[..., 1:].reshape(-1, 63) for p in image.coefficients]).astype(np.int64)
        self.starts = np.cumsum([0] + [r * c for r, c in self.shapes])

    def locate(self, flat_index):
        """(component, (row, col), zigzag index) of a flat AC index."""
        block, k = divmod(int(flat_index), 63)
        comp = int(np.searchsorted(self.starts, block, side="right")) - 1
        local = block - int(self.starts[comp])
        cols = self.shapes[comp][1]
        return comp, divmod(local, cols), k + 1

    def rebuild(self, ac):
        planes = []
        for i, plane in enumerate(self.image.coefficients):
            new = plane.copy()
            rows, cols = self.shapes[i]
            new[..., 1:] = ac[self.starts[i]:self.starts[i + 1]].reshape(rows, cols, 63)
            planes.append(new)
        return self.image.with_coefficients(planes)


def _overflow_check(view, flat_ac, idx, new, what):
    bad = np.flatnonzero(np.abs(new) > MAX_AC)
    if bad.size:
        j = idx[bad[0]]
        comp, block, k = view.locate(j)
        raise Overflow(
            f"{what}: coefficient {flat_ac[j]} at component {comp} block {block} "
            f"index {k} would become {new[bad[0]]}, beyond magnitude {MAX_AC}",
            component=comp, block=block, index=k)


def capacity(image, scheme):
    """Carrier count: nonzero ACs, or magnitude-1 ACs for histogram shifting."""
    scheme = Scheme(scheme)
    ac = _AcView(image).ac
    if scheme is Scheme.HUANG2016:
        return int(np.count_nonzero(np.abs(ac) == 1))
    return int(np.count_nonzero(ac))


def embed_image(image, payload, scheme):
    """Hide ``payload`` bits in ``image``; returns ``(marked, EmbedReport)``.

    Raises PayloadTooLarge when the framed payload exceeds the carriers and
    Overflow when a visited coefficient would leave the baseline AC range.
    """
    scheme = Scheme(scheme)
    payload = as_bits(payload)
    bits = frame(payload).astype(np.int64)
    view = _AcView(image)
    if scheme is Scheme.HUANG2016:
        return _embed_hs(view, payload, bits)

    flat = view.ac.ravel()
    carriers = np.flatnonzero(flat)
    if bits.size > carriers.size:
        raise PayloadTooLarge(
            f"{payload.size} payload bits + {HEADER_BITS}-bit header exceed "
            f"capacity of {carriers.size} bits")
    idx = carriers[:bits.size]
    new = _embed_array(scheme, flat[idx], bits)
    _overflow_check(view, flat, idx, new, scheme.value)
    modified = int(np.count_nonzero(new != flat[idx]))
    out = flat.copy()
    out[idx] = new
    report = EmbedReport(scheme, int(carriers.size), int(payload.size), int(bits.size),
                         modified, int(idx.size))
    return view.rebuild(out.reshape(view.ac.shape)), report


def extract_image(marked, scheme):
    """Blindly recover ``(payload, original_image)`` from a marked image."""
    scheme = Scheme(scheme)
    view = _AcView(marked)
    if scheme is Scheme.HUANG2016:
        return _extract_hs(view)

    flat = view.ac.ravel()
    carriers = np.flatnonzero(flat)
    if carriers.size < HEADER_BITS:
        raise FrameCorrupt(f"only {carriers.size} carriers, too few for the length header")
    header = flat[carriers[:HEADER_BITS]] & 1
    n = HEADER_BITS + bits_to_int(header)
    if n > carriers.size:
        raise FrameCorrupt(
            f"header declares {n - HEADER_BITS} payload bits but only "
            f"{carriers.size - HEADER_BITS} carriers remain")
    idx = carriers[:n]
    bits, restored = _extract_array(scheme, flat[idx])
    out = flat.copy()
    out[idx] = restored
    return bits[HEADER_BITS:].copy(), view.rebuild(out.reshape(view.ac.shape))


def _hs_block_order(ac):
    """Blocks sorted by descending zero-AC count, ties in traversal order."""
    zeros = np.count_nonzero(ac == 0, axis=1)
    return np.argsort(-zeros, kind="stable")


def _embed_hs(view, payload, bits):
    ac = view.ac
    order = _hs_block_order(ac)
    ones_per_block = np.count_nonzero(np.abs(ac) == 1, axis=1)[order]
    cum = np.cumsum(ones_per_block)
    total = int(cum[-1]) if cum.size else 0
    if bits.size > total:
        raise PayloadTooLarge(
            f"{payload.size} payload bits + {HEADER_BITS}-bit header exceed "
            f"capacity of {total} bits")
    n_blocks = int(np.searchsorted(cum, bits.size, side="left")) + 1
    visited = order[:n_blocks]

    # Flat indices of the visited coefficients, in visiting order.
    idx = (visited[:, None] * 63 + np.arange(63)[None, :]).ravel()
    flat = ac.ravel()
    vals = flat[idx]
    mag = np.abs(vals)
    carrier = mag == 1
    s = np.zeros(vals.size, dtype=np.int64)
    s[np.flatnonzero(carrier)[:bits.size]] = bits
    new = vals + np.sign(vals) * np.where(carrier, s, mag > 1)
    _overflow_check(view, flat, idx, new, "histogram shift")

    out = flat.copy()
    out[idx] = new
    report = EmbedReport(Scheme.HUANG2016, total, int(payload.size), int(bits.size),
                         int(np.count_nonzero(new != vals)),
                         int(np.count_nonzero(vals)))
    return view.rebuild(out.reshape(ac.shape)), report


def _extract_hs(view):
    ac = view.ac
    order = _hs_block_order(ac)
    ordered = ac[order]
    mag = np.abs(ordered)
    carrier_flat = np.flatnonzero((mag == 1) | (mag == 2))
    if carrier_flat.size < HEADER_BITS:
        raise FrameCorrupt(f"only {carrier_flat.size} carriers, too few for the length header")
    header = (mag.ravel()[carrier_flat[:HEADER_BITS]] == 2).astype(np.uint8)
    n = HEADER_BITS + bits_to_int(header)
    if n > carrier_flat.size:
        raise FrameCorrupt(
            f"header declares {n - HEADER_BITS} payload bits but only "
            f"{carrier_flat.size - HEADER_BITS} carriers remain")
    bits = (mag.ravel()[carrier_flat[:n]] == 2).astype(np.uint8)

    n_blocks = int(carrier_flat[n - 1]) // 63 + 1
    vis = ordered[:n_blocks]
    vmag = np.abs(vis)
    restored = np.where(vmag == 2, np.sign(vis),
                        np.where(vmag > 2, vis - np.sign(vis), vis))
    out = ac.copy()
    out[order[:n_blocks]] = restored
    return bits[HEADER_BITS:].copy(), view.rebuild(out)
