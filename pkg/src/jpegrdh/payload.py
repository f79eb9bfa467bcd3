"""Payload bit sequences: length framing, seeded generation, byte conversion.

Bit sequences are 1-D ``uint8`` numpy arrays holding 0/1 values.
"""

import numpy as np

from .errors import FrameCorrupt, TooLong

HEADER_BITS = 32
PRNG_NAME = "numpy.random.default_rng (PCG64)"


def as_bits(bits):
    arr = np.asarray(bits, dtype=np.uint8).ravel()
    if arr.size and arr.max() > 1:
        raise ValueError("bit sequence may only contain 0 and 1")
    return arr


def int_to_bits(value, width=HEADER_BITS):
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def bits_to_int(bits):
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def frame(payload):
    """Prefix ``payload`` with its bit length as a 32-bit big-endian field."""
    payload = as_bits(payload)
    if payload.size >= 1 << HEADER_BITS:
        raise TooLong(f"payload of {payload.size} bits does not fit a 32-bit length field")
    return np.concatenate((int_to_bits(payload.size), payload))


def unframe(stream):
    """Inverse of :func:`frame`; trailing bits after the payload are ignored."""
    stream = as_bits(stream)
    if stream.size < HEADER_BITS:
        raise FrameCorrupt(f"stream of {stream.size} bits is shorter than the length header")
    n = bits_to_int(stream[:HEADER_BITS])
    if n > stream.size - HEADER_BITS:
        raise FrameCorrupt(
            f"header declares {n} payload bits but only {stream.size - HEADER_BITS} follow")
    return stream[HEADER_BITS:HEADER_BITS + n].copy()


def random_payload(length, seed):
    """Deterministic pseudorandom bits; ``seed`` is reduced modulo 2**64."""
    rng = np.random.default_rng(int(seed) % (1 << 64))
    return rng.integers(0, 2, size=int(length), dtype=np.uint8)


def bytes_to_bits(data):
    """Most-significant bit first."""
    return np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))


def bits_to_bytes(bits):
    """Most-significant bit first; a partial final byte is zero-padded."""
    return np.packbits(as_bits(bits)).tobytes()
