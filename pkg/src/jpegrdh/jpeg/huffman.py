"""Huffman code construction, lookup tables and optimal table generation."""

import numpy as np

from .model import HuffmanTable

LOOKAHEAD = 16


def canonical_codes(table):
    """Return ``(symbols, codes, lengths)`` in code order (T.81 Annex C)."""
    symbols, codes, lengths = [], [], []
    code = 0
    k = 0
    for length, count in enumerate(table.bits, start=1):
        for _ in range(count):
            if code >= (1 << length):
                raise ValueError("Huffman table is over-subscribed")
            symbols.append(table.values[k])
            codes.append(code)
            lengths.append(length)
            code += 1
            k += 1
        code <<= 1
    return symbols, codes, lengths


def encoder_arrays(table):
    """Arrays ``(code, length)`` indexed by symbol; length 0 marks an absent symbol."""
    code = np.zeros(256, dtype=np.int64)
    length = np.zeros(256, dtype=np.int64)
    for sym, c, n in zip(*canonical_codes(table)):
        code[sym] = c
        length[sym] = n
    return code, length


def decoder_lut(table):
    """Map every 16-bit lookahead word to ``(length << 8) | symbol``; 0 means invalid."""
    lut = [0] * (1 << LOOKAHEAD)
    for sym, c, n in zip(*canonical_codes(table)):
        start = c << (LOOKAHEAD - n)
        span = 1 << (LOOKAHEAD - n)
        lut[start:start + span] = [(n << 8) | sym] * span
    return lut


def optimal_table(freq):
    """Build a length-limited optimal table from symbol counts (T.81 Annex K.2).

    ``freq`` is indexed by symbol (0..255). A reserved pseudo-symbol keeps the
    all-ones codeword unused, code lengths are capped at 16, and within one
    length symbols are listed in increasing order. When the minimum count is
    tied, the larger symbol index is merged first.
    """
    freq = [int(f) for f in freq] + [0] * (257 - len(freq))
    freq[256] = 1
    codesize = [0] * 257
    others = [-1] * 257
    active = [i for i in range(257) if freq[i] > 0]

    while len(active) > 1:
        c1 = _least(active, freq, exclude=-1)
        c2 = _least(active, freq, exclude=c1)
        freq[c1] += freq[c2]
        freq[c2] = 0
        active.remove(c2)
        codesize[c1] += 1
        while others[c1] >= 0:
            c1 = others[c1]
            codesize[c1] += 1
        others[c1] = c2
        codesize[c2] += 1
        while others[c2] >= 0:
            c2 = others[c2]
            codesize[c2] += 1

    bits = [0] * 33
    for i in range(257):
        if codesize[i]:
            if codesize[i] > 32:
                raise ValueError("Huffman code length exceeds 32")
            bits[codesize[i]] += 1

    for i in range(32, 16, -1):
        while bits[i] > 0:
            j = i - 2
            while bits[j] == 0:
                j -= 1
            bits[i] -= 2
            bits[i - 1] += 1
            bits[j + 1] += 2
            bits[j] -= 1

    i = 16
    while bits[i] == 0:
        i -= 1
    bits[i] -= 1

    values = [s for n in range(1, 33) for s in range(256) if codesize[s] == n]
    return HuffmanTable(tuple(bits[1:17]), tuple(values))


def _least(active, freq, exclude):
    best, best_f = -1, None
    for i in active:
        if i == exclude:
            continue
        if best_f is None or freq[i] <= best_f:
            best, best_f = i, freq[i]
    return best
