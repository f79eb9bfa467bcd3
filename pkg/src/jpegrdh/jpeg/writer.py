"""Baseline JPEG serializer.

Output layout (the canonical form): SOI, APPn/COM segments in original order,
one DQT per referenced table, SOF0, one DHT per referenced table (DC then AC,
component order), DRI when a restart interval is set, a single SOS covering
every component, entropy-coded data padded with 1-bits, EOI.
"""

import enum
import struct

import numpy as np

from ..errors import CategoryOverflow, MissingCode
from .huffman import encoder_arrays, optimal_table
from .parser import scan_block_order
from .tables import MAX_AC, MAX_DC_DIFF


class TablePolicy(str, enum.Enum):
    PRESERVE = "preserve"
    OPTIMAL = "optimal"


# Bit length of every magnitude that can appear (DC differences up to 2047).
_CATEGORY = np.zeros(4096, dtype=np.int64)
_CATEGORY[1:] = np.floor(np.log2(np.arange(1, 4096))).astype(np.int64) + 1


def serialize_jpeg(image, table_policy=TablePolicy.OPTIMAL):
    """Encode ``image`` as a baseline JPEG byte string.

    ``PRESERVE`` reuses the image's Huffman tables and raises
    :class:`~jpegrdh.errors.MissingCode` if a needed symbol has no code;
    ``OPTIMAL`` builds two-pass optimal tables from the actual symbols.
    """
    policy = TablePolicy(table_policy)
    frame = image.frame
    events = _symbol_events(image)

    dc_ids = sorted({c.dc_table for c in frame.components})
    ac_ids = sorted({c.ac_table for c in frame.components})
    if policy is TablePolicy.OPTIMAL:
        dc_tabs = {t: optimal_table(_counts(events, 0, t)) for t in dc_ids}
        ac_tabs = {t: optimal_table(_counts(events, 1, t)) for t in ac_ids}
    else:
        dc_tabs = {t: image.dc_tables[t] for t in dc_ids}
        ac_tabs = {t: image.ac_tables[t] for t in ac_ids}

    scan_bytes = _encode_events(events, dc_tabs, ac_tabs)

    out = bytearray(b"\xff\xd8")
    for marker, payload in image.app_segments:
        out += _segment(marker, payload)
    seen = []
    for c in frame.components:
        if c.quant_id not in seen:
            seen.append(c.quant_id)
            out += _dqt(c.quant_id, image.quant_tables[c.quant_id])
    out += _sof0(frame)
    emitted = set()
    for c in frame.components:
        for kind, tid, tabs in ((0, c.dc_table, dc_tabs), (1, c.ac_table, ac_tabs)):
            if (kind, tid) not in emitted:
                emitted.add((kind, tid))
                table = tabs[tid]
                out += _segment(0xC4, bytes([kind << 4 | tid, *table.bits, *table.values]))
    if image.restart_interval:
        out += _segment(0xDD, struct.pack(">H", image.restart_interval))
    sos = bytearray([len(frame.components)])
    for c in frame.components:
        sos += bytes([c.id, c.dc_table << 4 | c.ac_table])
    sos += b"\x00\x3f\x00"
    out += _segment(0xDA, bytes(sos))
    out += scan_bytes
    out += b"\xff\xd9"
    return bytes(out)


def _segment(marker, payload):
    if len(payload) + 2 > 0xFFFF:
        raise ValueError(f"segment 0xFF{marker:02X} payload too long")
    return bytes([0xFF, marker]) + struct.pack(">H", len(payload) + 2) + payload


def _dqt(tid, table):
    table = np.asarray(table)
    if table.max() > 255:
        return _segment(0xDB, bytes([0x10 | tid]) + table.astype(">u2").tobytes())
    return _segment(0xDB, bytes([tid]) + table.astype(np.uint8).tobytes())


def _sof0(frame):
    body = bytearray(struct.pack(">BHHB", 8, frame.height, frame.width, len(frame.components)))
    for c in frame.components:
        body += bytes([c.id, c.h << 4 | c.v, c.quant_id])
    return _segment(0xC0, bytes(body))


class _Events:
    """Flat, coding-ordered symbol stream of one scan."""

    def __init__(self, kind, table, symbol, extra, extra_len, interval, n_intervals):
        self.kind = kind
        self.table = table
        self.symbol = symbol
        self.extra = extra
        self.extra_len = extra_len
        self.interval = interval
        self.n_intervals = n_intervals


def _symbol_events(image):
    frame = image.frame
    comp_idx = list(range(len(frame.components)))
    comp, row, col, mcu = scan_block_order(frame, comp_idx)
    nb = len(comp)
    blocks = np.empty((nb, 64), dtype=np.int64)
    for ci in comp_idx:
        sel = comp == ci
        blocks[sel] = image.coefficients[ci][row[sel], col[sel]]

    ac = blocks[:, 1:]
    bad = np.abs(ac) > MAX_AC
    if bad.any():
        b, k = np.argwhere(bad)[0]
        raise CategoryOverflow(
            f"AC coefficient {ac[b, k]} at component {comp[b]} block "
            f"({row[b]}, {col[b]}) index {k + 1} exceeds magnitude {MAX_AC}")

    ri = image.restart_interval
    interval = mcu // ri if ri else np.zeros(nb, dtype=np.int64)
    n_intervals = int(interval[-1]) + 1

    dc_diff = np.empty(nb, dtype=np.int64)
    for ci in comp_idx:
        idx = np.flatnonzero(comp == ci)
        dc = blocks[idx, 0]
        prev = np.concatenate(([0], dc[:-1]))
        reset = np.concatenate(([True], interval[idx][1:] != interval[idx][:-1]))
        prev[reset] = 0
        dc_diff[idx] = dc - prev
    bad = np.abs(dc_diff) > MAX_DC_DIFF
    if bad.any():
        b = int(np.flatnonzero(bad)[0])
        raise CategoryOverflow(
            f"DC difference {dc_diff[b]} at component {comp[b]} block "
            f"({row[b]}, {col[b]}) exceeds magnitude {MAX_DC_DIFF}")

    dc_tab = np.array([c.dc_table for c in frame.components])[comp]
    ac_tab = np.array([c.ac_table for c in frame.components])[comp]

    # Sort keys: 512 slots per block; position k uses 4*k + sub, with
    # sub 0..2 for ZRLs and 3 for the coefficient symbol itself.
    keys, kinds, tabs, syms, extras, elens = [], [], [], [], [], []

    def add(key, kind, tab, sym, extra, elen):
        keys.append(key)
        kinds.append(np.broadcast_to(kind, key.shape))
        tabs.append(tab)
        syms.append(sym)
        extras.append(extra)
        elens.append(elen)

    blk = np.arange(nb, dtype=np.int64)
    s = _CATEGORY[np.abs(dc_diff)]
    add(blk * 512, 0, dc_tab, s, _extra_bits(dc_diff, s), s)

    b, k0 = np.nonzero(ac)
    k = k0 + 1
    v = ac[b, k0]
    first = np.ones(len(b), dtype=bool)
    first[1:] = b[1:] != b[:-1]
    prev_k = np.empty_like(k)
    prev_k[0:1] = 0
    prev_k[1:] = k[:-1]
    prev_k[first] = 0
    run = k - prev_k - 1
    s = _CATEGORY[np.abs(v)]
    add(b * 512 + 4 * k + 3, 1, ac_tab[b], (run % 16) * 16 + s, _extra_bits(v, s), s)

    zrl = run // 16
    for j in range(3):
        sel = zrl > j
        z = np.count_nonzero(sel)
        add(b[sel] * 512 + 4 * k[sel] + j, 1, ac_tab[b[sel]],
            np.full(z, 0xF0), np.zeros(z, dtype=np.int64), np.zeros(z, dtype=np.int64))

    last_k = np.zeros(nb, dtype=np.int64)
    last_k[b] = k  # b is sorted, so the final write per block wins
    eob = np.flatnonzero(last_k < 63)
    add(eob * 512 + 4 * 63 + 3 + 4, 1, ac_tab[eob], np.zeros(len(eob), dtype=np.int64),
        np.zeros(len(eob), dtype=np.int64), np.zeros(len(eob), dtype=np.int64))

    key = np.concatenate(keys)
    order = np.argsort(key, kind="stable")
    kind = np.concatenate(kinds)[order]
    blocks_of = key[order] // 512
    return _Events(
        kind=kind,
        table=np.concatenate(tabs)[order],
        symbol=np.concatenate(syms)[order],
        extra=np.concatenate(extras)[order],
        extra_len=np.concatenate(elens)[order],
        interval=interval[blocks_of],
        n_intervals=n_intervals,
    )


def _extra_bits(v, s):
    return np.where(v < 0, v + (1 << s) - 1, v)


def _counts(events, kind, tid):
    sel = (events.kind == kind) & (events.table == tid)
    return np.bincount(events.symbol[sel], minlength=256)


def _encode_events(events, dc_tabs, ac_tabs):
    n = len(events.symbol)
    code = np.zeros(n, dtype=np.int64)
    length = np.zeros(n, dtype=np.int64)
    for kind, tabs in ((0, dc_tabs), (1, ac_tabs)):
        for tid, table in tabs.items():
            sel = (events.kind == kind) & (events.table == tid)
            if not sel.any():
                continue
            c, ln = encoder_arrays(table)
            syms = events.symbol[sel]
            missing = ln[syms] == 0
            if missing.any():
                name = "DC" if kind == 0 else "AC"
                raise MissingCode(
                    f"{name} table {tid} has no code for symbol 0x{int(syms[missing][0]):02X}")
            code[sel] = c[syms]
            length[sel] = ln[syms]

    value = (code << events.extra_len) | events.extra
    nbits = length + events.extra_len

    # Pad each restart interval to a byte boundary with 1-bits.
    per_interval = np.bincount(events.interval, weights=nbits,
                               minlength=events.n_intervals).astype(np.int64)
    pad = (-per_interval) % 8
    value = np.concatenate((value, (1 << pad) - 1))
    nbits = np.concatenate((nbits, pad))
    order = np.argsort(
        np.concatenate((events.interval, np.arange(events.n_intervals))), kind="stable")
    value = value[order]
    nbits = nbits[order]

    aligned = (value << (32 - nbits)).astype(">u4")
    bitmat = np.unpackbits(aligned.view(np.uint8).reshape(-1, 4), axis=1)
    mask = np.arange(32)[None, :] < nbits[:, None]
    packed = np.packbits(bitmat[mask]).tobytes()

    interval_bytes = (per_interval + pad) // 8
    out = bytearray()
    start = 0
    for i, size in enumerate(interval_bytes):
        if i:
            out += bytes([0xFF, 0xD0 + (i - 1) % 8])
        out += packed[start:start + size].replace(b"\xff", b"\xff\x00")
        start += size
    return bytes(out)
