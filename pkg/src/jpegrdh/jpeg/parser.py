"""Baseline JPEG bitstream parser producing quantized coefficient planes."""

import re
import struct

import numpy as np

from ..errors import (InvalidHuffmanCode, MarkerSyntaxError, TruncatedStream,
                      UnsupportedFormat)
from .huffman import decoder_lut
from .model import Component, FrameInfo, HuffmanTable, JpegImage

SOI, EOI, SOS, DQT, DHT, DRI, SOF0, COM, DNL = (
    0xD8, 0xD9, 0xDA, 0xDB, 0xC4, 0xDD, 0xC0, 0xFE, 0xDC)

_UNSUPPORTED_SOF = {
    0xC1: "extended sequential", 0xC2: "progressive", 0xC3: "lossless",
    0xC5: "differential sequential", 0xC6: "differential progressive",
    0xC7: "differential lossless", 0xC9: "arithmetic sequential",
    0xCA: "arithmetic progressive", 0xCB: "arithmetic lossless",
    0xCD: "arithmetic differential sequential",
    0xCE: "arithmetic differential progressive",
    0xCF: "arithmetic differential lossless",
}

# First byte of a marker that ends entropy-coded data: 0xFF not followed by a
# stuffed zero or an RSTn code.
_SCAN_END = re.compile(rb"\xff(?![\x00\xd0-\xd7])", re.DOTALL)
_RST = re.compile(rb"\xff[\xd0-\xd7]")


def parse_jpeg(data):
    """Parse a baseline sequential Huffman JPEG into a :class:`JpegImage`.

    Coefficients are returned exactly as entropy coded (no dequantization).
    Raises a :class:`~jpegrdh.errors.JpegError` subclass naming the byte
    offset of the problem.
    """
    data = bytes(data)
    if data[:2] != b"\xff\xd8":
        raise MarkerSyntaxError("missing SOI marker", 0)

    quant, dc_tabs, ac_tabs = {}, {}, {}
    app_segments = []
    frame = None
    restart_interval = 0
    planes = None
    table_choice = {}
    scanned = set()
    pos = 2
    n = len(data)

    while True:
        if pos >= n:
            raise TruncatedStream("stream ended before EOI", pos)
        if data[pos] != 0xFF:
            raise MarkerSyntaxError(f"expected marker, found byte 0x{data[pos]:02X}", pos)
        marker_at = pos
        while pos < n and data[pos] == 0xFF:
            pos += 1
        if pos >= n:
            raise TruncatedStream("stream ended inside marker", marker_at)
        marker = data[pos]
        pos += 1

        if marker == EOI:
            break
        if marker in (0x00, 0x01) or 0xD0 <= marker <= 0xD7:
            raise MarkerSyntaxError(f"unexpected marker 0xFF{marker:02X}", marker_at)

        seg_start = pos + 2
        if pos + 2 > n:
            raise TruncatedStream("segment length cut off", pos)
        length = struct.unpack_from(">H", data, pos)[0]
        if length < 2:
            raise MarkerSyntaxError("segment length below 2", pos)
        seg_end = pos + length
        if seg_end > n:
            raise TruncatedStream(f"segment 0xFF{marker:02X} runs past end of data", marker_at)
        seg = data[seg_start:seg_end]
        pos = seg_end

        if 0xE0 <= marker <= 0xEF or marker == COM:
            app_segments.append((marker, seg))
        elif marker == DQT:
            _read_dqt(seg, seg_start, quant)
        elif marker == DHT:
            _read_dht(seg, seg_start, dc_tabs, ac_tabs)
        elif marker == DRI:
            if len(seg) != 2:
                raise MarkerSyntaxError("DRI segment must be 4 bytes", marker_at)
            restart_interval = struct.unpack(">H", seg)[0]
        elif marker == SOF0:
            if frame is not None:
                raise MarkerSyntaxError("second SOF marker", marker_at)
            frame = _read_sof(seg, seg_start)
            planes = [np.zeros((*frame.block_grid(i), 64), dtype=np.int32)
                      for i in range(len(frame.components))]
        elif marker in _UNSUPPORTED_SOF:
            raise UnsupportedFormat(
                f"{_UNSUPPORTED_SOF[marker]} JPEG (SOF 0xFF{marker:02X}) is not supported",
                marker_at)
        elif marker == 0xCC:
            raise UnsupportedFormat("arithmetic coding (DAC) is not supported", marker_at)
        elif marker == DNL:
            raise UnsupportedFormat("DNL-defined image height is not supported", marker_at)
        elif marker == SOS:
            if frame is None:
                raise MarkerSyntaxError("SOS before SOF", marker_at)
            scan = _read_sos(seg, seg_start, frame)
            for ci, td, ta in scan:
                if td not in dc_tabs or ta not in ac_tabs:
                    raise MarkerSyntaxError(
                        f"scan references undefined Huffman table (DC {td}, AC {ta})", seg_start)
                table_choice[ci] = (td, ta)
                scanned.add(ci)
            pos = _decode_scan(data, pos, frame, scan, dc_tabs, ac_tabs,
                               restart_interval, planes)
        elif 0xF0 <= marker <= 0xFD or marker in (0xDE, 0xDF):
            # JPGn / DHP / EXP carry nothing a baseline decoder needs.
            continue
        else:
            raise MarkerSyntaxError(f"unexpected marker 0xFF{marker:02X}", marker_at)

    if frame is None:
        raise MarkerSyntaxError("no SOF0 frame header", pos)
    missing = set(range(len(frame.components))) - scanned
    if missing:
        raise MarkerSyntaxError(f"components {sorted(missing)} never scanned", pos)
    for c in frame.components:
        if c.quant_id not in quant:
            raise MarkerSyntaxError(f"quantization table {c.quant_id} undefined", pos)

    comps = tuple(
        Component(c.id, c.h, c.v, c.quant_id, *table_choice[i])
        for i, c in enumerate(frame.components))
    frame = FrameInfo(frame.width, frame.height, comps, frame.precision)
    return JpegImage(
        frame=frame,
        quant_tables=quant,
        dc_tables=dc_tabs,
        ac_tables=ac_tabs,
        coefficients=tuple(planes),
        restart_interval=restart_interval,
        app_segments=tuple(app_segments),
    )


def _read_dqt(seg, offset, quant):
    i = 0
    while i < len(seg):
        pq, tq = seg[i] >> 4, seg[i] & 15
        if pq > 1 or tq > 3:
            raise MarkerSyntaxError(f"bad DQT precision/id {pq}/{tq}", offset + i)
        size = 64 * (pq + 1)
        body = seg[i + 1:i + 1 + size]
        if len(body) != size:
            raise MarkerSyntaxError("DQT table cut short", offset + i)
        table = np.frombuffer(body, dtype=">u2" if pq else np.uint8).astype(np.int64)
        if table.min() == 0:
            raise MarkerSyntaxError("zero quantization divisor", offset + i)
        quant[tq] = table
        i += 1 + size


def _read_dht(seg, offset, dc_tabs, ac_tabs):
    i = 0
    while i < len(seg):
        if i + 17 > len(seg):
            raise MarkerSyntaxError("DHT header cut short", offset + i)
        tc, th = seg[i] >> 4, seg[i] & 15
        if tc > 1 or th > 3:
            raise MarkerSyntaxError(f"bad DHT class/id {tc}/{th}", offset + i)
        bits = tuple(seg[i + 1:i + 17])
        count = sum(bits)
        values = tuple(seg[i + 17:i + 17 + count])
        if len(values) != count or count > 256:
            raise MarkerSyntaxError("DHT symbol list cut short", offset + i)
        table = HuffmanTable(bits, values)
        (ac_tabs if tc else dc_tabs)[th] = table
        i += 17 + count


def _read_sof(seg, offset):
    if len(seg) < 6:
        raise MarkerSyntaxError("SOF segment too short", offset)
    precision, height, width, nf = struct.unpack_from(">BHHB", seg)
    if precision != 8:
        raise UnsupportedFormat(f"{precision}-bit sample precision is not supported", offset)
    if height == 0:
        raise UnsupportedFormat("DNL-defined image height is not supported", offset)
    if width == 0 or nf == 0 or nf > 4 or len(seg) != 6 + 3 * nf:
        raise MarkerSyntaxError("malformed SOF segment", offset)
    comps = []
    for k in range(nf):
        cid, hv, tq = seg[6 + 3 * k:9 + 3 * k]
        h, v = hv >> 4, hv & 15
        if not (1 <= h <= 4 and 1 <= v <= 4) or tq > 3:
            raise MarkerSyntaxError(f"bad sampling/quant id for component {cid}", offset + 6 + 3 * k)
        comps.append(Component(cid, h, v, tq))
    if len({c.id for c in comps}) != nf:
        raise MarkerSyntaxError("duplicate component id", offset)
    return FrameInfo(width, height, tuple(comps), precision)


def _read_sos(seg, offset, frame):
    if not seg:
        raise MarkerSyntaxError("empty SOS segment", offset)
    ns = seg[0]
    if not 1 <= ns <= 4 or len(seg) != 4 + 2 * ns:
        raise MarkerSyntaxError("malformed SOS segment", offset)
    ids = [c.id for c in frame.components]
    scan = []
    for k in range(ns):
        cid, tables = seg[1 + 2 * k], seg[2 + 2 * k]
        if cid not in ids:
            raise MarkerSyntaxError(f"scan names unknown component {cid}", offset + 1 + 2 * k)
        scan.append((ids.index(cid), tables >> 4, tables & 15))
    ss, se, ahal = seg[1 + 2 * ns:4 + 2 * ns]
    if (ss, se, ahal) != (0, 63, 0):
        raise UnsupportedFormat("spectral selection / successive approximation scan", offset)
    if ns > 1 and sum(frame.components[ci].h * frame.components[ci].v for ci, _, _ in scan) > 10:
        raise MarkerSyntaxError("more than 10 blocks per MCU", offset)
    return scan


def scan_block_order(frame, comp_indices):
    """Blocks of one scan in coding order.

    Returns arrays ``(comp, row, col, mcu)`` of equal length; ``comp`` holds
    frame component indices and ``mcu`` the MCU number each block belongs to.
    """
    if len(comp_indices) == 1:
        ci = comp_indices[0]
        rows, cols = frame.coded_blocks(ci)
        r, c = np.divmod(np.arange(rows * cols), cols)
        return np.full(rows * cols, ci), r, c, np.arange(rows * cols)
    comp, dy, dx = [], [], []
    for ci in comp_indices:
        cc = frame.components[ci]
        for v in range(cc.v):
            for h in range(cc.h):
                comp.append(ci)
                dy.append(v)
                dx.append(h)
    comp, dy, dx = map(np.asarray, (comp, dy, dx))
    per_mcu = len(comp)
    hs = np.array([frame.components[ci].h for ci in comp])
    vs = np.array([frame.components[ci].v for ci in comp])
    n_mcu = frame.mcu_rows * frame.mcu_cols
    my, mx = np.divmod(np.arange(n_mcu), frame.mcu_cols)
    row = (my[:, None] * vs[None, :] + dy[None, :]).ravel()
    col = (mx[:, None] * hs[None, :] + dx[None, :]).ravel()
    return (np.tile(comp, n_mcu), row, col,
            np.repeat(np.arange(n_mcu), per_mcu))


def _decode_scan(data, start, frame, scan, dc_tabs, ac_tabs, restart_interval, planes):
    m = _SCAN_END.search(data, start)
    if m is None:
        raise TruncatedStream("entropy-coded data not terminated by a marker", start)
    end = m.start()
    if end + 1 >= len(data):
        raise TruncatedStream("stream ends inside scan", end)

    comp_indices = [ci for ci, _, _ in scan]
    comp, row, col, mcu = scan_block_order(frame, comp_indices)
    n_mcu = int(mcu[-1]) + 1
    slot = {ci: k for k, ci in enumerate(comp_indices)}
    comp_slot = [slot[int(c)] for c in comp]
    dc_luts = [decoder_lut(dc_tabs[td]) for _, td, _ in scan]
    ac_luts = [decoder_lut(ac_tabs[ta]) for _, _, ta in scan]

    # Interval boundaries: each entry is (raw offset of first byte, raw end).
    pieces = []
    cursor = start
    expected = 0
    for rst in _RST.finditer(data, start, end):
        if restart_interval == 0:
            raise MarkerSyntaxError("RST marker without DRI", rst.start())
        if data[rst.start() + 1] != 0xD0 + expected:
            raise MarkerSyntaxError(
                f"RST{data[rst.start() + 1] - 0xD0} out of sequence (expected RST{expected})",
                rst.start())
        expected = (expected + 1) % 8
        pieces.append((cursor, rst.start()))
        cursor = rst.end()
    pieces.append((cursor, end))

    mcu_per_interval = restart_interval or n_mcu
    n_intervals = -(-n_mcu // mcu_per_interval)
    if len(pieces) != n_intervals:
        raise MarkerSyntaxError(
            f"scan has {len(pieces)} restart intervals, expected {n_intervals}", start)

    out = [0] * (len(comp) * 64)
    blocks_per_mcu = len(comp) // n_mcu
    blocks_per_interval = mcu_per_interval * blocks_per_mcu
    for k, (lo, hi) in enumerate(pieces):
        b0 = k * blocks_per_interval
        b1 = min(len(comp), b0 + blocks_per_interval)
        _decode_interval(data, lo, hi, comp_slot, b0, b1, len(scan),
                         dc_luts, ac_luts, out)

    coeffs = np.array(out, dtype=np.int32).reshape(-1, 64)
    for ci in comp_indices:
        sel = comp == ci
        planes[ci][row[sel], col[sel]] = coeffs[sel]
    return end


def _raw_offset(data, lo, unstuffed_index):
    """Map an index into unstuffed interval bytes back to a file offset."""
    pos = lo
    for _ in range(unstuffed_index):
        pos += 2 if data[pos] == 0xFF else 1
    return pos


def _decode_interval(data, lo, hi, comp_slot, b0, b1, n_slots, dc_luts, ac_luts, out):
    raw = data[lo:hi]
    buf = raw.replace(b"\xff\x00", b"\xff")
    nbits = len(buf) * 8
    buf += b"\x00" * 8
    from_bytes = int.from_bytes
    pred = [0] * n_slots
    pos = 0

    for b in range(b0, b1):
        slot = comp_slot[b]
        base = b * 64

        q = pos >> 3
        w = ((from_bytes(buf[q:q + 5], "big") << (pos & 7)) >> 8) & 0xFFFFFFFF
        e = dc_luts[slot][w >> 16]
        if not e:
            raise InvalidHuffmanCode("no DC code matches", _raw_offset(data, lo, q))
        n = e >> 8
        s = e & 0xFF
        if s > 11:
            raise InvalidHuffmanCode(f"DC size category {s} out of range", _raw_offset(data, lo, q))
        if s:
            v = (w >> (32 - n - s)) & ((1 << s) - 1)
            if v < (1 << (s - 1)):
                v -= (1 << s) - 1
            pred[slot] += v
        pos += n + s
        out[base] = pred[slot]

        k = 1
        ac = ac_luts[slot]
        while k < 64:
            q = pos >> 3
            w = ((from_bytes(buf[q:q + 5], "big") << (pos & 7)) >> 8) & 0xFFFFFFFF
            e = ac[w >> 16]
            if not e:
                raise InvalidHuffmanCode("no AC code matches", _raw_offset(data, lo, q))
            n = e >> 8
            rs = e & 0xFF
            s = rs & 15
            if s:
                k += rs >> 4
                if k > 63 or s > 10:
                    raise InvalidHuffmanCode("AC run/size exceeds block", _raw_offset(data, lo, q))
                v = (w >> (32 - n - s)) & ((1 << s) - 1)
                if v < (1 << (s - 1)):
                    v -= (1 << s) - 1
                out[base + k] = v
                k += 1
                pos += n + s
            elif rs == 0xF0:
                k += 16
                pos += n
            elif rs == 0:
                pos += n
                break
            else:
                raise InvalidHuffmanCode(f"invalid AC symbol 0x{rs:02X}", _raw_offset(data, lo, q))
        if k > 64:
            raise InvalidHuffmanCode("ZRL run past end of block", _raw_offset(data, lo, pos >> 3))

        if pos > nbits:
            raise TruncatedStream("entropy-coded segment ended mid-block", hi)
