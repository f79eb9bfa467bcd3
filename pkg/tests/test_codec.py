import io
import struct

import numpy as np
import pytest
from PIL import Image

from conftest import pillow_jpeg, random_image
from jpegrdh.errors import (CategoryOverflow, InvalidHuffmanCode, MarkerSyntaxError,
                            MissingCode, TruncatedStream, UnsupportedFormat)
from jpegrdh.jpeg import (Component, FrameInfo, HuffmanTable, JpegImage, PixelPlane,
                          TablePolicy, decode_to_pixels, encode_from_pixels,
                          parse_jpeg, serialize_jpeg)
from jpegrdh.jpeg.tables import STD_LUMA_QUANT, ZIGZAG
from jpegrdh.jpeg.writer import _encode_events, _symbol_events
from jpegrdh.jpeg.huffman import optimal_table


@pytest.fixture(scope="module")
def gray(corpus_planes):
    return corpus_planes["camera"].samples


@pytest.fixture(scope="module")
def color():
    import skimage.data
    return skimage.data.astronaut()


def _find_marker(data, marker):
    return data.index(bytes([0xFF, marker]))


# -- parsing -------------------------------------------------------------

def test_grid_dimensions(canonical_corpus):
    _, img = canonical_corpus[("camera", 50)]
    assert img.coefficients[0].shape == (64, 64, 64)
    assert img.frame.width == img.frame.height == 512


def test_odd_size_grid():
    arr = np.random.default_rng(0).integers(0, 256, size=(37, 50), dtype=np.uint8)
    img = parse_jpeg(pillow_jpeg(arr, quality=80))
    assert img.coefficients[0].shape == (5, 7, 64)


def test_420_grid_is_mcu_padded(color):
    img = parse_jpeg(pillow_jpeg(color[:100, :100], quality=80, subsampling=2))
    assert [p.shape[:2] for p in img.coefficients] == [(14, 14), (7, 7), (7, 7)]
    assert img.frame.component_size(1) == (50, 50)


def test_coefficients_immutable(canonical_corpus):
    _, img = canonical_corpus[("moon", 50)]
    with pytest.raises(ValueError):
        img.coefficients[0][0, 0, 0] = 1


def test_progressive_rejected(color):
    data = pillow_jpeg(color, progressive=True)
    with pytest.raises(UnsupportedFormat) as exc:
        parse_jpeg(data)
    assert exc.value.offset == _find_marker(data, 0xC2)


@pytest.mark.parametrize("sof", [0xC1, 0xC3, 0xC9, 0xCA])
def test_other_sof_rejected(gray, sof):
    data = bytearray(pillow_jpeg(gray))
    at = _find_marker(data, 0xC0)
    data[at + 1] = sof
    with pytest.raises(UnsupportedFormat):
        parse_jpeg(bytes(data))


def test_12_bit_rejected(gray):
    data = bytearray(pillow_jpeg(gray))
    at = _find_marker(data, 0xC0)
    data[at + 4] = 12
    with pytest.raises(UnsupportedFormat):
        parse_jpeg(bytes(data))


def test_missing_soi():
    with pytest.raises(MarkerSyntaxError) as exc:
        parse_jpeg(b"\x00\x00\xff\xd9")
    assert exc.value.offset == 0


def test_garbage_between_segments(gray):
    data = pillow_jpeg(gray)
    at = _find_marker(data, 0xDB)
    bad = data[:at] + b"\x42" + data[at:]
    with pytest.raises(MarkerSyntaxError) as exc:
        parse_jpeg(bad)
    assert exc.value.offset == at


@pytest.mark.parametrize("cut", [3, 25, 400, 5000])
def test_truncated(canonical_corpus, cut):
    data, _ = canonical_corpus[("camera", 50)]
    with pytest.raises(TruncatedStream) as exc:
        parse_jpeg(data[:cut])
    assert exc.value.offset is not None


def test_truncated_scan_missing_eoi(canonical_corpus):
    data, _ = canonical_corpus[("camera", 50)]
    with pytest.raises(TruncatedStream):
        parse_jpeg(data[:-2])


def _tiny_tables_image(coeffs):
    one_code = HuffmanTable((1,) + (0,) * 15, (0,))
    frame = FrameInfo(8 * coeffs.shape[1], 8 * coeffs.shape[0], (Component(1, 1, 1, 0, 0, 0),))
    return JpegImage(frame, {0: np.ones(64)}, {0: one_code}, {0: one_code}, (coeffs,))


def test_invalid_huffman_code():
    img = _tiny_tables_image(np.zeros((2, 2, 64), dtype=np.int32))
    data = serialize_jpeg(img, TablePolicy.PRESERVE)
    start = data.index(b"\xff\xda") + 2 + 8
    # First scan byte becomes 0xFF (stuffed): a leading 1 bit has no code.
    bad = data[:start] + b"\xff\x00" + data[start + 1:]
    with pytest.raises(InvalidHuffmanCode) as exc:
        parse_jpeg(bad)
    assert exc.value.offset == start


def test_undefined_huffman_table(gray):
    data = pillow_jpeg(gray)
    at = _find_marker(data, 0xC4)
    length = struct.unpack_from(">H", data, at + 2)[0]
    first_dht_dropped = data[:at] + data[at + 2 + length:]
    with pytest.raises(MarkerSyntaxError):
        parse_jpeg(first_dht_dropped)


def test_restart_sequence_checked(color):
    data = bytearray(pillow_jpeg(color, quality=75, restart_marker_blocks=2))
    sos = _find_marker(data, 0xDA)
    rst = data.index(b"\xff\xd1", sos)
    data[rst + 1] = 0xD5
    with pytest.raises(MarkerSyntaxError) as exc:
        parse_jpeg(bytes(data))
    assert exc.value.offset == rst


# -- serialization ----------------------------------------------------------

@pytest.mark.parametrize("kw", [
    dict(),
    dict(quality=90),
    dict(quality=30, subsampling=0),
    dict(quality=75, subsampling=2),
    dict(quality=75, restart_marker_blocks=3),
    dict(quality=60, restart_marker_rows=1, subsampling=2),
])
@pytest.mark.parametrize("source", ["gray", "color"])
def test_optimal_tables_match_libjpeg(request, source, kw):
    """libjpeg's optimize=True uses the same K.2 procedure and segment order."""
    arr = request.getfixturevalue(source)
    data = pillow_jpeg(arr, optimize=True, **kw)
    assert serialize_jpeg(parse_jpeg(data), TablePolicy.OPTIMAL) == data


@pytest.mark.parametrize("policy", list(TablePolicy))
def test_parse_serialize_parse_identity(color, policy):
    img = parse_jpeg(pillow_jpeg(color, quality=85, subsampling=2))
    again = parse_jpeg(serialize_jpeg(img, policy))
    assert again.same_coefficients(img)
    assert again.frame == img.frame
    assert all(np.array_equal(again.quant_tables[k], img.quant_tables[k]) for k in img.quant_tables)


@pytest.mark.parametrize("policy", list(TablePolicy))
def test_canonical_fixpoint(canonical_corpus, policy):
    data, _ = canonical_corpus[("grass", 70)]
    once = serialize_jpeg(parse_jpeg(data), policy)
    twice = serialize_jpeg(parse_jpeg(once), policy)
    assert once == twice
    if policy is TablePolicy.OPTIMAL:
        assert once == data


def test_preserve_keeps_tables(gray):
    data = pillow_jpeg(gray, quality=75)
    img = parse_jpeg(data)
    out = parse_jpeg(serialize_jpeg(img, TablePolicy.PRESERVE))
    assert out.dc_tables[0] == img.dc_tables[0]
    assert out.ac_tables[0] == img.ac_tables[0]


def test_optimal_not_larger_than_standard_tables(canonical_corpus):
    _, img = canonical_corpus[("brick", 50)]
    std = encode_from_pixels(PixelPlane.from_array(decode_to_pixels(img)[0].samples), 50)
    assert len(serialize_jpeg(std, "optimal")) < len(serialize_jpeg(std, "preserve"))


def test_app_segments_preserved():
    rng = np.random.default_rng(1)
    img = random_image(rng)
    segs = ((0xE0, b"JFIF\x00\x01\x02\x00\x00\x01\x00\x01\x00\x00"), (0xFE, b"hello"),
            (0xE1, b"Exif\x00\x00junk"))
    img = JpegImage(img.frame, img.quant_tables, img.dc_tables, img.ac_tables,
                    img.coefficients, app_segments=segs)
    back = parse_jpeg(serialize_jpeg(img))
    assert back.app_segments == segs


def test_restart_interval_roundtrip():
    img = random_image(np.random.default_rng(2), rows=5, cols=7)
    for ri in (1, 2, 7, 9, 100):
        with_ri = JpegImage(img.frame, img.quant_tables, img.dc_tables, img.ac_tables,
                            img.coefficients, restart_interval=ri)
        data = serialize_jpeg(with_ri)
        back = parse_jpeg(data)
        assert back.restart_interval == ri
        assert back.same_coefficients(img)
        # an independent decoder accepts the restart markers
        ref = np.asarray(Image.open(io.BytesIO(data)))
        assert np.abs(ref.astype(int) - decode_to_pixels(back)[0].samples).max() <= 1


def test_ac_1024_overflows():
    img = random_image(np.random.default_rng(3))
    planes = [img.coefficients[0].copy()]
    planes[0][1, 2, 17] = 1024
    with pytest.raises(CategoryOverflow):
        serialize_jpeg(img.with_coefficients(planes))
    planes[0][1, 2, 17] = -1023
    parse_jpeg(serialize_jpeg(img.with_coefficients(planes)))


def test_dc_difference_overflow():
    img = random_image(np.random.default_rng(3), rows=1, cols=2)
    planes = [img.coefficients[0].copy()]
    planes[0][0, 0, 0] = -1100
    planes[0][0, 1, 0] = 1000
    with pytest.raises(CategoryOverflow):
        serialize_jpeg(img.with_coefficients(planes))


def test_missing_code_under_preserve():
    coeffs = np.zeros((2, 2, 64), dtype=np.int32)
    img = _tiny_tables_image(coeffs)
    serialize_jpeg(img, TablePolicy.PRESERVE)
    coeffs[1, 1, 5] = 3
    with pytest.raises(MissingCode):
        serialize_jpeg(_tiny_tables_image(coeffs), TablePolicy.PRESERVE)
    assert parse_jpeg(serialize_jpeg(_tiny_tables_image(coeffs))).same_coefficients(
        _tiny_tables_image(coeffs))


def test_long_zero_runs():
    coeffs = np.zeros((1, 3, 64), dtype=np.int32)
    coeffs[0, 0, 63] = 5          # run of 62 zeros: three ZRLs
    coeffs[0, 1, [1, 17, 34, 51]] = [1, -1, 2, -2]   # runs of exactly 15 and 16
    coeffs[0, 2, 16] = 7          # trailing zeros longer than 16 end with EOB
    frame = FrameInfo(24, 8, (Component(1, 1, 1, 0, 0, 0),))
    img = JpegImage(frame, {0: np.ones(64)}, {}, {}, (coeffs,))
    assert parse_jpeg(serialize_jpeg(img)).same_coefficients(img)


def _scan_bytes(image):
    """Entropy-coded bytes and optimal tables for a single-component image."""
    events = _symbol_events(image)
    dc = optimal_table(np.bincount(events.symbol[events.kind == 0], minlength=256))
    ac = optimal_table(np.bincount(events.symbol[events.kind == 1], minlength=256))
    return _encode_events(events, {0: dc}, {0: ac}), dc, ac


def test_non_interleaved_multi_scan(color):
    """A 4:2:0 file coded as three separate scans (hand-assembled)."""
    base = parse_jpeg(pillow_jpeg(color[:100, :100], quality=80, subsampling=2))
    segs = [b"\xff\xd8"]
    for tid in sorted(base.quant_tables):
        segs.append(b"\xff\xdb" + struct.pack(">H", 67) + bytes([tid])
                    + base.quant_tables[tid].astype(np.uint8).tobytes())
    sof = struct.pack(">BHHB", 8, 100, 100, 3)
    for c in base.frame.components:
        sof += bytes([c.id, c.h << 4 | c.v, c.quant_id])
    segs.append(b"\xff\xc0" + struct.pack(">H", len(sof) + 2) + sof)
    expected = []
    for i, c in enumerate(base.frame.components):
        rows, cols = base.frame.coded_blocks(i)
        plane = base.coefficients[i][:rows, :cols]
        expected.append(plane)
        single = JpegImage(FrameInfo(cols * 8, rows * 8, (Component(c.id, 1, 1, 0),)),
                           {0: np.ones(64)}, {}, {}, (plane,))
        data, dc, ac = _scan_bytes(single)
        for cls, t in ((0, dc), (1, ac)):
            body = bytes([cls << 4 | 0, *t.bits, *t.values])
            segs.append(b"\xff\xc4" + struct.pack(">H", len(body) + 2) + body)
        segs.append(b"\xff\xda" + struct.pack(">HB", 8, 1) + bytes([c.id, 0x00, 0, 63, 0]))
        segs.append(data)
    segs.append(b"\xff\xd9")
    img = parse_jpeg(b"".join(segs))
    for i, plane in enumerate(expected):
        rows, cols = plane.shape[:2]
        assert np.array_equal(img.coefficients[i][:rows, :cols], plane)
        assert not img.coefficients[i][rows:].any() and not img.coefficients[i][:, cols:].any()
    # re-serialized as one interleaved scan, the planes survive unchanged
    assert parse_jpeg(serialize_jpeg(img)).same_coefficients(img)


# -- pixel decoding -----------------------------------------------------------

def _single_block(coeffs, q=1):
    frame = FrameInfo(8, 8, (Component(1, 1, 1, 0),))
    return JpegImage(frame, {0: np.full(64, q)}, {}, {},
                     (np.asarray(coeffs, dtype=np.int32).reshape(1, 1, 64),))


def test_zero_block_decodes_to_128():
    out = decode_to_pixels(_single_block(np.zeros(64)))[0]
    assert (out.width, out.height) == (8, 8)
    assert np.all(out.samples == 128)


def test_dc_only_block():
    # orthonormal DCT-III: every sample = DC / 8
    coeffs = np.zeros(64)
    coeffs[0] = 8
    assert np.all(decode_to_pixels(_single_block(coeffs))[0].samples == 129)
    coeffs[0] = -1024
    assert np.all(decode_to_pixels(_single_block(coeffs))[0].samples == 0)


def test_single_ac_basis_function():
    # natural (0, 1) coefficient of value 16: f(y, x) = 16 * (1/sqrt(8)) * (1/2) * cos((2x+1) pi / 16)
    coeffs = np.zeros(64)
    coeffs[1] = 16
    got = decode_to_pixels(_single_block(coeffs))[0].samples.astype(float)
    x = np.arange(8)
    row = 128 + 16 / np.sqrt(8) / 2 * np.cos((2 * x + 1) * np.pi / 16)
    expected = np.sign(row) * np.floor(np.abs(row) + 0.5)
    assert np.array_equal(got, np.tile(expected, (8, 1)))


def test_rounding_half_away_from_zero():
    # DC = 4 with q = 1 puts every sample at exactly 128.5
    coeffs = np.zeros(64)
    coeffs[0] = 4
    assert np.all(decode_to_pixels(_single_block(coeffs))[0].samples == 129)


def test_pixels_match_reference_decoder_gray(canonical_corpus):
    for (name, qf), (data, img) in canonical_corpus.items():
        ref = np.asarray(Image.open(io.BytesIO(data)))
        ours = decode_to_pixels(img)[0].samples
        assert np.abs(ref.astype(int) - ours).max() <= 1, (name, qf)


@pytest.mark.parametrize("subsampling", [0, 2])
def test_pixels_match_reference_decoder_luma(color, subsampling):
    data = pillow_jpeg(color[:203, :311], quality=80, subsampling=subsampling)
    im = Image.open(io.BytesIO(data))
    im.draft("YCbCr", im.size)
    ref = np.asarray(im)[..., 0]
    planes = decode_to_pixels(parse_jpeg(data))
    assert planes[0].samples.shape == (203, 311)
    assert np.abs(ref.astype(int) - planes[0].samples).max() <= 1
    if subsampling == 2:
        assert planes[1].samples.shape == (102, 156)


# -- encoding -----------------------------------------------------------------

def test_encode_q50_tables(corpus_planes):
    img = encode_from_pixels(corpus_planes["moon"], 50)
    assert np.array_equal(img.quant_tables[0], STD_LUMA_QUANT[ZIGZAG])


def test_encode_q100_tables(corpus_planes):
    img = encode_from_pixels(corpus_planes["moon"], 100)
    assert img.quant_tables[0].min() >= 1
    assert parse_jpeg(serialize_jpeg(img)).same_coefficients(img)


@pytest.mark.parametrize("q", [1, 25, 50, 75, 100])
@pytest.mark.parametrize("level", [128, 77])
def test_uniform_image_has_no_ac(q, level):
    plane = PixelPlane.from_array(np.full((24, 40), level, dtype=np.uint8))
    img = encode_from_pixels(plane, q)
    assert not img.coefficients[0][..., 1:].any()
    if level == 128:
        assert not img.coefficients[0].any()


def test_encode_is_close_to_source(corpus_planes):
    src = corpus_planes["camera"]
    img = encode_from_pixels(src, 90)
    back = decode_to_pixels(img)[0].samples.astype(float)
    mse = np.mean((back - src.samples) ** 2)
    assert 10 * np.log10(255 ** 2 / mse) > 35


def test_encode_partial_blocks_edge_replicated():
    arr = np.tile(np.arange(13, dtype=np.uint8) * 10, (11, 1))
    img = encode_from_pixels(PixelPlane.from_array(arr), 95)
    assert img.coefficients[0].shape == (2, 2, 64)
    back = decode_to_pixels(img)[0].samples
    assert back.shape == (11, 13)
    assert np.abs(back.astype(int) - arr).max() <= 6
