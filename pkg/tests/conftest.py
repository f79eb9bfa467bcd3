import io
import os
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from jpegrdh.bench import canonical_original
from jpegrdh.jpeg import Component, FrameInfo, HuffmanTable, JpegImage, PixelPlane
from jpegrdh.jpeg.tables import STD_AC_LUMA, STD_DC_LUMA

CORPUS_NAMES = ("astronaut", "brick", "camera", "grass", "gravel", "moon")


def _load(name):
    import skimage.color
    import skimage.data

    arr = getattr(skimage.data, name)()
    if arr.ndim == 3:
        arr = np.round(skimage.color.rgb2gray(arr) * 255).astype(np.uint8)
    return arr


@pytest.fixture(scope="session")
def corpus_planes():
    """Six 512x512 grayscale test images keyed by name."""
    return {name: PixelPlane.from_array(_load(name)) for name in CORPUS_NAMES}


@pytest.fixture(scope="session")
def canonical_corpus(corpus_planes):
    """``{(name, qf): (bytes, JpegImage)}`` in canonical form for QF 50/70/90."""
    return {(name, qf): canonical_original(plane, qf)
            for name, plane in corpus_planes.items() for qf in (50, 70, 90)}


@pytest.fixture(scope="session")
def pgm_dir(tmp_path_factory, corpus_planes):
    d = tmp_path_factory.mktemp("pgm")
    for name, plane in corpus_planes.items():
        Image.fromarray(plane.samples).save(d / f"{name}.pgm")
    return d


@pytest.fixture(scope="session")
def sipi_dir():
    """Optional directory of the standard test images as PGM (e.g. lena.pgm)."""
    d = os.environ.get("JPEGRDH_SIPI_DIR")
    return Path(d) if d else None


def pillow_jpeg(array, **kw):
    buf = io.BytesIO()
    Image.fromarray(array).save(buf, "JPEG", **kw)
    return buf.getvalue()


def random_image(rng, rows=4, cols=5, scale=3.0, nonzero=0.4, max_ac=200):
    """A grayscale JpegImage with Laplacian-distributed quantized coefficients."""
    coeffs = np.rint(rng.laplace(0, scale, size=(rows, cols, 64))).astype(np.int32)
    coeffs[..., 1:] *= rng.random((rows, cols, 63)) < nonzero
    coeffs[..., 1:] = np.clip(coeffs[..., 1:], -max_ac, max_ac)
    coeffs[..., 0] = rng.integers(-60, 60, size=(rows, cols))
    frame = FrameInfo(cols * 8, rows * 8, (Component(1, 1, 1, 0, 0, 0),))
    return JpegImage(
        frame=frame,
        quant_tables={0: np.full(64, 4)},
        dc_tables={0: HuffmanTable(*STD_DC_LUMA)},
        ac_tables={0: HuffmanTable(*STD_AC_LUMA)},
        coefficients=(coeffs,),
    )


# Names of the standard grayscale test images, looked up as <name>.pgm in JPEGRDH_SIPI_DIR.
SIPI_NAMES = ("lake", "lena", "mandrill", "jetplane", "boat", "elaine")


@pytest.fixture(scope="session")
def sipi_planes(sipi_dir):
    if sipi_dir is None:
        return {}
    from jpegrdh.jpeg import read_pgm
    return {n: read_pgm(sipi_dir / f"{n}.pgm") for n in SIPI_NAMES
            if (sipi_dir / f"{n}.pgm").exists()}


@pytest.fixture(scope="session")
def acceptance_planes(corpus_planes, sipi_planes):
    """The bundled corpus plus any standard images supplied through JPEGRDH_SIPI_DIR."""
    return {**corpus_planes, **sipi_planes}


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, collected from test properties."""
    lines = {}
    for outcome in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", ()))
            if "criterion" not in props or getattr(rep, "when", "call") != "call":
                continue
            lines.setdefault(props["criterion"], []).append(
                (outcome, props.get("title", ""), props.get("detail", "")))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(lines):
        parts = lines[cid]
        outcomes = {o for o, _, _ in parts}
        verdict = "FAIL" if "failed" in outcomes else "PASS" if "passed" in outcomes else "SKIP"
        title = parts[0][1]
        notes = "; ".join(f"{d}" + (" [skipped]" if o == "skipped" else "")
                          for o, _, d in parts if d)
        terminalreporter.write_line(f"criterion {cid} {verdict}: {title}" + (f" ({notes})" if notes else ""))
