"""Write the standard 512x512 grayscale Lena as lena.pgm.

Old scipy source releases shipped it as a pickled array (scipy/misc/lena.dat),
so the file can be recovered from PyPI without any other image host:

    python demos/fetch_lena.py sipi/
    JPEGRDH_SIPI_DIR=sipi pytest tests/test_acceptance.py

Pass --tarball to reuse an already downloaded scipy-0.16.1.tar.gz.
"""

import argparse
import hashlib
import io
import pickle
import re
import tarfile
import urllib.parse
import urllib.request
from pathlib import Path

import numpy as np
from PIL import Image

INDEX = "https://pypi.org/simple/scipy/"
SDIST = "scipy-0.16.1.tar.gz"
MEMBER = "scipy-0.16.1/scipy/misc/lena.dat"


def sdist_url():
    """(url, sha256) of the sdist, read from the package index page."""
    with urllib.request.urlopen(INDEX) as r:
        page = r.read().decode()
    m = re.search(r'href="([^"]*/%s)#sha256=([0-9a-f]{64})"' % re.escape(SDIST), page)
    if not m:
        raise SystemExit(f"{SDIST} not listed on {INDEX}")
    return urllib.parse.urljoin(INDEX, m.group(1)), m.group(2)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_dir")
    ap.add_argument("--tarball", help="local scipy-0.16.1.tar.gz")
    args = ap.parse_args()

    if args.tarball:
        blob = Path(args.tarball).read_bytes()
    else:
        url, digest = sdist_url()
        print(f"downloading {url}")
        with urllib.request.urlopen(url) as r:
            blob = r.read()
        if hashlib.sha256(blob).hexdigest() != digest:
            raise SystemExit("checksum mismatch")

    with tarfile.open(fileobj=io.BytesIO(blob), mode="r:gz") as tar:
        raw = tar.extractfile(MEMBER).read()
    # pickled under Python 2; latin1 keeps the numpy buffer bytes intact
    lena = np.asarray(pickle.loads(raw, encoding="latin1"))
    assert lena.shape == (512, 512), lena.shape

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    Image.fromarray(lena.astype(np.uint8)).save(out / "lena.pgm")
    print(f"wrote {out / 'lena.pgm'}")


if __name__ == "__main__":
    main()
