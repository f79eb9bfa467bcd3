"""Capacity table for a PGM directory at QF 50/70/90, one row per image.

    python demos/capacity_table.py [PGM_DIR]

Without an argument the scikit-image sample photos are used.
"""

# %%
import sys
from pathlib import Path

import numpy as np
import skimage.color
import skimage.data

from jpegrdh.bench import TABLE_ORDER, canonical_original
from jpegrdh.jpeg import PixelPlane, read_pgm
from jpegrdh.rdh import capacity

QFS = (50, 70, 90)
SHORT = {"huang2016": "hs", "liu2018": "liu", "proposed": "prop"}


def bundled():
    for name in ("astronaut", "brick", "camera", "grass", "gravel", "moon"):
        arr = getattr(skimage.data, name)()
        if arr.ndim == 3:
            arr = np.round(skimage.color.rgb2gray(arr) * 255).astype(np.uint8)
        yield name, PixelPlane.from_array(arr)


def from_dir(path):
    for p in sorted(Path(path).glob("*.pgm")):
        yield p.stem, read_pgm(p)


images = from_dir(sys.argv[1]) if len(sys.argv) > 1 else bundled()

# %%
# Columns follow the usual layout: histogram shifting, Liu, proposed per QF.
header = ["image"] + [f"q{q}:{SHORT[s.value]}" for q in QFS for s in TABLE_ORDER]
print(" ".join(f"{h:>10}" for h in header))
for name, plane in images:
    row = [name]
    for q in QFS:
        _, img = canonical_original(plane, q)
        row += [capacity(img, s) for s in TABLE_ORDER]
    print(" ".join(f"{str(v):>10}" for v in row))
