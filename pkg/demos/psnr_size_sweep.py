"""PSNR and file-size growth against payload at QF 50, the data behind the usual two plots.

    python demos/psnr_size_sweep.py [PGM_DIR] [OUT_DIR]

Writes the bench CSVs to OUT_DIR (default ./sweep) and prints a compact view.
"""

# %%
import sys
import tempfile
from pathlib import Path

from PIL import Image

from jpegrdh.bench import BenchConfig, run_bench

if len(sys.argv) > 1 and sys.argv[1]:
    corpus = Path(sys.argv[1])
else:
    import skimage.data
    corpus = Path(tempfile.mkdtemp())
    for name in ("camera", "moon"):
        Image.fromarray(getattr(skimage.data, name)()).save(corpus / f"{name}.pgm")
out = Path(sys.argv[2]) if len(sys.argv) > 2 else Path("sweep")

# %%
# Ten payload points per image, 10% to 100% of the histogram-shifting
# capacity, so every scheme is measured at the same payloads.
rows = run_bench(BenchConfig(corpus, out, quality_factors=(50,), seed=0))

# %%
table = {}
for r in rows:
    table.setdefault((r["image"], r["payload_bits"]), {})[r["scheme"]] = r

print(f"{'image':>10} {'bits':>7} | {'PSNR dB: huang':>14} {'proposed':>9} {'liu':>7} "
      f"| {'+bytes: huang':>13} {'proposed':>9} {'liu':>7}")
for (image, bits), by in sorted(table.items()):
    h, p, l = by["huang2016"], by["proposed"], by["liu2018"]
    print(f"{image:>10} {bits:>7} | {float(h['psnr_db']):>14.2f} {float(p['psnr_db']):>9.2f} "
          f"{float(l['psnr_db']):>7.2f} | {h['size_increase_bytes']:>13} "
          f"{p['size_increase_bytes']:>9} {l['size_increase_bytes']:>7}")
print(f"\nCSV files in {out}/")
