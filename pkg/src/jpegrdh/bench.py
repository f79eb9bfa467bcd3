"""Benchmark harness: capacity table and PSNR / file-size sweeps over a PGM corpus."""

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field
import json
import logging
import math
from pathlib import Path

import numpy as np

from .errors import JpegError, RdhError, VerificationError
from .jpeg import (TablePolicy, decode_to_pixels, encode_from_pixels, parse_jpeg,
                   read_pgm, serialize_jpeg)
from .metrics import measure
from .payload import HEADER_BITS, PRNG_NAME, random_payload
from .rdh import SCHEMES, Scheme, capacity, embed_image, extract_image

log = logging.getLogger(__name__)

RESULT_COLUMNS = (
    "image", "qf", "scheme", "payload_bits", "capacity_bits", "psnr_db",
    "orig_bytes", "marked_bytes", "size_increase_bytes", "coeffs_modified", "error",
)
# Column order of the capacity table: histogram shifting, Liu, proposed.
TABLE_ORDER = (Scheme.HUANG2016, Scheme.LIU2018, Scheme.PROPOSED)
DEFAULT_FRACTIONS = tuple(round(0.1 * i, 1) for i in range(1, 11))


@dataclass
class BenchConfig:
    corpus_dir: Path
    out_dir: Path
    quality_factors: tuple = (50, 70, 90)
    payload_fractions: tuple = DEFAULT_FRACTIONS
    payload_bits: tuple = ()
    seed: int = 0
    schemes: tuple = SCHEMES
    table_policy: TablePolicy = TablePolicy.OPTIMAL
    psnr_ref: str = "jpeg"
    jobs: int = 1
    images: tuple = field(default_factory=tuple)

    def __post_init__(self):
        self.corpus_dir = Path(self.corpus_dir)
        self.out_dir = Path(self.out_dir)
        self.quality_factors = tuple(int(q) for q in self.quality_factors)
        self.schemes = tuple(Scheme(s) for s in self.schemes)
        self.table_policy = TablePolicy(self.table_policy)
        if any(not 1 <= q <= 100 for q in self.quality_factors):
            raise ValueError("quality factors must lie in [1, 100]")
        grid = self.payload_bits or self.payload_fractions
        if list(grid) != sorted(grid):
            raise ValueError("payload grid must be sorted ascending")
        if any(not 0 < f <= 1 for f in self.payload_fractions):
            raise ValueError("payload fractions must lie in (0, 1]")
        if self.psnr_ref not in ("jpeg", "pgm"):
            raise ValueError("psnr_ref must be 'jpeg' or 'pgm'")

    def corpus(self):
        if self.images:
            return [Path(p) for p in self.images]
        return sorted(self.corpus_dir.glob("*.pgm"))


def payload_points(huang_capacity, config):
    """Shared payload sizes (bits, excluding the length header) for one image."""
    if config.payload_bits:
        return [int(b) for b in config.payload_bits]
    usable = max(huang_capacity - HEADER_BITS, 0)
    return [int(math.floor(f * usable)) for f in config.payload_fractions]


def _format_psnr(x):
    return "inf" if math.isinf(x) else f"{x:.6f}"


def canonical_original(plane, qf, policy=TablePolicy.OPTIMAL):
    """Compress a plane and return ``(bytes, image)`` in canonical form."""
    data = serialize_jpeg(encode_from_pixels(plane, qf), policy)
    return data, parse_jpeg(data)


def run_cell(original, original_bytes, scheme, payload, table_policy, reference=None):
    """Embed, serialize, verify by blind extraction, and measure one grid cell."""
    marked, report = embed_image(original, payload, scheme)
    marked_bytes = serialize_jpeg(marked, table_policy)
    extracted, recovered = extract_image(parse_jpeg(marked_bytes), scheme)
    if not np.array_equal(extracted, payload) or not recovered.same_coefficients(original):
        raise VerificationError(f"{scheme.value}: marked file failed round-trip verification")
    metrics = measure(original, marked, original_bytes, marked_bytes, scheme,
                      payload.size, reference)
    return report, metrics


def _bench_unit(path, qf, config):
    name = Path(path).stem
    plane = read_pgm(path)
    orig_bytes, original = canonical_original(plane, qf, config.table_policy)
    reference = plane if config.psnr_ref == "pgm" else decode_to_pixels(original)[0]
    caps = {s: capacity(original, s) for s in SCHEMES}
    rows = []
    for n in payload_points(caps[Scheme.HUANG2016], config):
        payload = random_payload(n, config.seed)
        for scheme in config.schemes:
            row = dict.fromkeys(RESULT_COLUMNS, "")
            row.update(image=name, qf=qf, scheme=scheme.value, payload_bits=n,
                       capacity_bits=caps[scheme], orig_bytes=len(orig_bytes))
            try:
                report, metrics = run_cell(original, orig_bytes, scheme, payload,
                                           config.table_policy, reference)
            except (RdhError, JpegError) as exc:
                row["error"] = f"{type(exc).__name__}: {exc}"
                log.warning("%s q%d %s %d bits: %s", name, qf, scheme.value, n, row["error"])
            else:
                row.update(psnr_db=_format_psnr(metrics.psnr_db),
                           marked_bytes=metrics.file_size_marked,
                           size_increase_bytes=metrics.size_increase,
                           coeffs_modified=report.coeffs_modified)
            rows.append(row)
    return name, qf, caps, rows


def crossover(rows):
    """Per (image, qf): how far Proposed stays at or below Huang in size increase.

    Returns dicts with the largest payload up to which every shared point has
    ``size(Proposed) <= size(Huang)`` and the first payload where it does not.
    """
    by_key = {}
    for r in rows:
        if r["error"] or r["scheme"] not in (Scheme.PROPOSED.value, Scheme.HUANG2016.value):
            continue
        by_key.setdefault((r["image"], r["qf"]), {}).setdefault(
            r["payload_bits"], {})[r["scheme"]] = int(r["size_increase_bytes"])
    out = []
    for (image, qf), points in sorted(by_key.items()):
        upto, first_above = "", ""
        for n in sorted(points):
            pair = points[n]
            if len(pair) < 2:
                continue
            if pair[Scheme.PROPOSED.value] <= pair[Scheme.HUANG2016.value]:
                if first_above == "":
                    upto = n
            elif first_above == "":
                first_above = n
        out.append(dict(image=image, qf=qf, proposed_le_huang_upto_bits=upto,
                        first_proposed_gt_huang_bits=first_above))
    return out


def run_bench(config):
    """Run the full sweep and write ``results.csv``, ``capacity.csv``,
    ``crossover.csv`` and ``bench_meta.json`` into ``config.out_dir``.

    Returns the result rows. Rows are ordered by (image, qf, scheme, payload)
    regardless of execution order.
    """
    corpus = config.corpus()
    if not corpus:
        raise FileNotFoundError(f"no .pgm files in {config.corpus_dir}")
    units = [(p, q) for p in corpus for q in config.quality_factors]
    if config.jobs > 1:
        with ProcessPoolExecutor(config.jobs) as pool:
            results = list(pool.map(_bench_unit, *zip(*units), [config] * len(units)))
    else:
        results = [_bench_unit(p, q, config) for p, q in units]

    scheme_rank = {s.value: i for i, s in enumerate(SCHEMES)}
    rows = sorted((r for *_, rs in results for r in rs),
                  key=lambda r: (r["image"], r["qf"], scheme_rank[r["scheme"]], r["payload_bits"]))

    config.out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(config.out_dir / "results.csv", RESULT_COLUMNS, rows)

    cap_cols = ["image"] + [f"qf{q}_{s.value}" for q in config.quality_factors for s in TABLE_ORDER]
    table = {}
    for name, qf, caps, _ in results:
        entry = table.setdefault(name, {"image": name})
        for s in TABLE_ORDER:
            entry[f"qf{qf}_{s.value}"] = caps[s]
    _write_csv(config.out_dir / "capacity.csv", cap_cols, [table[k] for k in sorted(table)])

    _write_csv(config.out_dir / "crossover.csv",
               ("image", "qf", "proposed_le_huang_upto_bits", "first_proposed_gt_huang_bits"),
               crossover(rows))

    meta = {
        "prng": PRNG_NAME,
        "seed": config.seed,
        "quality_factors": list(config.quality_factors),
        "payload_fractions": list(config.payload_fractions) if not config.payload_bits else None,
        "payload_bits": list(config.payload_bits) or None,
        "schemes": [s.value for s in config.schemes],
        "table_policy": config.table_policy.value,
        "psnr_ref": config.psnr_ref,
        "header_bits": HEADER_BITS,
        "images": [p.name for p in corpus],
    }
    (config.out_dir / "bench_meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    return rows


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(columns), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


def gen_corpus(pgm_paths, out_dir, quality_factors=(50, 70, 90),
               table_policy=TablePolicy.OPTIMAL):
    """Compress each PGM at each quality factor into ``<stem>_q<QF>.jpg``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for path in pgm_paths:
        plane = read_pgm(path)
        for qf in quality_factors:
            data, _ = canonical_original(plane, qf, table_policy)
            target = out_dir / f"{Path(path).stem}_q{qf}.jpg"
            target.write_bytes(data)
            written.append(target)
    return written
