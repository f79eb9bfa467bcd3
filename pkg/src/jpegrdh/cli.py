"""Command-line interface: ``jpegrdh {embed,extract,recover,capacity,bench,gen-corpus}``."""

import argparse
import json
import logging
import sys
from pathlib import Path

from . import errors
from .bench import BenchConfig, gen_corpus, run_bench
from .jpeg import TablePolicy, parse_jpeg, read_pgm, serialize_jpeg
from .metrics import measure
from .payload import bits_to_bytes, bytes_to_bits, random_payload
from .rdh import SCHEMES, Scheme, capacity, embed_image, extract_image

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_UNSUPPORTED = 3
EXIT_BAD_JPEG = 4
EXIT_PAYLOAD_TOO_LARGE = 5
EXIT_OVERFLOW = 6
EXIT_FRAME_CORRUPT = 7
EXIT_IO = 8
EXIT_VERIFY = 9

# Checked in order; subclasses before their bases.
EXIT_CODES = (
    (errors.UnsupportedFormat, EXIT_UNSUPPORTED),
    (errors.JpegError, EXIT_BAD_JPEG),
    (errors.PayloadTooLarge, EXIT_PAYLOAD_TOO_LARGE),
    (errors.Overflow, EXIT_OVERFLOW),
    (errors.FrameCorrupt, EXIT_FRAME_CORRUPT),
    (errors.VerificationError, EXIT_VERIFY),
    (OSError, EXIT_IO),
)


def _qf_list(text):
    try:
        qfs = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad quality factor list {text!r}")
    if not qfs or any(not 1 <= q <= 100 for q in qfs):
        raise argparse.ArgumentTypeError("quality factors must lie in [1, 100]")
    return qfs


def _load_payload(args):
    if args.payload is not None:
        return bytes_to_bits(Path(args.payload).read_bytes())
    return random_payload(args.random_bits, args.seed)


def cmd_embed(args):
    data = Path(args.input).read_bytes()
    original = parse_jpeg(data)
    payload = _load_payload(args)
    marked, report = embed_image(original, payload, args.scheme)
    out = serialize_jpeg(marked, args.table_policy)
    Path(args.output).write_bytes(out)
    reference = None
    if args.psnr_ref.startswith("pgm:"):
        reference = read_pgm(args.psnr_ref[4:])
    metrics = measure(original, marked, data, out, args.scheme, payload.size, reference)
    result = report.as_dict()
    result.update(psnr_db=metrics.psnr_db, orig_bytes=len(data), marked_bytes=len(out),
                  size_increase_bytes=metrics.size_increase)
    print(json.dumps(result))
    return EXIT_OK


def cmd_extract(args):
    marked = parse_jpeg(Path(args.input).read_bytes())
    payload, recovered = extract_image(marked, args.scheme)
    if args.payload_out:
        Path(args.payload_out).write_bytes(bits_to_bytes(payload))
    if args.recovered_out:
        Path(args.recovered_out).write_bytes(serialize_jpeg(recovered, args.table_policy))
    print(json.dumps({"scheme": Scheme(args.scheme).value, "payload_bits": int(payload.size)}))
    return EXIT_OK


def cmd_recover(args):
    marked = parse_jpeg(Path(args.input).read_bytes())
    _, recovered = extract_image(marked, args.scheme)
    Path(args.output).write_bytes(serialize_jpeg(recovered, args.table_policy))
    return EXIT_OK


def cmd_capacity(args):
    print("file\t" + "\t".join(s.value for s in SCHEMES))
    for path in args.inputs:
        image = parse_jpeg(Path(path).read_bytes())
        print(path + "\t" + "\t".join(str(capacity(image, s)) for s in SCHEMES))
    return EXIT_OK


def cmd_bench(args):
    psnr_ref = "pgm" if args.psnr_ref.startswith("pgm") else "jpeg"
    config = BenchConfig(
        corpus_dir=args.corpus,
        out_dir=args.out,
        quality_factors=tuple(args.qf),
        payload_bits=tuple(args.payload_grid or ()),
        seed=args.seed,
        schemes=tuple(args.scheme or SCHEMES),
        table_policy=args.table_policy,
        psnr_ref=psnr_ref,
        jobs=args.jobs,
    )
    rows = run_bench(config)
    failed = sum(1 for r in rows if r["error"])
    print(f"{len(rows)} rows written to {config.out_dir} ({failed} failed cells)")
    return EXIT_OK


def cmd_gen_corpus(args):
    src = Path(args.pgm_dir)
    paths = sorted(src.glob("*.pgm")) if src.is_dir() else [src]
    if not paths:
        raise FileNotFoundError(f"no .pgm files in {src}")
    for p in gen_corpus(paths, args.out, args.qf, args.table_policy):
        print(p)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="jpegrdh", description="Reversible data hiding in JPEG AC coefficients.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def scheme_arg(p, required=True):
        p.add_argument("--scheme", choices=[s.value for s in SCHEMES], required=required,
                       default=None if required else Scheme.PROPOSED.value)

    def policy_arg(p):
        p.add_argument("--table-policy", choices=[t.value for t in TablePolicy],
                       default=TablePolicy.OPTIMAL.value)

    p = sub.add_parser("embed", help="hide a payload in a JPEG")
    p.add_argument("input")
    p.add_argument("output")
    scheme_arg(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--payload", metavar="FILE", help="raw bytes, most significant bit first")
    src.add_argument("--random-bits", type=int, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--psnr-ref", default="jpeg", metavar="{jpeg|pgm:PATH}")
    policy_arg(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="extract the payload and recover the original")
    p.add_argument("input")
    scheme_arg(p)
    p.add_argument("--payload-out", metavar="FILE")
    p.add_argument("--recovered-out", metavar="FILE")
    policy_arg(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("recover", help="restore the original JPEG without saving the payload")
    p.add_argument("input")
    p.add_argument("output")
    scheme_arg(p)
    policy_arg(p)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("capacity", help="per-scheme embedding capacity in bits")
    p.add_argument("inputs", nargs="+")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("bench", help="capacity / PSNR / file-size sweep over a PGM corpus")
    p.add_argument("--corpus", required=True, metavar="DIR")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--qf", type=_qf_list, default=[50, 70, 90], metavar="LIST")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scheme", action="append", choices=[s.value for s in SCHEMES])
    p.add_argument("--payload-grid", type=int, nargs="+", metavar="BITS",
                   help="explicit payload sizes (default: 10%%..100%% of histogram-shift capacity)")
    p.add_argument("--psnr-ref", default="jpeg", metavar="{jpeg|pgm}")
    p.add_argument("--jobs", type=int, default=1)
    policy_arg(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen-corpus", help="compress PGM files at the given quality factors")
    p.add_argument("pgm_dir", metavar="PGM_DIR_OR_FILE")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--qf", type=_qf_list, default=[50, 70, 90], metavar="LIST")
    policy_arg(p)
    p.set_defaults(func=cmd_gen_corpus)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:
        for cls, code in EXIT_CODES:
            if isinstance(exc, cls):
                print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
                return code
        raise


if __name__ == "__main__":
    sys.exit(main())
