"""Command-line interface.

Subcommands: generate (run a strategy over a corpus), decompose (list the
sub-expressions of one file), distort (apply explicit parameters to one
file), rasterize (render ink to images), stats (print a run's report),
verify (check dataset arithmetic against expected counts).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .decompose import decompose
from .distort import Axis, DistortionParams, distort_hme
from .inkml import read_inkml, write_inkml, write_manifest
from .pipeline import (
    DatasetReport,
    Strategy,
    StrategyConfig,
    generate_set,
    load_corpus,
    verify_counts,
)
from .raster import RasterConfig, rasterize, write_pgm

logger = logging.getLogger("hmegen")

OUTPUT_ROOT_ENV = "HMEGEN_OUTPUT_ROOT"


def _add_raster_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--height", type=int, default=128, help="image height in pixels")
    parser.add_argument("--max-width", type=int, default=2048)
    parser.add_argument("--thickness", type=int, default=3, help="ink thickness in pixels")
    parser.add_argument("--margin", type=int, default=8)


def _raster_config(args: argparse.Namespace) -> RasterConfig:
    return RasterConfig(
        target_height=args.height,
        max_width=args.max_width,
        thickness=args.thickness,
        margin=args.margin,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hmegen",
        description="Generate augmented datasets of handwritten math expressions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="run a generation strategy over a corpus")
    gen.add_argument("--strategy", required=True, choices=[s.value for s in Strategy])
    gen.add_argument("--input", required=True, help="directory of .inkml files")
    gen.add_argument(
        "--output",
        default=os.environ.get(OUTPUT_ROOT_ENV),
        help=f"output root (default: ${OUTPUT_ROOT_ENV})",
    )
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--copies", type=int, default=5, help="distorted copies per expression")
    gen.add_argument("--workers", type=int, default=1)
    gen.add_argument("--no-originals", action="store_true", help="exclude source expressions")
    gen.add_argument("--rasterize", action="store_true", help="also render images")
    _add_raster_args(gen)

    dec = sub.add_parser("decompose", help="print the sub-expression latex of one file")
    dec.add_argument("file")

    dis = sub.add_parser("distort", help="distort one file with explicit parameters")
    dis.add_argument("file")
    dis.add_argument("--id", type=int, required=True, choices=[1, 2, 3, 4, 5])
    dis.add_argument("--axis", choices=[a.value for a in Axis], default=Axis.HORIZONTAL.value)
    dis.add_argument("--alpha", type=float, required=True)
    dis.add_argument("--beta", type=float, default=0.0)
    dis.add_argument("--k", type=float, required=True)
    dis.add_argument("--gamma", type=float, required=True)
    dis.add_argument("-o", "--output", help="output file (default: stdout)")

    ras = sub.add_parser("rasterize", help="render .inkml files to PGM images")
    ras.add_argument("--input", required=True, help=".inkml file or directory")
    ras.add_argument("--output", required=True, help="output directory")
    _add_raster_args(ras)

    sta = sub.add_parser("stats", help="print the report of a generated dataset")
    sta.add_argument("output_root")

    ver = sub.add_parser("verify", help="check dataset arithmetic and expected counts")
    ver.add_argument("output_root")
    ver.add_argument("--expect-total", type=int)
    ver.add_argument("--expect-generated", type=int)
    ver.add_argument("--expect-input", type=int)
    ver.add_argument("--tolerance", type=float, default=0.0, help="fraction, e.g. 0.05")

    return parser


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "generate":
        return _cmd_generate(args)
    if args.command == "decompose":
        return _cmd_decompose(args)
    if args.command == "distort":
        return _cmd_distort(args)
    if args.command == "rasterize":
        return _cmd_rasterize(args)
    if args.command == "stats":
        return _cmd_stats(args)
    return _cmd_verify(args)


def _cmd_generate(args: argparse.Namespace) -> int:
    if not args.output:
        print(f"error: --output or ${OUTPUT_ROOT_ENV} required", file=sys.stderr)
        return 2
    config = StrategyConfig(
        strategy=Strategy(args.strategy),
        copies_per_hme=args.copies,
        master_seed=args.seed,
        include_originals=not args.no_originals,
        output_root=Path(args.output),
        rasterize=args.rasterize,
        raster=_raster_config(args),
        workers=args.workers,
    )
    corpus = load_corpus(args.input)
    report = generate_set(corpus, config)
    print(report.to_text(), end="")
    if report.failed_count:
        print(f"{report.failed_count} file(s) failed; see log", file=sys.stderr)
        return 1
    return 0


def _cmd_decompose(args: argparse.Namespace) -> int:
    hme = read_inkml(args.file)
    for sub in decompose(hme).sub_hmes:
        print(sub.latex)
    return 0


def _cmd_distort(args: argparse.Namespace) -> int:
    params = DistortionParams(
        id=args.id,
        axis=Axis(args.axis),
        alpha=args.alpha,
        beta=args.beta,
        k=args.k,
        gamma=args.gamma,
    )
    hme = read_inkml(args.file)
    data = write_inkml(distort_hme(hme, params))
    if args.output:
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
    return 0


def _cmd_rasterize(args: argparse.Namespace) -> int:
    config = _raster_config(args)
    src = Path(args.input)
    files = sorted(src.rglob("*.inkml")) if src.is_dir() else [src]
    out_root = Path(args.output)
    (out_root / "img").mkdir(parents=True, exist_ok=True)
    rows = []
    failed = 0
    for path in files:
        try:
            hme = read_inkml(path, require_truth=False)
            rel = f"img/{path.stem}.pgm"
            write_pgm(rasterize(hme, config), out_root / rel)
            rows.append((rel, hme.latex))
        except Exception as exc:  # noqa: BLE001 - per-file isolation
            failed += 1
            logger.error("skipped %s: %s: %s", path, type(exc).__name__, exc)
    write_manifest(rows, out_root / "img_manifest.tsv")
    print(f"rendered {len(rows)} image(s), {failed} failed")
    return 1 if failed else 0


def _load_report(output_root: str) -> DatasetReport:
    path = Path(output_root) / "report.json"
    return DatasetReport.from_dict(json.loads(path.read_text()))


def _cmd_stats(args: argparse.Namespace) -> int:
    print(_load_report(args.output_root).to_text(), end="")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    report = _load_report(args.output_root)
    expected = {}
    if args.expect_total is not None:
        expected["total_count"] = args.expect_total
    if args.expect_generated is not None:
        expected["generated_count"] = args.expect_generated
    if args.expect_input is not None:
        expected["input_count"] = args.expect_input
    result = verify_counts(report, expected, tolerance=args.tolerance)
    for line in result.lines:
        print(line)
    return 0 if result.ok else 1


def main() -> None:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
