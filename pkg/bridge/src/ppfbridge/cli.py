"""ppfbridge command line: extract, build-manifest, fetch-weights."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .extractors import EXTRACTOR_NAMES, ExtractorConfig
from .manifest import LayoutError, scan_category
from .pipeline import extract_category
from .ppfio import write_manifest
from .weights import WeightsError, default_weights_dir, fetch_weights


def _cmd_extract(args: argparse.Namespace) -> int:
    cfg = ExtractorConfig(
        extractor_name=args.extractor,
        multiscale=args.multiscale,
        scales=tuple(float(s) for s in args.scales.split(",") if s.strip()),
        device=args.device,
        weights_dir=args.weights_dir,
        max_features=args.max_features,
    )
    manifest = extract_category(args.root, args.category, cfg, args.out,
                                workers=args.workers)
    print(f"extract: wrote {manifest}")
    return 0


def _cmd_build_manifest(args: argparse.Namespace) -> int:
    records = scan_category(args.root, args.category)
    items = []
    for r in records:
        item = {
            "path": str(Path(args.category) / r["rel"]),
            "label": r["label"],
            "split": r["split"],
        }
        if r["defect_type"] is not None:
            item["defect_type"] = r["defect_type"]
        items.append(item)
    write_manifest(args.out, args.category, items)
    print(f"build-manifest: {len(items)} items -> {args.out}")
    return 0


def _cmd_fetch_weights(args: argparse.Namespace) -> int:
    dest = fetch_weights(
        args.extractor,
        weights_dir=args.weights_dir,
        registry_path=args.registry,
        allow_unpinned=args.allow_unpinned,
    )
    print(f"fetch-weights: verified {dest}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppfbridge",
        description="Convert image datasets into descriptor-set (PPF) files "
                    "with off-the-shelf keypoint extractors.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract one dataset category to PPF + manifest")
    p.add_argument("--root", required=True, help="dataset root (MVTec layout)")
    p.add_argument("--category", required=True)
    p.add_argument("--extractor", choices=EXTRACTOR_NAMES, default="orb")
    p.add_argument("--multiscale", action="store_true")
    p.add_argument("--scales", default="0.5,1,2",
                   help="comma-separated pyramid scales (default 0.5,1,2)")
    p.add_argument("--device", default="cpu")
    p.add_argument("--weights-dir", default=None)
    p.add_argument("--max-features", type=int, default=2000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("build-manifest",
                       help="write a manifest for an already-extracted category layout")
    p.add_argument("--root", required=True)
    p.add_argument("--category", required=True)
    p.add_argument("--out", required=True, help="manifest JSON path")
    p.set_defaults(func=_cmd_build_manifest)

    p = sub.add_parser("fetch-weights", help="download + verify extractor weights")
    p.add_argument("--extractor", choices=EXTRACTOR_NAMES, required=True)
    p.add_argument("--weights-dir", default=str(default_weights_dir()))
    p.add_argument("--registry", default=None,
                   help="JSON registry overriding the built-in url/sha256 pins")
    p.add_argument("--allow-unpinned", action="store_true")
    p.set_defaults(func=_cmd_fetch_weights)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (WeightsError, LayoutError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
