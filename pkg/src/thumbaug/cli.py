"""Command-line interface: augment a corpus, verify outputs, grayscale a set.

Usage:
    thumbaug augment --corpus corpus.csv --out-dir out --strategy mst --seed 7
    thumbaug verify --corpus corpus.csv --manifest out/manifest.jsonl
    thumbaug grayscale images/ --out-dir gray/

``augment`` reads a corpus manifest (CSV or JSONL: input_path, sample_id,
class_index), writes one augmented image per input plus a JSONL output
manifest. ``verify`` replays every manifest record from the recorded seed
and checks the stored images bit-for-bit. ``grayscale`` converts a
directory of images to BT.601 grayscale.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Iterator

import numpy as np

from .image import paste, thumbnail, to_grayscale
from .image_io import CodecError, load_image, save_image
from .manifest import (
    iter_manifest_records,
    read_corpus_manifest,
    read_output_manifest,
    write_manifest_line,
)
from .pipeline import DEFAULT_BATCH_SIZE, Sample, run_corpus
from .sampling import (
    PlacementError,
    Purpose,
    derive_stream,
    sample_box,
    sample_nonoverlapping_boxes,
)
from .strategies import AugConfig, LabelDist, Strategy

SEED_ENV_VAR = "THUMBAUG_SEED"
MANIFEST_NAME = "manifest.jsonl"

# Flags that only make sense for specific strategies; anything else passed
# explicitly is rejected before any file is touched.
_FLAG_SCOPE = {
    "lam": ("--lambda", {Strategy.MST}),
    "lam_base": ("--lambda-base", {Strategy.MMT}),
    "lam_thumb": ("--lambda-thumb", {Strategy.MMT}),
    "num_thumbnails": ("--num-thumbnails", {Strategy.MMT}),
    "normalize_labels": ("--normalize-labels", {Strategy.MMT}),
}


def _parse_thumb_size(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    try:
        if len(parts) == 1:
            w = h = int(parts[0])
        elif len(parts) == 2:
            w, h = int(parts[0]), int(parts[1])
        else:
            raise ValueError
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected WxH or a single integer, got '{text}'"
        ) from None
    return w, h


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thumbaug",
        description="Thumbnail-pasting image augmentation with mixed-label manifests.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    aug = sub.add_parser("augment", help="augment a corpus and write a manifest")
    aug.add_argument("--corpus", type=Path, help="corpus manifest (CSV or JSONL)")
    aug.add_argument("--out-dir", type=Path, help="directory for outputs and manifest")
    aug.add_argument(
        "--strategy",
        required=True,
        choices=["st", "mst", "mmt"],
        help="st: paste own thumbnail; mst: paste a partner's thumbnail and mix "
        "labels; mmt: paste several partners' thumbnails",
    )
    aug.add_argument(
        "--thumb-size",
        type=_parse_thumb_size,
        default=None,
        metavar="WxH",
        help="thumbnail size (default: half the image width and height)",
    )
    aug.add_argument(
        "--lambda",
        dest="lam",
        type=float,
        default=None,
        help="partner label weight for mst (default 0.25)",
    )
    aug.add_argument(
        "--lambda-base",
        dest="lam_base",
        type=float,
        default=None,
        help="base image label weight for mmt (default 0.6)",
    )
    aug.add_argument(
        "--lambda-thumb",
        dest="lam_thumb",
        type=float,
        default=None,
        help="per-thumbnail label weight for mmt (default 0.2)",
    )
    aug.add_argument(
        "--num-thumbnails",
        type=int,
        default=None,
        help="thumbnails pasted per image for mmt (default 2)",
    )
    aug.add_argument(
        "--participation-rate",
        type=float,
        default=0.8,
        help="fraction of batches to augment (default 0.8)",
    )
    aug.add_argument(
        "--seed",
        type=int,
        default=None,
        help=f"root seed (default: ${SEED_ENV_VAR} or 0)",
    )
    aug.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE)
    aug.add_argument(
        "--normalize-labels",
        action="store_true",
        default=None,
        help="rescale mmt label weights to sum to 1",
    )
    aug.add_argument(
        "--num-classes",
        type=int,
        default=None,
        help="label space size (default: max class_index in the corpus + 1)",
    )
    aug.add_argument("--format", choices=["png", "ppm"], default="png")
    aug.add_argument(
        "--dump-config",
        action="store_true",
        help="print the effective configuration as JSON and exit",
    )
    aug.set_defaults(func=cmd_augment)

    ver = sub.add_parser("verify", help="replay a manifest and check outputs bit-exactly")
    ver.add_argument("--corpus", type=Path, required=True)
    ver.add_argument("--manifest", type=Path, required=True)
    ver.add_argument(
        "--seed",
        type=int,
        default=None,
        help="replay with this seed instead of the recorded one",
    )
    ver.set_defaults(func=cmd_verify)

    gray = sub.add_parser("grayscale", help="convert a directory of images to grayscale")
    gray.add_argument("input_dir", type=Path)
    gray.add_argument("--out-dir", type=Path, required=True)
    gray.set_defaults(func=cmd_grayscale)

    return parser


def _build_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> AugConfig:
    strategy = Strategy(args.strategy)
    for field, (flag, allowed) in _FLAG_SCOPE.items():
        if getattr(args, field) is not None and strategy not in allowed:
            parser.error(f"{flag} does not apply to --strategy {strategy.value}")
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get(SEED_ENV_VAR, "0"))
    thumb_w, thumb_h = args.thumb_size if args.thumb_size is not None else (None, None)
    overrides = {
        field: getattr(args, field)
        for field in _FLAG_SCOPE
        if getattr(args, field) is not None
    }
    return AugConfig(
        strategy=strategy,
        thumb_w=thumb_w,
        thumb_h=thumb_h,
        participation_rate=args.participation_rate,
        root_seed=seed,
        **overrides,
    )


def cmd_augment(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    try:
        cfg = _build_config(args, parser)
    except ValueError as exc:
        parser.error(str(exc))
    if args.batch_size < 1:
        parser.error(f"--batch-size must be at least 1, got {args.batch_size}")

    if args.dump_config:
        dump = asdict(cfg)
        dump["strategy"] = cfg.strategy.value
        dump["batch_size"] = args.batch_size
        dump["format"] = args.format
        print(json.dumps(dump, indent=2))
        return 0

    if args.corpus is None or args.out_dir is None:
        parser.error("--corpus and --out-dir are required (unless --dump-config)")

    entries = read_corpus_manifest(args.corpus)
    if not entries:
        print("corpus is empty; nothing to do", file=sys.stderr)
        return 1
    max_class = max(e.class_index for e in entries)
    num_classes = args.num_classes if args.num_classes is not None else max_class + 1
    if max_class >= num_classes:
        parser.error(
            f"corpus contains class_index {max_class} but --num-classes is {num_classes}"
        )

    failures: list[str] = []

    def samples() -> Iterator[Sample]:
        for e in entries:
            try:
                image = load_image(e.input_path)
            except (CodecError, OSError) as exc:
                failures.append(f"{e.sample_id}: {exc}")
                continue
            yield Sample(e.sample_id, image, LabelDist.pure(e.class_index, num_classes))

    args.out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = args.out_dir / MANIFEST_NAME
    written = 0
    with open(manifest_path, "w") as mfh:
        for image, _label, record in run_corpus(samples(), cfg, args.batch_size):
            out_name = f"{record.output_id}.{args.format}"
            save_image(image, args.out_dir / out_name)
            write_manifest_line(mfh, record, out_name)
            written += 1

    if failures:
        print(f"{len(failures)} sample(s) failed:", file=sys.stderr)
        for line in failures:
            print(f"  {line}", file=sys.stderr)
        return 1
    print(f"wrote {written} images and {manifest_path}")
    return 0


def _replay_image(
    record, lane: int, base: np.ndarray, thumb_sources: list[np.ndarray], seed: int
) -> np.ndarray:
    """Regenerate one output image from the stream keys and recorded sources."""
    height, width = base.shape[:2]
    w, h = record.boxes[0].w, record.boxes[0].h
    rng = derive_stream(seed, Purpose.BOX, record.batch_index, lane=lane)
    if record.strategy in (Strategy.ST, Strategy.MST):
        boxes = [sample_box(rng, width, height, w, h)]
    else:
        boxes = sample_nonoverlapping_boxes(rng, len(record.boxes), width, height, w, h)
    out = base
    for src, box in zip(thumb_sources, boxes):
        out = paste(out, thumbnail(src, w, h), box)
    return out


def _first_pixel_diff(a: np.ndarray, b: np.ndarray) -> str:
    if a.shape != b.shape:
        return f"shape {b.shape[1]}x{b.shape[0]} != expected {a.shape[1]}x{a.shape[0]}"
    diff = np.argwhere(a != b)
    row, col, chan = (int(v) for v in diff[0])
    return f"first differing pixel at x={col}, y={row}, channel={chan}"


def cmd_verify(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    entries = read_corpus_manifest(args.corpus)
    by_id = {e.sample_id: e.input_path for e in entries}
    records = read_output_manifest(args.manifest)
    manifest_dir = args.manifest.parent

    mismatches: list[str] = []
    checked = 0
    for record, lane in iter_manifest_records(records):
        checked += 1
        try:
            stored = load_image(manifest_dir / record.output_path)
            base = load_image(by_id[record.sources[0][0]])
            if record.strategy is Strategy.NONE:
                expected = base
            else:
                if record.strategy is Strategy.ST:
                    thumb_sources = [base]
                else:
                    thumb_sources = [load_image(by_id[sid]) for sid, _ in record.sources[1:]]
                seed = args.seed if args.seed is not None else record.root_seed
                expected = _replay_image(record, lane, base, thumb_sources, seed)
        except KeyError as exc:
            mismatches.append(f"{record.output_path}: unknown sample_id {exc}")
            continue
        except (CodecError, OSError, PlacementError, ValueError, IndexError) as exc:
            mismatches.append(f"{record.output_path}: {exc}")
            continue
        if expected.shape != stored.shape or bool(np.any(expected != stored)):
            mismatches.append(
                f"{record.output_path}: {_first_pixel_diff(expected, stored)}"
            )

    if mismatches:
        print(f"{len(mismatches)} of {checked} record(s) failed replay:", file=sys.stderr)
        for line in mismatches:
            print(f"  {line}", file=sys.stderr)
        return 1
    print(f"verified {checked} record(s): all bit-exact")
    return 0


def cmd_grayscale(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if not args.input_dir.is_dir():
        parser.error(f"{args.input_dir} is not a directory")
    paths = sorted(
        p for p in args.input_dir.iterdir() if p.suffix.lower() in (".png", ".ppm")
    )
    if not paths:
        print(f"no .png or .ppm files in {args.input_dir}", file=sys.stderr)
        return 1
    args.out_dir.mkdir(parents=True, exist_ok=True)
    failures: list[str] = []
    written = 0
    for path in paths:
        try:
            save_image(to_grayscale(load_image(path)), args.out_dir / path.name)
            written += 1
        except (CodecError, OSError, ValueError) as exc:
            failures.append(f"{path.name}: {exc}")
    if failures:
        print(f"{len(failures)} image(s) failed:", file=sys.stderr)
        for line in failures:
            print(f"  {line}", file=sys.stderr)
        return 1
    print(f"wrote {written} grayscale images to {args.out_dir}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (CodecError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
