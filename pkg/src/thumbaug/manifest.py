"""Corpus input manifests and augmentation output manifests.

A corpus manifest lists the input images, one record per line, as either
CSV (optionally with an ``input_path,sample_id,class_index`` header) or
JSONL with those same keys. Relative image paths resolve against the
manifest's directory.

The output manifest is line-delimited JSON, one object per produced image:

    {"output_path": ..., "strategy": "st|mst|mmt|none",
     "sources": [{"sample_id": ..., "weight": ...}, ...],
     "boxes": [{"x": ..., "y": ..., "w": ..., "h": ...}, ...],
     "batch_index": ..., "root_seed": ...}

Sources are ordered base-image first, then one entry per pasted thumbnail
aligned with ``boxes``. Weights are serialized as JSON numbers in Python's
shortest round-trip notation, so the exact float64 value is recoverable.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

from .image import BBox
from .pipeline import AugRecord
from .strategies import Strategy

__all__ = [
    "CorpusEntry",
    "OutputRecord",
    "read_corpus_manifest",
    "write_manifest_line",
    "read_output_manifest",
    "iter_manifest_records",
]

_CSV_HEADER = ["input_path", "sample_id", "class_index"]


@dataclass(frozen=True)
class CorpusEntry:
    input_path: Path
    sample_id: str
    class_index: int


@dataclass(frozen=True)
class OutputRecord:
    """One parsed output-manifest line; mirrors AugRecord plus the file path."""

    output_path: str
    strategy: Strategy
    sources: tuple[tuple[str, float], ...]
    boxes: tuple[BBox, ...]
    batch_index: int
    root_seed: int


def read_corpus_manifest(path: str | Path) -> list[CorpusEntry]:
    """Parse a corpus manifest (CSV or JSONL by extension).

    Sample ids must be unique across the corpus; they name the outputs.
    """
    path = Path(path)
    if path.suffix.lower() in (".jsonl", ".ndjson"):
        entries = _read_corpus_jsonl(path)
    else:
        entries = _read_corpus_csv(path)
    if not entries:
        return []
    seen: set[str] = set()
    for e in entries:
        if e.sample_id in seen:
            raise ValueError(f"{path}: duplicate sample_id '{e.sample_id}'")
        seen.add(e.sample_id)
        if e.class_index < 0:
            raise ValueError(
                f"{path}: sample '{e.sample_id}' has negative class_index {e.class_index}"
            )
    return entries


def _resolve(base: Path, raw: str) -> Path:
    p = Path(raw)
    return p if p.is_absolute() else base / p


def _read_corpus_csv(path: Path) -> list[CorpusEntry]:
    entries: list[CorpusEntry] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if lineno == 1 and [cell.strip() for cell in row] == _CSV_HEADER:
                continue
            if len(row) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 columns, got {len(row)}")
            raw_path, sample_id, raw_cls = (cell.strip() for cell in row)
            try:
                cls = int(raw_cls)
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: class_index '{raw_cls}' is not an integer"
                ) from None
            entries.append(CorpusEntry(_resolve(path.parent, raw_path), sample_id, cls))
    return entries


def _read_corpus_jsonl(path: Path) -> list[CorpusEntry]:
    entries: list[CorpusEntry] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            try:
                entries.append(
                    CorpusEntry(
                        _resolve(path.parent, str(obj["input_path"])),
                        str(obj["sample_id"]),
                        int(obj["class_index"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad corpus record ({exc})") from exc
    return entries


def write_manifest_line(fh: TextIO, record: AugRecord, output_path: str) -> None:
    """Append one output-manifest JSON line for a produced image."""
    obj = {
        "output_path": output_path,
        "strategy": record.strategy_applied.value,
        "sources": [
            {"sample_id": sid, "weight": weight} for sid, weight in record.sources
        ],
        "boxes": [{"x": b.x, "y": b.y, "w": b.w, "h": b.h} for b in record.boxes],
        "batch_index": record.batch_index,
        "root_seed": record.root_seed,
    }
    fh.write(json.dumps(obj) + "\n")


def read_output_manifest(path: str | Path) -> list[OutputRecord]:
    """Parse an output manifest back into records, preserving file order."""
    path = Path(path)
    records: list[OutputRecord] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                records.append(
                    OutputRecord(
                        output_path=str(obj["output_path"]),
                        strategy=Strategy(obj["strategy"]),
                        sources=tuple(
                            (str(s["sample_id"]), float(s["weight"]))
                            for s in obj["sources"]
                        ),
                        boxes=tuple(
                            BBox(x=int(b["x"]), y=int(b["y"]), w=int(b["w"]), h=int(b["h"]))
                            for b in obj["boxes"]
                        ),
                        batch_index=int(obj["batch_index"]),
                        root_seed=int(obj["root_seed"]),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad manifest record ({exc})") from exc
    return records


def iter_manifest_records(records: Iterable[OutputRecord]) -> Iterable[tuple[OutputRecord, int]]:
    """Pair each record with its lane (position within its batch).

    Lanes restart at zero whenever the batch index changes; manifests are
    written in batch order so this reconstructs the per-sample stream lane
    used during augmentation.
    """
    current_batch: int | None = None
    lane = 0
    for rec in records:
        if rec.batch_index != current_batch:
            current_batch = rec.batch_index
            lane = 0
        yield rec, lane
        lane += 1
