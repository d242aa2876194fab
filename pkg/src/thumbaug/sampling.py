"""Deterministic, replayable randomness for the augmentation pipeline.

Every stochastic choice flows through an :class:`RngStream` keyed by
``(root_seed, purpose, batch_index, lane)``. Keys are hashed with numpy's
``SeedSequence`` spawn mechanism into a Philox counter-based generator, so
any stream can be re-derived independently of all others and reproduces
the same draws on every run and platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .image import BBox

__all__ = [
    "PlacementError",
    "Purpose",
    "RngStream",
    "derive_stream",
    "sample_box",
    "bernoulli_gate",
    "sample_pairing",
    "sample_nonoverlapping_boxes",
]

_MAX_SEED = 2**64  # root seeds are unsigned 64-bit


class PlacementError(RuntimeError):
    """Rejection sampling ran out of attempts while placing boxes."""


class Purpose(IntEnum):
    """Stream roles. Values are part of the stream key; never renumber."""

    GATE = 1  # per-batch participation coin
    PAIRING = 2  # batch permutation pairing samples for single-thumbnail mixing
    PARTNER = 3  # extra batch permutations, one lane per pasted thumbnail
    BOX = 4  # per-sample box placement, one lane per sample position


@dataclass(eq=False)
class RngStream:
    """One independently seeded draw sequence.

    Equal key fields always reproduce the same draws. The generator is
    stateful; a single stream must not be shared across workers.
    """

    root_seed: int
    purpose: Purpose
    batch_index: int
    lane: int
    gen: np.random.Generator


def derive_stream(
    root_seed: int, purpose: Purpose, batch_index: int, lane: int = 0
) -> RngStream:
    """Create the stream keyed by ``(root_seed, purpose, batch_index, lane)``.

    Distinct keys give statistically independent streams; repeated calls
    with the same key restart the identical draw sequence. ``lane``
    separates multiple streams of one purpose inside a batch (sample
    positions, thumbnail slots).
    """
    if not 0 <= root_seed < _MAX_SEED:
        raise ValueError(f"root_seed must be in [0, 2**64), got {root_seed}")
    if batch_index < 0:
        raise ValueError(f"batch_index must be non-negative, got {batch_index}")
    if lane < 0:
        raise ValueError(f"lane must be non-negative, got {lane}")
    seq = np.random.SeedSequence(root_seed, spawn_key=(int(purpose), batch_index, lane))
    return RngStream(root_seed, Purpose(purpose), batch_index, lane, np.random.Generator(np.random.Philox(seq)))


def sample_box(rng: RngStream, width: int, height: int, w: int, h: int) -> BBox:
    """Uniformly place a ``w x h`` box fully inside a ``width x height`` image.

    The corner is drawn over the clamped integer domain
    ``x in [0, width - w]``, ``y in [0, height - h]``, so the box never
    crosses the image edge.
    """
    if w < 1 or h < 1:
        raise ValueError(f"box size must be at least 1x1, got {w}x{h}")
    if w > width or h > height:
        raise ValueError(f"box {w}x{h} cannot fit inside {width}x{height}")
    x = int(rng.gen.integers(0, width - w + 1))
    y = int(rng.gen.integers(0, height - h + 1))
    return BBox(x=x, y=y, w=w, h=h)


def bernoulli_gate(rng: RngStream, rate: float) -> bool:
    """True with probability ``rate``."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must be in [0, 1], got {rate}")
    return bool(rng.gen.random() < rate)


def sample_pairing(rng: RngStream, batch_size: int) -> list[int]:
    """Uniform random permutation of ``range(batch_size)``.

    Sample ``i`` gets mixed with sample ``perm[i]``. Fixed points are
    allowed: a sample may draw itself.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be at least 1, got {batch_size}")
    return [int(i) for i in rng.gen.permutation(batch_size)]


def sample_nonoverlapping_boxes(
    rng: RngStream,
    n: int,
    width: int,
    height: int,
    w: int,
    h: int,
    max_attempts: int = 100,
) -> list[BBox]:
    """Rejection-sample ``n`` pairwise-disjoint ``w x h`` boxes.

    Each draw uses :func:`sample_box`; a draw intersecting an already
    accepted box counts as one rejection. More than ``max_attempts``
    rejections in total raises :class:`PlacementError`, signalling the
    caller to retry with a fresh stream or skip the sample. A
    configuration whose total box area exceeds the image is rejected
    before any draw.
    """
    if n < 1:
        raise ValueError(f"need at least 1 box, got {n}")
    if n * w * h > width * height:
        raise ValueError(
            f"{n} boxes of {w}x{h} cannot fit inside {width}x{height}: "
            "total box area exceeds the image"
        )
    boxes: list[BBox] = []
    rejections = 0
    while len(boxes) < n:
        candidate = sample_box(rng, width, height, w, h)
        if any(candidate.intersects(b) for b in boxes):
            rejections += 1
            if rejections > max_attempts:
                raise PlacementError(
                    f"could not place {n} disjoint {w}x{h} boxes in "
                    f"{width}x{height} after {rejections} rejected draws"
                )
            continue
        boxes.append(candidate)
    return boxes
