"""The three thumbnail-pasting transforms and soft-label mixing.

Each strategy is a pure sample-level function: it draws placement from the
stream it is given, composes the output image out of thumbnails and a base
image, and mixes the labels with configured weights. Label weights never
depend on where a box landed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .image import BBox, as_image, paste, thumbnail
from .sampling import RngStream, sample_box, sample_nonoverlapping_boxes

__all__ = [
    "Strategy",
    "LabelDist",
    "AugConfig",
    "mix_labels",
    "self_thumbnail",
    "mixed_single",
    "mixed_multi",
    "multi_mix_weights",
]


class Strategy(str, Enum):
    """Available transforms. NONE marks a pass-through in records only."""

    NONE = "none"
    ST = "st"  # self thumbnail: paste an image's own thumbnail, keep the label
    MST = "mst"  # mixed single thumbnail: paste another image's thumbnail, mix labels
    MMT = "mmt"  # mixed multiple thumbnails: paste several other images' thumbnails


@dataclass(frozen=True)
class LabelDist:
    """Weighted distribution over class indices.

    A plain, unmixed label is one entry of weight 1.0. Mixed labels carry
    one entry per participating class; entries are kept sorted by class
    index and weights may sum to more than 1 when mixing is unnormalized.
    """

    num_classes: int
    entries: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        if self.num_classes < 1:
            raise ValueError(f"num_classes must be at least 1, got {self.num_classes}")
        if not self.entries:
            raise ValueError("a label needs at least one entry")
        seen: set[int] = set()
        for cls, weight in self.entries:
            if not 0 <= cls < self.num_classes:
                raise ValueError(
                    f"class {cls} out of range for {self.num_classes} classes"
                )
            if cls in seen:
                raise ValueError(f"duplicate class {cls} in label entries")
            seen.add(cls)
            if weight <= 0:
                raise ValueError(f"class {cls} has non-positive weight {weight}")

    @classmethod
    def pure(cls, class_index: int, num_classes: int) -> "LabelDist":
        """The one-hot label for a single class."""
        return cls(num_classes, ((class_index, 1.0),))

    def weight_of(self, class_index: int) -> float:
        for cls, weight in self.entries:
            if cls == class_index:
                return weight
        return 0.0

    def total(self) -> float:
        return math.fsum(weight for _, weight in self.entries)

    def normalized(self) -> "LabelDist":
        """Same distribution rescaled so the weights sum to 1."""
        t = self.total()
        return LabelDist(self.num_classes, tuple((c, w / t) for c, w in self.entries))


@dataclass(frozen=True)
class AugConfig:
    """Strategy selection plus every knob the transforms need.

    ``thumb_w``/``thumb_h`` of ``None`` mean half the image width/height at
    application time (floored, at least 1), the usual setting. The other
    defaults are the settings that work best in practice: lam=0.25 for
    single mixing, lam_base=0.6 with lam_thumb=0.2 per thumbnail for multi
    mixing, and a participation rate of 0.8.
    """

    strategy: Strategy
    thumb_w: int | None = None
    thumb_h: int | None = None
    lam: float = 0.25  # thumbnail label weight in single mixing; base gets 1 - lam
    lam_base: float = 0.6  # base image label weight in multi mixing
    lam_thumb: float = 0.2  # each thumbnail's label weight in multi mixing
    num_thumbnails: int = 2  # thumbnails pasted per image in multi mixing
    participation_rate: float = 0.8  # fraction of batches that get augmented
    root_seed: int = 0
    normalize_labels: bool = False  # rescale multi-mix weights to sum to 1

    def __post_init__(self) -> None:
        if not isinstance(self.strategy, Strategy) or self.strategy is Strategy.NONE:
            raise ValueError(f"strategy must be ST, MST or MMT, got {self.strategy!r}")
        for name, value in (("thumb_w", self.thumb_w), ("thumb_h", self.thumb_h)):
            if value is not None and value < 1:
                raise ValueError(f"{name} must be at least 1, got {value}")
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"lam must be in (0, 1), got {self.lam}")
        if self.lam_base <= 0:
            raise ValueError(f"lam_base must be positive, got {self.lam_base}")
        if self.lam_thumb <= 0:
            raise ValueError(f"lam_thumb must be positive, got {self.lam_thumb}")
        if self.num_thumbnails < 1:
            raise ValueError(
                f"num_thumbnails must be at least 1, got {self.num_thumbnails}"
            )
        if not 0.0 <= self.participation_rate <= 1.0:
            raise ValueError(
                f"participation_rate must be in [0, 1], got {self.participation_rate}"
            )
        if not 0 <= self.root_seed < 2**64:
            raise ValueError(f"root_seed must be in [0, 2**64), got {self.root_seed}")

    def thumb_size_for(self, width: int, height: int) -> tuple[int, int]:
        """Effective thumbnail ``(w, h)`` for an image, bounds-checked."""
        w = self.thumb_w if self.thumb_w is not None else max(1, width // 2)
        h = self.thumb_h if self.thumb_h is not None else max(1, height // 2)
        if w > width or h > height:
            raise ValueError(
                f"thumbnail {w}x{h} does not fit inside a {width}x{height} image"
            )
        return w, h


def mix_labels(labels: list[LabelDist], weights: list[float]) -> LabelDist:
    """Weighted sum of label distributions.

    Repeated class indices accumulate by weight addition. Weights are
    applied verbatim; nothing is renormalized here.
    """
    if not labels:
        raise ValueError("nothing to mix: empty label list")
    if len(labels) != len(weights):
        raise ValueError(
            f"got {len(labels)} labels but {len(weights)} weights"
        )
    num_classes = labels[0].num_classes
    for lab in labels[1:]:
        if lab.num_classes != num_classes:
            raise ValueError(
                f"labels disagree on num_classes: {lab.num_classes} vs {num_classes}"
            )
    for weight in weights:
        if weight <= 0:
            raise ValueError(f"mixing weights must be positive, got {weight}")
    acc: dict[int, float] = {}
    for lab, weight in zip(labels, weights):
        for cls, p in lab.entries:
            acc[cls] = acc.get(cls, 0.0) + weight * p
    entries = tuple((c, w) for c, w in sorted(acc.items()) if w != 0.0)
    return LabelDist(num_classes, entries)


def multi_mix_weights(cfg: AugConfig, count: int) -> list[float]:
    """Per-source weights for multi-thumbnail mixing: base first, then one
    per thumbnail. Normalized to sum to 1 when the config asks for it."""
    raw = [cfg.lam_base] + [cfg.lam_thumb] * count
    if not cfg.normalize_labels:
        return raw
    total = math.fsum(raw)
    return [w / total for w in raw]


def self_thumbnail(
    x: np.ndarray, y: LabelDist, cfg: AugConfig, rng: RngStream
) -> tuple[np.ndarray, LabelDist, BBox]:
    """Paste the image's own thumbnail at a random spot; label unchanged."""
    x = as_image(x)
    img_h, img_w = x.shape[:2]
    w, h = cfg.thumb_size_for(img_w, img_h)
    box = sample_box(rng, img_w, img_h, w, h)
    return paste(x, thumbnail(x, w, h), box), y, box


def mixed_single(
    x1: np.ndarray,
    y1: LabelDist,
    x2: np.ndarray,
    y2: LabelDist,
    cfg: AugConfig,
    rng: RngStream,
) -> tuple[np.ndarray, LabelDist, BBox]:
    """Paste ``x2``'s thumbnail into ``x1``; labels mix as (1 - lam, lam)."""
    x1 = as_image(x1)
    x2 = as_image(x2)
    if x1.shape != x2.shape:
        raise ValueError(f"image shapes differ: {x1.shape} vs {x2.shape}")
    img_h, img_w = x1.shape[:2]
    w, h = cfg.thumb_size_for(img_w, img_h)
    box = sample_box(rng, img_w, img_h, w, h)
    mixed = paste(x1, thumbnail(x2, w, h), box)
    label = mix_labels([y1, y2], [1.0 - cfg.lam, cfg.lam])
    return mixed, label, box


def mixed_multi(
    x1: np.ndarray,
    y1: LabelDist,
    others: list[tuple[np.ndarray, LabelDist]],
    cfg: AugConfig,
    rng: RngStream,
    max_attempts: int = 100,
) -> tuple[np.ndarray, LabelDist, list[BBox]]:
    """Paste the thumbnails of several other images into ``x1``.

    The base label gets weight ``lam_base`` and every thumbnail label gets
    ``lam_thumb``, independent of box positions and areas. Weights are
    emitted verbatim unless ``cfg.normalize_labels`` rescales them to sum
    to 1. Raises :class:`thumbaug.sampling.PlacementError` when the
    disjoint placement cannot be found.
    """
    x1 = as_image(x1)
    if not others:
        raise ValueError("multi mixing needs at least one other sample")
    for xi, _ in others:
        if as_image(xi).shape != x1.shape:
            raise ValueError(
                f"image shapes differ: {np.asarray(xi).shape} vs {x1.shape}"
            )
    img_h, img_w = x1.shape[:2]
    w, h = cfg.thumb_size_for(img_w, img_h)
    boxes = sample_nonoverlapping_boxes(
        rng, len(others), img_w, img_h, w, h, max_attempts
    )
    out = x1
    for (xi, _), box in zip(others, boxes):
        out = paste(out, thumbnail(xi, w, h), box)
    weights = multi_mix_weights(cfg, len(others))
    label = mix_labels([y1] + [yi for _, yi in others], weights)
    return out, label, boxes
