"""Pixel-raster primitives: strided thumbnails, region paste, grayscale.

Images are plain ``numpy`` arrays of shape ``(H, W, C)`` with ``uint8``
samples and ``C`` of 1 or 3. Every operation here is a pure function:
inputs are never modified and equal inputs give bit-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "AlreadyGrayscaleError",
    "BBox",
    "as_image",
    "thumbnail",
    "paste",
    "to_grayscale",
]

# BT.601 luma coefficients for the RGB -> gray reduction.
_LUMA_R, _LUMA_G, _LUMA_B = 0.299, 0.587, 0.114


class AlreadyGrayscaleError(ValueError):
    """Raised when a single-channel image is passed to :func:`to_grayscale`."""


@dataclass(frozen=True)
class BBox:
    """Axis-aligned pixel box: top-left corner ``(x, y)``, half-open extents.

    A box covers columns ``[x, x + w)`` and rows ``[y, y + h)``.
    """

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.w < 1 or self.h < 1:
            raise ValueError(f"box must span at least one pixel, got {self.w}x{self.h}")
        if self.x < 0 or self.y < 0:
            raise ValueError(f"box corner must be non-negative, got ({self.x}, {self.y})")

    @property
    def area(self) -> int:
        return self.w * self.h

    def fits_within(self, width: int, height: int) -> bool:
        """True if the box lies fully inside a ``width x height`` image."""
        return self.x + self.w <= width and self.y + self.h <= height

    def intersects(self, other: "BBox") -> bool:
        """True if the two boxes share at least one pixel."""
        return (
            self.x < other.x + other.w
            and other.x < self.x + self.w
            and self.y < other.y + other.h
            and other.y < self.y + self.h
        )

    def slices(self) -> tuple[slice, slice]:
        """``(rows, cols)`` slices addressing this box in an HxWxC array."""
        return slice(self.y, self.y + self.h), slice(self.x, self.x + self.w)


def as_image(a: np.ndarray) -> np.ndarray:
    """Validate an ``(H, W, C)`` uint8 raster and return it unchanged."""
    a = np.asarray(a)
    if a.dtype != np.uint8:
        raise ValueError(f"expected uint8 samples, got {a.dtype}")
    if a.ndim != 3:
        raise ValueError(f"expected an HxWxC array, got shape {a.shape}")
    h, w, c = a.shape
    if h < 1 or w < 1:
        raise ValueError(f"image must be at least 1x1, got {w}x{h}")
    if c not in (1, 3):
        raise ValueError(f"expected 1 or 3 channels, got {c}")
    return a


def thumbnail(x: np.ndarray, w: int, h: int) -> np.ndarray:
    """Reduce ``x`` to ``w x h`` by strided pixel picking.

    Output pixel ``(i, j)`` is source pixel ``(floor(i * H / h), floor(j * W / w))``:
    plain decimation anchored at the top-left corner, no filtering. For an
    exact integer ratio this keeps every stride-th pixel, and
    ``thumbnail(x, W, H)`` is the identity.
    """
    x = as_image(x)
    src_h, src_w = x.shape[:2]
    if w < 1 or h < 1:
        raise ValueError(f"thumbnail size must be at least 1x1, got {w}x{h}")
    if w > src_w or h > src_h:
        raise ValueError(
            f"thumbnail {w}x{h} exceeds source {src_w}x{src_h}; upsampling is not a thumbnail"
        )
    rows = (np.arange(h, dtype=np.int64) * src_h) // h
    cols = (np.arange(w, dtype=np.int64) * src_w) // w
    return x[rows[:, None], cols[None, :]]


def paste(x: np.ndarray, patch: np.ndarray, box: BBox) -> np.ndarray:
    """Return a copy of ``x`` with ``patch`` written into ``box``.

    Equivalent to masking the box out of ``x`` and filling it with the
    patch embedded at the box position; every output pixel comes from
    exactly one of the two inputs.
    """
    x = as_image(x)
    patch = as_image(patch)
    if patch.shape[2] != x.shape[2]:
        raise ValueError(
            f"channel mismatch: image has {x.shape[2]}, patch has {patch.shape[2]}"
        )
    if (patch.shape[0], patch.shape[1]) != (box.h, box.w):
        raise ValueError(
            f"patch is {patch.shape[1]}x{patch.shape[0]} but box is {box.w}x{box.h}"
        )
    if not box.fits_within(x.shape[1], x.shape[0]):
        raise ValueError(
            f"box {box} does not fit inside a {x.shape[1]}x{x.shape[0]} image"
        )
    out = x.copy()
    rows, cols = box.slices()
    out[rows, cols] = patch
    return out


def to_grayscale(x: np.ndarray) -> np.ndarray:
    """BT.601 luma of an RGB image, replicated onto all three channels.

    Per pixel: ``round(0.299 R + 0.587 G + 0.114 B)`` with round-half-up.
    Idempotent, since the coefficients sum to one.
    """
    x = as_image(x)
    if x.shape[2] == 1:
        raise AlreadyGrayscaleError("input is already single-channel")
    f = x.astype(np.float64)
    luma = _LUMA_R * f[..., 0] + _LUMA_G * f[..., 1] + _LUMA_B * f[..., 2]
    gray = np.floor(luma + 0.5).astype(np.uint8)
    return np.repeat(gray[..., None], 3, axis=2)
