"""Deterministic thumbnail-pasting image augmentation.

Three transforms over uint8 HxWxC rasters: pasting an image's own strided
thumbnail into itself (label unchanged), pasting another image's thumbnail
with weighted label mixing, and pasting several disjoint thumbnails.
Batch orchestration is seeded and fully replayable from the emitted
provenance records.
"""

from .image import AlreadyGrayscaleError, BBox, as_image, paste, thumbnail, to_grayscale
from .image_io import CodecError, load_image, save_image
from .pipeline import (
    AugRecord,
    Batch,
    DEFAULT_BATCH_SIZE,
    Sample,
    augment_batch,
    run_corpus,
)
from .sampling import (
    PlacementError,
    Purpose,
    RngStream,
    bernoulli_gate,
    derive_stream,
    sample_box,
    sample_nonoverlapping_boxes,
    sample_pairing,
)
from .strategies import (
    AugConfig,
    LabelDist,
    Strategy,
    mix_labels,
    mixed_multi,
    mixed_single,
    self_thumbnail,
)

__version__ = "0.1.0"

__all__ = [
    "AlreadyGrayscaleError",
    "AugConfig",
    "AugRecord",
    "BBox",
    "Batch",
    "CodecError",
    "DEFAULT_BATCH_SIZE",
    "LabelDist",
    "PlacementError",
    "Purpose",
    "RngStream",
    "Sample",
    "Strategy",
    "as_image",
    "augment_batch",
    "bernoulli_gate",
    "derive_stream",
    "load_image",
    "mix_labels",
    "mixed_multi",
    "mixed_single",
    "paste",
    "run_corpus",
    "sample_box",
    "sample_nonoverlapping_boxes",
    "sample_pairing",
    "save_image",
    "self_thumbnail",
    "thumbnail",
    "to_grayscale",
]
