"""Batch orchestration: participation gating, pairing, dispatch, records.

The stream-derivation scheme used here is the replay contract. For batch
``b`` of a run with seed ``s``:

* ``(s, GATE, b)`` decides whether the batch is augmented at all,
* ``(s, PAIRING, b)`` draws the partner permutation for single mixing,
* ``(s, PARTNER, b, lane=k)`` draws the k-th partner permutation for
  multi mixing,
* ``(s, BOX, b, lane=i)`` places boxes for the sample at position ``i``.

Anything recorded in an :class:`AugRecord` can be regenerated from these
keys alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .image import BBox, as_image
from .sampling import (
    PlacementError,
    Purpose,
    bernoulli_gate,
    derive_stream,
    sample_pairing,
)
from .strategies import (
    AugConfig,
    LabelDist,
    Strategy,
    mixed_multi,
    mixed_single,
    multi_mix_weights,
    self_thumbnail,
)

__all__ = ["Sample", "Batch", "AugRecord", "AugResult", "augment_batch", "run_corpus", "DEFAULT_BATCH_SIZE"]

# Pairing locality default; label math never depends on it.
DEFAULT_BATCH_SIZE = 256


@dataclass(frozen=True, eq=False)
class Sample:
    sample_id: str
    image: np.ndarray
    label: LabelDist


@dataclass(frozen=True, eq=False)
class Batch:
    """Consecutive samples sharing image dimensions and channel count."""

    batch_index: int
    samples: tuple[Sample, ...]

    def __post_init__(self) -> None:
        if self.batch_index < 0:
            raise ValueError(f"batch_index must be non-negative, got {self.batch_index}")
        if not self.samples:
            raise ValueError("batch must contain at least one sample")
        first = self.samples[0]
        shape = as_image(first.image).shape
        seen = {first.sample_id}
        for s in self.samples[1:]:
            if s.sample_id in seen:
                raise ValueError(f"duplicate sample_id '{s.sample_id}' in batch {self.batch_index}")
            seen.add(s.sample_id)
            s_shape = as_image(s.image).shape
            if s_shape != shape:
                raise ValueError(
                    f"sample '{s.sample_id}' has shape {s_shape} but batch "
                    f"{self.batch_index} started with {shape}"
                )


@dataclass(frozen=True)
class AugRecord:
    """Provenance of one output image, sufficient for bit-exact replay.

    ``sources`` lists (sample_id, weight) pairs, base image first and then
    one entry per pasted thumbnail in box order. A pass-through record has
    strategy NONE, a single unit-weight source and no boxes.
    """

    output_id: str
    strategy_applied: Strategy
    sources: tuple[tuple[str, float], ...]
    boxes: tuple[BBox, ...]
    batch_index: int
    root_seed: int


AugResult = tuple[np.ndarray, LabelDist, AugRecord]


def _passthrough(sample: Sample, batch_index: int, root_seed: int) -> AugResult:
    record = AugRecord(
        output_id=sample.sample_id,
        strategy_applied=Strategy.NONE,
        sources=((sample.sample_id, 1.0),),
        boxes=(),
        batch_index=batch_index,
        root_seed=root_seed,
    )
    return sample.image, sample.label, record


def augment_batch(batch: Batch, cfg: AugConfig) -> list[AugResult]:
    """Apply the configured strategy to every sample of the batch, or none.

    One participation coin is drawn per batch. Outputs keep the input
    order, one record per sample. A multi-thumbnail placement failure
    downgrades only the affected sample to a pass-through record.
    """
    n = len(batch.samples)
    first = batch.samples[0].image
    img_h, img_w = first.shape[:2]
    cfg.thumb_size_for(img_w, img_h)  # fail fast on an infeasible thumbnail size

    gate_rng = derive_stream(cfg.root_seed, Purpose.GATE, batch.batch_index)
    if not bernoulli_gate(gate_rng, cfg.participation_rate):
        return [_passthrough(s, batch.batch_index, cfg.root_seed) for s in batch.samples]

    pairing: list[int] | None = None
    partner_perms: list[list[int]] = []
    if cfg.strategy is Strategy.MST:
        pairing_rng = derive_stream(cfg.root_seed, Purpose.PAIRING, batch.batch_index)
        pairing = sample_pairing(pairing_rng, n)
    elif cfg.strategy is Strategy.MMT:
        partner_perms = [
            sample_pairing(derive_stream(cfg.root_seed, Purpose.PARTNER, batch.batch_index, lane=k), n)
            for k in range(cfg.num_thumbnails)
        ]

    results: list[AugResult] = []
    for i, sample in enumerate(batch.samples):
        rng = derive_stream(cfg.root_seed, Purpose.BOX, batch.batch_index, lane=i)
        if cfg.strategy is Strategy.ST:
            image, label, box = self_thumbnail(sample.image, sample.label, cfg, rng)
            record = AugRecord(
                output_id=sample.sample_id,
                strategy_applied=Strategy.ST,
                sources=((sample.sample_id, 1.0),),
                boxes=(box,),
                batch_index=batch.batch_index,
                root_seed=cfg.root_seed,
            )
        elif cfg.strategy is Strategy.MST:
            partner = batch.samples[pairing[i]]
            image, label, box = mixed_single(
                sample.image, sample.label, partner.image, partner.label, cfg, rng
            )
            record = AugRecord(
                output_id=sample.sample_id,
                strategy_applied=Strategy.MST,
                sources=((sample.sample_id, 1.0 - cfg.lam), (partner.sample_id, cfg.lam)),
                boxes=(box,),
                batch_index=batch.batch_index,
                root_seed=cfg.root_seed,
            )
        else:
            partners = [batch.samples[perm[i]] for perm in partner_perms]
            try:
                image, label, boxes = mixed_multi(
                    sample.image,
                    sample.label,
                    [(p.image, p.label) for p in partners],
                    cfg,
                    rng,
                )
            except PlacementError:
                results.append(_passthrough(sample, batch.batch_index, cfg.root_seed))
                continue
            weights = multi_mix_weights(cfg, len(partners))
            record = AugRecord(
                output_id=sample.sample_id,
                strategy_applied=Strategy.MMT,
                sources=tuple(
                    [(sample.sample_id, weights[0])]
                    + [(p.sample_id, wt) for p, wt in zip(partners, weights[1:])]
                ),
                boxes=tuple(boxes),
                batch_index=batch.batch_index,
                root_seed=cfg.root_seed,
            )
        results.append((image, label, record))
    return results


def run_corpus(
    samples: Iterable[Sample], cfg: AugConfig, batch_size: int = DEFAULT_BATCH_SIZE
) -> Iterator[AugResult]:
    """Partition a sample stream into consecutive batches and augment each.

    The last batch may be short and is gated like any other. Output order
    matches input order and every input yields exactly one output.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be at least 1, got {batch_size}")
    buffer: list[Sample] = []
    batch_index = 0
    for sample in samples:
        buffer.append(sample)
        if len(buffer) == batch_size:
            yield from augment_batch(Batch(batch_index, tuple(buffer)), cfg)
            batch_index += 1
            buffer = []
    if buffer:
        yield from augment_batch(Batch(batch_index, tuple(buffer)), cfg)
