"""Joint loss: segmentation cross-entropy plus weighted classification term.

The overall objective is the batch mean of L1 + lambda * L2, with L1 the
per-pixel segmentation cross-entropy (averaged over pixels) and L2 the
container-classification cross-entropy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch.nn import functional as F

from .data import CONTAINERS, SegSample

__all__ = ["LossSpec", "compute_loss", "batch_tensors"]


@dataclass(frozen=True)
class LossSpec:
    lam: float = 1.0       # weight on the classification term
    batch_count: int = 0   # informative N; 0 means "infer from the batch"

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")


def batch_tensors(batch: list[SegSample]):
    """Stack a sample batch into (images, mask targets, class targets)."""
    images = torch.from_numpy(np.stack([s.image for s in batch])).permute(0, 3, 1, 2)
    masks = torch.from_numpy(np.stack([s.mask for s in batch])).long()
    classes = torch.tensor([CONTAINERS.index(s.container) for s in batch], dtype=torch.long)
    return images, masks, classes


def compute_loss(seg_logits, class_logits, truth: list[SegSample], spec: LossSpec):
    """Batch mean of (pixel-mean segmentation CE + lambda * classification CE)."""
    if spec.batch_count and spec.batch_count != len(truth):
        raise ValueError(f"batch holds {len(truth)} samples, spec says {spec.batch_count}")
    _, masks, classes = batch_tensors(truth)
    if seg_logits.shape[0] != len(truth) or class_logits.shape[0] != len(truth):
        raise ValueError("logit batch dimension does not match the truth batch")
    if seg_logits.shape[-2:] != masks.shape[-2:]:
        raise ValueError(
            f"segmentation logits are {tuple(seg_logits.shape[-2:])}, masks are {tuple(masks.shape[-2:])}"
        )
    seg_term = F.cross_entropy(seg_logits, masks)
    cls_term = F.cross_entropy(class_logits, classes)
    return seg_term + spec.lam * cls_term
