"""Multi-task FCN variants: shared encoder, segmentation + classification.

Three topologies differ only in how much of the convolutional stack the
container classifier shares with the segmenter:

  variant A - the classifier branches right after the shared encoder and
              owns a private conv block (least sharing);
  variant B - stacked: the classifier reads the final pre-upsampling
              feature map, sharing every convolutional layer;
  variant C - the compromise: one more shared conv block than A, then a
              private conv block per task.

The classification head is a 128-unit hidden layer followed by a 2-way
output in all variants.
"""

from __future__ import annotations

import torch
from torch import nn

__all__ = ["VARIANTS", "Mfcn", "build_model"]

VARIANTS = ("MFCN-A", "MFCN-B", "MFCN-C")

# encoder halves the resolution three times
DOWNSAMPLE_FACTOR = 8


def _conv_block(c_in, c_out):
    return nn.Sequential(
        nn.Conv2d(c_in, c_out, kernel_size=3, padding=1),
        nn.ReLU(inplace=True),
        nn.MaxPool2d(2),
    )


def _count_params(modules) -> int:
    return sum(p.numel() for m in modules for p in m.parameters())


class Mfcn(nn.Module):
    def __init__(self, variant: str, backbone_width: int = 16):
        super().__init__()
        if variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
        if backbone_width < 1:
            raise ValueError("backbone_width must be positive")
        self.variant = variant
        self.backbone_width = backbone_width
        w = backbone_width

        self.encoder = nn.Sequential(
            _conv_block(3, w),
            _conv_block(w, 2 * w),
            _conv_block(2 * w, 4 * w),
        )
        # the two conv layers between the encoder and the upsampling stage
        self.mid1 = nn.Sequential(nn.Conv2d(4 * w, 4 * w, 3, padding=1), nn.ReLU(inplace=True))
        self.mid2 = nn.Sequential(nn.Conv2d(4 * w, 4 * w, 3, padding=1), nn.ReLU(inplace=True))
        self.seg_score = nn.Conv2d(4 * w, 2, kernel_size=1)

        # variants A and C give the classifier a private conv block; B reads
        # the stacked features directly
        if variant == "MFCN-B":
            self.cls_private = None
        else:
            self.cls_private = nn.Sequential(
                nn.Conv2d(4 * w, 4 * w, 3, padding=1), nn.ReLU(inplace=True)
            )
        self.cls_head = nn.Sequential(nn.Linear(4 * w, 128), nn.ReLU(inplace=True), nn.Linear(128, 2))

    def forward(self, x):
        if x.shape[-1] % DOWNSAMPLE_FACTOR or x.shape[-2] % DOWNSAMPLE_FACTOR:
            raise ValueError(
                f"input height/width must be divisible by {DOWNSAMPLE_FACTOR}, got {tuple(x.shape[-2:])}"
            )
        feats = self.encoder(x)
        f1 = self.mid1(feats)
        f2 = self.mid2(f1)
        score = self.seg_score(f2)
        seg_logits = nn.functional.interpolate(
            score, scale_factor=DOWNSAMPLE_FACTOR, mode="bilinear", align_corners=False
        )

        if self.variant == "MFCN-A":
            cls_in = feats
        elif self.variant == "MFCN-C":
            cls_in = f1
        else:  # MFCN-B: every conv layer is shared
            cls_in = f2
        if self.cls_private is not None:
            cls_in = self.cls_private(cls_in)
        pooled = cls_in.mean(dim=(2, 3))
        class_logits = self.cls_head(pooled)
        return seg_logits, class_logits

    # --- parameter accounting used to verify the topology contracts ---

    def shared_conv_parameters(self) -> int:
        """Conv parameters on both the segmentation and classification paths."""
        shared = [self.encoder]
        if self.variant == "MFCN-C":
            shared.append(self.mid1)
        elif self.variant == "MFCN-B":
            shared.extend([self.mid1, self.mid2])
        return _count_params(shared)

    def private_conv_parameters(self) -> dict:
        """Conv parameters reachable from exactly one task head."""
        if self.variant == "MFCN-A":
            seg = [self.mid1, self.mid2, self.seg_score]
        elif self.variant == "MFCN-C":
            seg = [self.mid2, self.seg_score]
        else:
            seg = [self.seg_score]
        cls = [] if self.cls_private is None else [self.cls_private]
        return {"segmentation": _count_params(seg), "classification": _count_params(cls)}


def build_model(variant: str, backbone_width: int = 16) -> Mfcn:
    """Construct the requested multi-task topology."""
    return Mfcn(variant, backbone_width)
