"""Training, inference, and evaluation for the toy multi-task network."""

from __future__ import annotations

import numpy as np
import torch

from .data import CONTAINERS, SegSample
from .loss import LossSpec, batch_tensors, compute_loss
from .model import Mfcn, build_model

__all__ = ["train", "predict", "evaluate", "miou_masks", "save_model", "load_model"]


def miou_masks(pred: np.ndarray, truth: np.ndarray) -> float:
    """Two-class mean IoU of a single mask pair; absent classes score 1."""
    pred = np.asarray(pred, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if pred.shape != truth.shape:
        raise ValueError(f"mask dimensions differ: {pred.shape} vs {truth.shape}")
    scores = []
    for food in (True, False):
        p = pred if food else ~pred
        t = truth if food else ~truth
        union = int(np.count_nonzero(p | t))
        scores.append(int(np.count_nonzero(p & t)) / union if union else 1.0)
    return float(np.mean(scores))


def train(
    dataset: list[SegSample],
    variant: str = "MFCN-B",
    spec: LossSpec = LossSpec(),
    epochs: int = 5,
    lr: float = 1e-5,
    *,
    backbone_width: int = 16,
    batch_size: int = 16,
    seed: int = 0,
) -> Mfcn:
    """Train a fresh model with Adam; per-epoch mean losses land on
    `model.loss_history`.

    The default learning rate matches the full-scale recipe; toy runs on
    synthetic data usually pass a larger one.
    """
    if not dataset:
        raise ValueError("cannot train on an empty dataset")
    torch.manual_seed(seed)
    model = build_model(variant, backbone_width)
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    order_rng = np.random.default_rng(seed)

    history = []
    model.train()
    for _ in range(epochs):
        order = order_rng.permutation(len(dataset))
        losses = []
        for start in range(0, len(dataset), batch_size):
            batch = [dataset[i] for i in order[start:start + batch_size]]
            images, _, _ = batch_tensors(batch)
            seg_logits, class_logits = model(images)
            loss = compute_loss(seg_logits, class_logits, batch, spec)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            losses.append(float(loss.detach()))
        history.append(float(np.mean(losses)))
    model.loss_history = history
    model.eval()
    return model


def predict(model: Mfcn, image: np.ndarray):
    """Food mask and container class for one RGB image in [0, 1]."""
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError("image must be HxWx3")
    model.eval()
    with torch.no_grad():
        x = torch.from_numpy(np.ascontiguousarray(image, dtype=np.float32))
        seg_logits, class_logits = model(x.permute(2, 0, 1).unsqueeze(0))
        mask = seg_logits.argmax(dim=1)[0].numpy().astype(bool)
        container = CONTAINERS[int(class_logits.argmax(dim=1)[0])]
    return mask, container


def evaluate(model: Mfcn, dataset: list[SegSample]) -> dict:
    """Aggregate IoU per class, their mean, and container accuracy."""
    if not dataset:
        raise ValueError("cannot evaluate on an empty dataset")
    inter = {True: 0, False: 0}
    union = {True: 0, False: 0}
    correct = 0
    for sample in dataset:
        mask, container = predict(model, sample.image)
        truth = sample.mask
        for food in (True, False):
            p = mask if food else ~mask
            t = truth if food else ~truth
            inter[food] += int(np.count_nonzero(p & t))
            union[food] += int(np.count_nonzero(p | t))
        correct += container == sample.container
    iou_food = inter[True] / union[True] if union[True] else 1.0
    iou_background = inter[False] / union[False] if union[False] else 1.0
    return {
        "iou_food": iou_food,
        "iou_background": iou_background,
        "miou": (iou_food + iou_background) / 2.0,
        "container_accuracy": correct / len(dataset),
    }


def save_model(model: Mfcn, path) -> None:
    torch.save(
        {
            "variant": model.variant,
            "backbone_width": model.backbone_width,
            "state_dict": model.state_dict(),
            "loss_history": getattr(model, "loss_history", []),
        },
        path,
    )


def load_model(path) -> Mfcn:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    model = build_model(payload["variant"], payload["backbone_width"])
    model.load_state_dict(payload["state_dict"])
    model.loss_history = payload.get("loss_history", [])
    model.eval()
    return model
