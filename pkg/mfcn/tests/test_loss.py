import math

import numpy as np
import pytest
import torch

from mfcn.data import SegSample
from mfcn.loss import LossSpec, compute_loss


def make_sample(mask_rows, container):
    mask = np.asarray(mask_rows, dtype=bool)
    image = np.zeros((*mask.shape, 3), dtype=np.float32)
    return SegSample(image=image, mask=mask, container=container)


def softmax_ce(logits, target):
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max()
    log_probs = z - math.log(np.exp(z).sum())
    return -log_probs[target]


def test_perfect_predictions_drive_loss_to_zero():
    batch = [make_sample([[1, 0], [0, 1]], "bowl")]
    seg = torch.full((1, 2, 2, 2), -30.0)
    for r in range(2):
        for c in range(2):
            seg[0, int(batch[0].mask[r, c]), r, c] = 30.0
    cls = torch.tensor([[-30.0, 30.0]])  # bowl is class index 1
    loss = float(compute_loss(seg, cls, batch, LossSpec(lam=1.0)))
    assert loss < 1e-6


def test_lambda_zero_keeps_segmentation_term_only():
    rng = np.random.default_rng(0)
    batch = [make_sample(rng.random((4, 4)) > 0.5, "plate")]
    seg = torch.from_numpy(rng.normal(size=(1, 2, 4, 4)).astype(np.float32))
    cls = torch.from_numpy(rng.normal(size=(1, 2)).astype(np.float32))
    with_cls = float(compute_loss(seg, cls, batch, LossSpec(lam=1.0)))
    seg_only = float(compute_loss(seg, cls, batch, LossSpec(lam=0.0)))
    cls_ce = softmax_ce(cls[0].numpy(), 0)
    assert with_cls == pytest.approx(seg_only + cls_ce, abs=1e-6)


def test_hand_computed_batch_of_two():
    batch = [
        make_sample([[1, 0]], "plate"),
        make_sample([[0, 0]], "bowl"),
    ]
    seg = torch.tensor(
        [
            [[[0.3, -1.2]], [[0.9, 0.4]]],   # sample 0: logits per class over 1x2 pixels
            [[[2.0, 0.1]], [[-0.5, 0.7]]],   # sample 1
        ],
        dtype=torch.float32,
    )
    cls = torch.tensor([[0.25, -0.75], [1.5, 2.5]], dtype=torch.float32)

    pixel_terms = []
    for b, sample in enumerate(batch):
        for c in range(2):
            target = int(sample.mask[0, c])
            pixel_terms.append(softmax_ce([seg[b, 0, 0, c], seg[b, 1, 0, c]], target))
    expected_seg = np.mean(pixel_terms)
    expected_cls = np.mean(
        [softmax_ce(cls[0].numpy(), 0), softmax_ce(cls[1].numpy(), 1)]
    )
    loss = float(compute_loss(seg, cls, batch, LossSpec(lam=1.0)))
    assert loss == pytest.approx(expected_seg + expected_cls, abs=1e-6)


def test_lambda_one_is_sum_of_means():
    rng = np.random.default_rng(3)
    batch = [make_sample(rng.random((8, 8)) > 0.5, c) for c in ("plate", "bowl", "bowl")]
    seg = torch.from_numpy(rng.normal(size=(3, 2, 8, 8)).astype(np.float32))
    cls = torch.from_numpy(rng.normal(size=(3, 2)).astype(np.float32))
    total = float(compute_loss(seg, cls, batch, LossSpec(lam=1.0)))
    seg_term = float(compute_loss(seg, cls, batch, LossSpec(lam=0.0)))
    cls_term = total - seg_term
    manual_cls = np.mean(
        [softmax_ce(cls[i].numpy(), ("plate", "bowl").index(batch[i].container)) for i in range(3)]
    )
    assert cls_term == pytest.approx(manual_cls, abs=1e-6)


def test_shape_mismatch_rejected():
    batch = [make_sample([[1, 0]], "plate")]
    with pytest.raises(ValueError):
        compute_loss(torch.zeros(1, 2, 2, 2), torch.zeros(1, 2), batch, LossSpec())
    with pytest.raises(ValueError):
        compute_loss(torch.zeros(2, 2, 1, 2), torch.zeros(2, 2), batch, LossSpec())


def test_batch_count_checked():
    batch = [make_sample([[1, 0]], "plate")]
    with pytest.raises(ValueError, match="batch"):
        compute_loss(torch.zeros(1, 2, 1, 2), torch.zeros(1, 2), batch, LossSpec(batch_count=4))


def test_negative_lambda_rejected():
    with pytest.raises(ValueError):
        LossSpec(lam=-0.5)
