"""Toy multi-task FCN: food segmentation plus container classification."""

from .data import SegSample, generate_synthetic_dataset, write_pgm
from .loss import LossSpec, compute_loss
from .model import VARIANTS, Mfcn, build_model
from .train import evaluate, load_model, miou_masks, predict, save_model, train

__version__ = "0.1.0"
