"""Command-line interface: train on synthetic scenes, predict mask files."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np
from PIL import Image

from .data import generate_synthetic_dataset, write_pgm
from .loss import LossSpec
from .train import load_model, predict, save_model, train

__all__ = ["main"]


def cmd_train(args) -> dict:
    dataset = generate_synthetic_dataset(args.count, seed=args.seed)
    model = train(
        dataset,
        variant=args.variant,
        spec=LossSpec(lam=args.lam),
        epochs=args.epochs,
        lr=args.lr,
        backbone_width=args.width,
        seed=args.seed,
    )
    save_model(model, args.out)
    return {
        "variant": args.variant,
        "samples": args.count,
        "epochs": args.epochs,
        "lr": args.lr,
        "loss_history": model.loss_history,
        "out": str(args.out),
    }


def cmd_predict(args) -> dict:
    model = load_model(args.model)
    image = np.asarray(Image.open(args.image).convert("RGB"), dtype=np.float32) / 255.0
    mask, container = predict(model, image)
    write_pgm(args.out, mask)
    payload = {
        "container": container,
        "food_pixels": int(mask.sum()),
        "mask": str(args.out),
    }
    if args.class_out:
        with open(args.class_out, "w") as fh:
            json.dump({"container": container}, fh)
        payload["class_out"] = str(args.class_out)
    return payload


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mfcn", description="Toy multi-task food segmenter.")
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="train on synthetic scenes")
    tr.add_argument("--variant", choices=["A", "B", "C", "MFCN-A", "MFCN-B", "MFCN-C"], default="B")
    tr.add_argument("--count", type=int, default=500)
    tr.add_argument("--epochs", type=int, default=5)
    tr.add_argument("--lr", type=float, default=1e-3)
    tr.add_argument("--lam", type=float, default=1.0)
    tr.add_argument("--width", type=int, default=16)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--out", required=True)
    tr.set_defaults(func=cmd_train)

    pr = sub.add_parser("predict", help="segment one image, write a P5 mask")
    pr.add_argument("--model", required=True)
    pr.add_argument("--image", required=True)
    pr.add_argument("--out", required=True)
    pr.add_argument("--class-out", default=None)
    pr.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "variant", None) in ("A", "B", "C"):
        args.variant = f"MFCN-{args.variant}"
    try:
        payload = args.func(args)
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": {"message": str(exc)}}, indent=2))
        return 1
    print(json.dumps(payload, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
