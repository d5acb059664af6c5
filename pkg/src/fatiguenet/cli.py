"""Command-line entry point.

One binary, four subcommands:

    fatiguenet train            train on a corpus, write run artifacts
    fatiguenet eval             re-evaluate a frozen model on a corpus split
    fatiguenet predict          classify a single image
    fatiguenet augment-preview  write augmented samples as PGM files

Exit codes: 0 success, 1 runtime or data failure, 2 bad arguments.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import dataio, model_io
from .augment import AugmentParams, apply_affine, sample_transform
from .errors import FatigueNetError
from .metrics import classification_report, curve_export
from .rng import STREAM_AUGMENT, Rng
from .training import TrainConfig, evaluate, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fatiguenet",
        description="Train and run the eye-closedness classifier.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model and write run artifacts")
    p_train.add_argument("--data", required=True, help="corpus root with closed/ and open/")
    p_train.add_argument("--split", type=float, default=0.8,
                         help="fraction of each class used for training (default 0.8)")
    p_train.add_argument("--epochs", type=int, default=40)
    p_train.add_argument("--batch", type=int, default=32)
    p_train.add_argument("--seed", type=int, default=42)
    p_train.add_argument("--lr", type=float, default=1e-3)
    p_train.add_argument("--augment", action="store_true",
                         help="apply random affine augmentation to training samples")
    p_train.add_argument("--out", default="run", help="artifact directory (default run/)")

    p_eval = sub.add_parser("eval", help="evaluate a frozen model on the test split")
    p_eval.add_argument("--model", required=True, help="frozen model file")
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--split", type=float, default=0.8,
                        help="train fraction; evaluation uses the remainder (default 0.8)")
    p_eval.add_argument("--seed", type=int, default=42,
                        help="split seed; match the training run to get its test set")
    p_eval.add_argument("--out", default=".", help="where to write report.txt / report.csv")

    p_pred = sub.add_parser("predict", help="classify one image")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("image", help="PGM or PNG file")

    p_aug = sub.add_parser("augment-preview", help="write augmented corpus samples as PGM")
    p_aug.add_argument("--data", required=True)
    p_aug.add_argument("--count", type=int, default=6)
    p_aug.add_argument("--seed", type=int, default=42)
    p_aug.add_argument("--out", default="preview", help="output directory (default preview/)")
    p_aug.add_argument("--rotation-range", type=float, default=AugmentParams.rotation_range)
    p_aug.add_argument("--width-shift-range", type=float, default=AugmentParams.width_shift_range)
    p_aug.add_argument("--height-shift-range", type=float, default=AugmentParams.height_shift_range)
    p_aug.add_argument("--shear-range", type=float, default=AugmentParams.shear_range)
    p_aug.add_argument("--zoom-range", type=float, default=AugmentParams.zoom_range)
    p_aug.add_argument("--no-flip", action="store_true", help="disable horizontal flipping")
    return parser


def _validate(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    # reject impossible configurations before touching any data
    if args.command in ("train", "eval") and not 0.0 < args.split < 1.0:
        parser.error(f"--split must lie strictly between 0 and 1, got {args.split}")
    if args.command == "train":
        if args.epochs < 1:
            parser.error(f"--epochs must be >= 1, got {args.epochs}")
        if args.batch < 1:
            parser.error(f"--batch must be >= 1, got {args.batch}")
        if args.lr <= 0:
            parser.error(f"--lr must be positive, got {args.lr}")
    if args.command == "augment-preview":
        if args.count < 1:
            parser.error(f"--count must be >= 1, got {args.count}")
        for name in ("rotation_range", "width_shift_range", "height_shift_range",
                     "shear_range", "zoom_range"):
            if getattr(args, name) < 0:
                parser.error(f"--{name.replace('_', '-')} must be non-negative")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    try:
        if args.command == "train":
            _cmd_train(args)
        elif args.command == "eval":
            _cmd_eval(args)
        elif args.command == "predict":
            _cmd_predict(args)
        else:
            _cmd_augment_preview(args)
    except (FatigueNetError, OSError) as exc:
        print(f"fatiguenet: {exc}", file=sys.stderr)
        return 1
    return 0


def entry() -> None:
    sys.exit(main())


def _config_text(args: argparse.Namespace, keys) -> str:
    lines = [f"command = {args.command}"]
    lines += [f"{key} = {getattr(args, key)}" for key in keys]
    return "\n".join(lines) + "\n"


def _cmd_train(args: argparse.Namespace) -> None:
    dataset = dataio.load_directory(args.data)
    train_set, test_set = dataio.stratified_split(dataset, args.split, args.seed)
    n0, n1 = dataset.class_counts()
    print(f"loaded {len(dataset)} images ({n0} closed, {n1} open); "
          f"{len(train_set)} train / {len(test_set)} test")
    config = TrainConfig(epochs=args.epochs, batch_size=args.batch, lr=args.lr,
                         seed=args.seed, augment=args.augment, log=True)
    net, records = train(train_set, test_set, config)
    result = evaluate(net, test_set)
    report_text, report_csv = classification_report(result.cm)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = model_io.save_frozen(net, out / "model.fdm")
    (out / "curves.csv").write_text(curve_export(records), newline="\n")
    (out / "report.txt").write_text(report_text, newline="\n")
    (out / "report.csv").write_text(report_csv, newline="\n")
    (out / "config.txt").write_text(
        _config_text(args, ("data", "split", "epochs", "batch", "seed", "lr", "augment", "out")),
        newline="\n")
    print(f"test accuracy {result.accuracy:.4f}; model.fdm ({written} bytes), "
          f"curves.csv, report.txt, report.csv, config.txt -> {out}")


def _cmd_eval(args: argparse.Namespace) -> None:
    net = model_io.load_frozen(args.model)
    dataset = dataio.load_directory(args.data)
    _, test_set = dataio.stratified_split(dataset, args.split, args.seed)
    result = evaluate(net, test_set)
    report_text, report_csv = classification_report(result.cm)
    print(report_text, end="")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(report_text, newline="\n")
    (out / "report.csv").write_text(report_csv, newline="\n")


def _cmd_predict(args: argparse.Namespace) -> None:
    net = model_io.load_frozen(args.model)
    image = dataio.read_image(args.image)
    h, w, _ = net.input_shape
    if image.shape != (h, w):
        image = dataio.resize_bilinear(image, h, w)
    prob, label = model_io.predict(net, image)
    print(f"{'open' if label else 'closed'} {prob:.4f}")


def _cmd_augment_preview(args: argparse.Namespace) -> None:
    dataset = dataio.load_directory(args.data)
    images, _ = dataio.image_stack(dataset)
    params = AugmentParams(
        rotation_range=args.rotation_range,
        width_shift_range=args.width_shift_range,
        height_shift_range=args.height_shift_range,
        shear_range=args.shear_range,
        zoom_range=args.zoom_range,
        horizontal_flip=not args.no_flip,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    aug_root = Rng(args.seed).derive(STREAM_AUGMENT)
    for i in range(args.count):
        image = images[i % len(images)]
        t = sample_transform(params, aug_root.derive(i), image.shape[0], image.shape[1])
        dataio.write_pgm(out / f"preview_{i:03d}.pgm", apply_affine(image, t))
    print(f"wrote {args.count} previews -> {out}")
