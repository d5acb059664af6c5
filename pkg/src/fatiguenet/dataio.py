"""Image decoding and dataset plumbing.

A corpus is a directory with two subdirectories, `closed/` (label 0) and
`open/` (label 1), holding 8-bit PGM or PNG files. Images are kept as
float32 grids of intensities in [0, 255] at their native size; resizing to
the network input happens explicitly via resize_bilinear / image_stack.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ConfigError, DecodeError, DegenerateDataError, ShapeError
from .rng import STREAM_SPLIT, Rng

CLASS_DIRS = (("closed", 0), ("open", 1))
IMAGE_SUFFIXES = (".pgm", ".png")

# ITU-R 601 luminance weights for RGB input
_LUMA = np.array([0.299, 0.587, 0.114], dtype=np.float64)


@dataclass(frozen=True)
class LabeledImage:
    pixels: np.ndarray  # (H, W) float32, values in [0, 255]
    label: int          # 0 closed, 1 open
    source: str         # path or description, for error messages


@dataclass(frozen=True)
class Dataset:
    items: tuple[LabeledImage, ...]

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def class_counts(self) -> tuple[int, int]:
        n1 = sum(item.label for item in self.items)
        return (len(self.items) - n1, n1)


def decode_image(data: bytes, source: str = "<memory>") -> np.ndarray:
    """Decode PGM (P5) or PNG bytes to a (H, W) float32 grid in [0, 255].

    RGB input is collapsed to luminance 0.299 R + 0.587 G + 0.114 B; the
    fractional result is kept, not re-quantised.
    """
    if data[:2] == b"P5":
        return _decode_pgm(data, source)
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return _decode_png(data, source)
    raise DecodeError(f"{source}: not a P5 PGM or PNG file")


def read_image(path) -> np.ndarray:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DecodeError(f"{path}: {exc}") from exc
    return decode_image(data, str(path))


def _decode_pgm(data: bytes, source: str) -> np.ndarray:
    # header: "P5" <ws> width <ws> height <ws> maxval <single ws> raster,
    # with '#' comments allowed between tokens
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if pos == start:
            raise DecodeError(f"{source}: truncated PGM header")
        fields.append(data[start:pos])
    pos += 1  # exactly one whitespace byte separates maxval from the raster
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError as exc:
        raise DecodeError(f"{source}: malformed PGM header") from exc
    if width < 1 or height < 1:
        raise DecodeError(f"{source}: bad PGM dimensions {width}x{height}")
    if maxval != 255:
        raise DecodeError(f"{source}: only maxval 255 PGM is supported, got {maxval}")
    raster = data[pos:pos + width * height]
    if len(raster) != width * height:
        raise DecodeError(f"{source}: PGM raster truncated "
                          f"({len(raster)} of {width * height} bytes)")
    grid = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return grid.astype(np.float32)


def _decode_png(data: bytes, source: str) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(data)) as img:
            img.load()
            mode = img.mode
            arr = np.asarray(img)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DecodeError(f"{source}: {exc}") from exc
    if mode == "L":
        return arr.astype(np.float32)
    if mode == "RGB":
        return (arr.astype(np.float64) @ _LUMA).astype(np.float32)
    raise DecodeError(f"{source}: unsupported PNG mode {mode!r}, expected 8-bit gray or RGB")


def write_pgm(path, image: np.ndarray) -> None:
    """Write a [0, 255] grid as a binary P5 file, rounding to 8 bits."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise ShapeError(f"expected a 2-D image, got shape {image.shape}")
    h, w = image.shape
    raster = np.clip(np.rint(image), 0, 255).astype(np.uint8)
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + raster.tobytes())


def resize_bilinear(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample with half-pixel centre alignment.

    Source coordinate for output index i is (i + 0.5) * in/out - 0.5, clamped
    to the frame, so a same-size resize is an exact identity.
    """
    image = np.asarray(image)
    if image.ndim != 2:
        raise ShapeError(f"expected a 2-D image, got shape {image.shape}")
    if out_h < 1 or out_w < 1:
        raise ShapeError(f"bad target size {out_h}x{out_w}")
    h, w = image.shape
    ys = np.clip((np.arange(out_h, dtype=np.float64) + 0.5) * (h / out_h) - 0.5, 0, h - 1)
    xs = np.clip((np.arange(out_w, dtype=np.float64) + 0.5) * (w / out_w) - 0.5, 0, w - 1)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    img = image.astype(np.float64)
    top = img[np.ix_(y0, x0)] * (1 - fx) + img[np.ix_(y0, x1)] * fx
    bot = img[np.ix_(y1, x0)] * (1 - fx) + img[np.ix_(y1, x1)] * fx
    out = top * (1 - fy) + bot * fy
    return out.astype(image.dtype if image.dtype.kind == "f" else np.float32)


def load_directory(root) -> Dataset:
    """Load a class-per-directory corpus, ordered by path within each class."""
    root = Path(root)
    items = []
    for name, label in CLASS_DIRS:
        class_dir = root / name
        if not class_dir.is_dir():
            raise DegenerateDataError(f"{root}: missing class directory {name}/")
        paths = sorted(p for p in class_dir.iterdir()
                       if p.suffix.lower() in IMAGE_SUFFIXES)
        if not paths:
            raise DegenerateDataError(f"{class_dir}: no .pgm or .png images")
        for p in paths:
            items.append(LabeledImage(read_image(p), label, str(p)))
    return Dataset(tuple(items))


def stratified_split(dataset: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Split into (train, test), taking ceil(fraction * n) of each class for
    train via a seeded shuffle. Original path order is kept within each side."""
    if not 0.0 < fraction <= 1.0:
        raise ConfigError(f"split fraction must be in (0, 1], got {fraction}")
    split_rng = Rng(seed).derive(STREAM_SPLIT)
    train_idx, test_idx = [], []
    for label in (0, 1):
        idx = np.flatnonzero(np.array([it.label == label for it in dataset.items]))
        if idx.size == 0:
            raise DegenerateDataError(f"dataset has no samples of class {label}")
        n_train = int(np.ceil(fraction * idx.size))
        order = split_rng.derive(label).permutation(idx.size)
        train_idx.extend(idx[order[:n_train]])
        test_idx.extend(idx[order[n_train:]])
    train = Dataset(tuple(dataset.items[i] for i in sorted(train_idx)))
    test = Dataset(tuple(dataset.items[i] for i in sorted(test_idx)))
    return train, test


def batch_indices(n: int, batch_size: int, rng: Rng) -> list[np.ndarray]:
    """Shuffled contiguous index batches; a short final batch is kept."""
    if batch_size < 1:
        raise ConfigError(f"batch size must be positive, got {batch_size}")
    if n < 1:
        raise DegenerateDataError("cannot batch an empty dataset")
    order = rng.permutation(n)
    return [order[i:i + batch_size] for i in range(0, n, batch_size)]


def batches(dataset: Dataset, batch_size: int, rng: Rng) -> list[list[LabeledImage]]:
    """Shuffled batches of dataset items; every item appears exactly once."""
    return [[dataset.items[i] for i in idx]
            for idx in batch_indices(len(dataset), batch_size, rng)]


def image_stack(dataset: Dataset, side: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Resize every item to side x side and stack: (N, side, side) float32 in
    [0, 255] plus the (N,) int64 label vector."""
    if len(dataset) == 0:
        raise DegenerateDataError("cannot stack an empty dataset")
    images = np.stack([
        item.pixels if item.pixels.shape == (side, side)
        else resize_bilinear(item.pixels, side, side)
        for item in dataset.items
    ]).astype(np.float32)
    labels = np.array([item.label for item in dataset.items], dtype=np.int64)
    return images, labels
