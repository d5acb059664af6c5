"""Frozen-model binary format.

Layout, all integers little-endian:

    magic   4 bytes  "FDM1"
    version u32      currently 1
    count   u32      number of layers
    layers  count records, each a 1-byte type tag followed by:
              1 conv        kernels tensor, then bias tensor
              2 avgpool     nothing
              3 flatten     nothing
              4 dense       weights tensor, then bias tensor
              5 activation  1 byte kind (1 relu, 2 sigmoid)
    crc     u32      CRC-32 of every preceding byte

A tensor is rank (u32), one u32 extent per axis, then the float32 payload in
row-major order. The file is self-checking: any byte flip fails the CRC.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import (
    ChecksumError,
    MagicError,
    PayloadShapeError,
    ShapeError,
    TruncatedError,
    VersionError,
)
from .layers import RELU, SIGMOID, Activation, AvgPool2D, Conv2D, Dense, Flatten
from .network import INPUT_SHAPE, Network

MAGIC = b"FDM1"
VERSION = 1

_TAG_CONV = 1
_TAG_AVGPOOL = 2
_TAG_FLATTEN = 3
_TAG_DENSE = 4
_TAG_ACTIVATION = 5

_ACT_CODES = {RELU: 1, SIGMOID: 2}
_ACT_KINDS = {code: kind for kind, code in _ACT_CODES.items()}


def _pack_tensor(out: bytearray, arr: np.ndarray) -> None:
    out += struct.pack("<I", arr.ndim)
    out += struct.pack(f"<{arr.ndim}I", *arr.shape)
    out += np.ascontiguousarray(arr, dtype="<f4").tobytes()


def save_frozen(net: Network, path) -> int:
    """Write the network to path; returns the byte count written."""
    out = bytearray()
    out += MAGIC
    out += struct.pack("<I", VERSION)
    out += struct.pack("<I", len(net.layers))
    for layer in net.layers:
        if isinstance(layer, Conv2D):
            out.append(_TAG_CONV)
            _pack_tensor(out, layer.kernels)
            _pack_tensor(out, layer.bias)
        elif isinstance(layer, AvgPool2D):
            out.append(_TAG_AVGPOOL)
        elif isinstance(layer, Flatten):
            out.append(_TAG_FLATTEN)
        elif isinstance(layer, Dense):
            out.append(_TAG_DENSE)
            _pack_tensor(out, layer.weights)
            _pack_tensor(out, layer.bias)
        elif isinstance(layer, Activation):
            out.append(_TAG_ACTIVATION)
            out.append(_ACT_CODES[layer.kind])
        else:
            raise ShapeError(f"cannot serialise layer type {type(layer).__name__}")
    out += struct.pack("<I", zlib.crc32(bytes(out)))
    Path(path).write_bytes(out)
    return len(out)


class _Reader:
    def __init__(self, data: bytes, source: str):
        self.data = data
        self.pos = 0
        self.source = source

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedError(f"{self.source}: file ends inside a declared field")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def byte(self) -> int:
        return self.take(1)[0]

    def tensor(self) -> np.ndarray:
        rank = self.u32()
        if rank < 1 or rank > 4:
            raise PayloadShapeError(f"{self.source}: tensor rank {rank} out of range")
        shape = struct.unpack(f"<{rank}I", self.take(4 * rank))
        if any(s < 1 for s in shape):
            raise PayloadShapeError(f"{self.source}: zero extent in tensor shape {shape}")
        count = int(np.prod(shape))
        if self.pos + 4 * count > len(self.data):
            raise PayloadShapeError(f"{self.source}: extents {shape} declare more data "
                                    "than the file holds")
        payload = self.take(4 * count)
        return np.frombuffer(payload, dtype="<f4").reshape(shape).copy()


def load_frozen(path, input_shape=INPUT_SHAPE) -> Network:
    """Read a frozen model back. Validates magic, version, CRC, and the
    declared structure, in that order, so corruption anywhere surfaces as a
    checksum failure rather than a garbled parse."""
    path = Path(path)
    data = path.read_bytes()
    src = str(path)
    if len(data) < 16:
        raise TruncatedError(f"{src}: {len(data)} bytes is too short for a frozen model")
    if data[:4] != MAGIC:
        raise MagicError(f"{src}: bad magic {data[:4]!r}, expected {MAGIC!r}")
    version = struct.unpack("<I", data[4:8])[0]
    if version != VERSION:
        raise VersionError(f"{src}: unsupported format version {version}")
    stored_crc = struct.unpack("<I", data[-4:])[0]
    actual_crc = zlib.crc32(data[:-4])
    if stored_crc != actual_crc:
        raise ChecksumError(f"{src}: checksum mismatch "
                            f"(stored {stored_crc:#010x}, computed {actual_crc:#010x})")

    r = _Reader(data[:-4], src)
    r.pos = 8
    n_layers = r.u32()
    layers = []
    for _ in range(n_layers):
        tag = r.byte()
        if tag == _TAG_CONV:
            kernels = r.tensor()
            bias = r.tensor()
            if kernels.ndim != 4 or kernels.shape[:2] != (3, 3):
                raise PayloadShapeError(f"{src}: conv kernels shape {kernels.shape} is not (3, 3, c_in, c_out)")
            if bias.shape != (kernels.shape[3],):
                raise PayloadShapeError(f"{src}: conv bias {bias.shape} does not match {kernels.shape[3]} filters")
            layers.append(Conv2D(kernels, bias))
        elif tag == _TAG_AVGPOOL:
            layers.append(AvgPool2D())
        elif tag == _TAG_FLATTEN:
            layers.append(Flatten())
        elif tag == _TAG_DENSE:
            weights = r.tensor()
            bias = r.tensor()
            if weights.ndim != 2:
                raise PayloadShapeError(f"{src}: dense weights shape {weights.shape} is not 2-D")
            if bias.shape != (weights.shape[0],):
                raise PayloadShapeError(f"{src}: dense bias {bias.shape} does not match {weights.shape[0]} units")
            layers.append(Dense(weights, bias))
        elif tag == _TAG_ACTIVATION:
            code = r.byte()
            if code not in _ACT_KINDS:
                raise PayloadShapeError(f"{src}: unknown activation code {code}")
            layers.append(Activation(_ACT_KINDS[code]))
        else:
            raise PayloadShapeError(f"{src}: unknown layer tag {tag}")
    if r.pos != len(r.data):
        raise PayloadShapeError(f"{src}: {len(r.data) - r.pos} trailing bytes after the last layer")
    net = Network(layers, input_shape)
    net.output_shapes()  # declared extents must chain into a valid stack
    return net


def predict(net: Network, image: np.ndarray) -> tuple[float, int]:
    """Classify one [0, 255] grayscale image already sized for the network.
    Returns (probability of open, label with the 0.5 tie going to open)."""
    image = np.asarray(image)
    h, w, _ = net.input_shape
    if image.shape != (h, w):
        raise ShapeError(f"expected a {h}x{w} image, got {image.shape}")
    x = image.astype(np.float32)[None, :, :, None] * np.float32(1.0 / 255.0)
    prob = float(net.forward(x)[0])
    return prob, int(prob >= 0.5)
