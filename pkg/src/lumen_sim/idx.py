"""Reader for the big-endian IDX files MNIST ships in (optionally gzipped)."""

from __future__ import annotations

import gzip
import os
import struct
from dataclasses import dataclass

import numpy as np

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801


class IdxError(ValueError):
    """Malformed IDX input; ``offset`` is the byte position of the problem."""

    def __init__(self, path, offset: int, message: str):
        super().__init__(f"{path}: {message} (byte offset {offset})")
        self.path = path
        self.offset = offset


class WrongMagicError(IdxError):
    pass


class TruncatedError(IdxError):
    pass


class CountMismatchError(IdxError):
    pass


@dataclass(frozen=True)
class IdxDataset:
    images: np.ndarray  # N x rows x cols, float64 in [0, 1]
    labels: np.ndarray  # N, uint8

    def __len__(self):
        return len(self.labels)

    def subset(self, n: int | None) -> "IdxDataset":
        if n is None:
            return self
        return IdxDataset(self.images[:n], self.labels[:n])

    def as_tuple(self):
        return self.images, self.labels


def _read(path) -> bytes:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def _header(raw: bytes, path, magic: int, n_dims: int):
    need = 4 + 4 * n_dims
    if len(raw) < 4:
        raise TruncatedError(path, len(raw), "file too short for magic number")
    (found,) = struct.unpack(">I", raw[:4])
    if found != magic:
        raise WrongMagicError(path, 0, f"wrong magic 0x{found:08x}, expected 0x{magic:08x}")
    if len(raw) < need:
        raise TruncatedError(path, len(raw), f"header needs {need} bytes")
    return struct.unpack(f">{n_dims}I", raw[4:need]), need


def read_images(path) -> np.ndarray:
    raw = _read(path)
    (n, rows, cols), off = _header(raw, path, IMAGES_MAGIC, 3)
    size = n * rows * cols
    if len(raw) - off < size:
        raise TruncatedError(path, len(raw), f"payload needs {size} bytes after header, found {len(raw) - off}")
    return np.frombuffer(raw, dtype=np.uint8, count=size, offset=off).reshape(n, rows, cols)


def read_labels(path) -> np.ndarray:
    raw = _read(path)
    (n,), off = _header(raw, path, LABELS_MAGIC, 1)
    if len(raw) - off < n:
        raise TruncatedError(path, len(raw), f"payload needs {n} bytes after header, found {len(raw) - off}")
    return np.frombuffer(raw, dtype=np.uint8, count=n, offset=off).copy()


def load_idx(images_path, labels_path) -> IdxDataset:
    """Load an image/label IDX pair; pixels are scaled to [0, 1] by 1/255."""
    images = read_images(images_path)
    labels = read_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        # the count field sits right after the magic in both files
        raise CountMismatchError(labels_path, 4, f"{labels.shape[0]} labels for {images.shape[0]} images")
    return IdxDataset(images / 255.0, labels)


def find_mnist(directory, split: str = "test") -> tuple[str, str]:
    """Paths of the MNIST image/label files in ``directory`` (gzipped or not)."""
    prefix = {"train": "train", "test": "t10k"}[split]
    out = []
    for kind in ("images-idx3-ubyte", "labels-idx1-ubyte"):
        for suffix in ("", ".gz"):
            p = os.path.join(directory, f"{prefix}-{kind}{suffix}")
            if os.path.exists(p):
                out.append(p)
                break
        else:
            raise FileNotFoundError(f"no {prefix}-{kind}[.gz] in {directory}")
    return out[0], out[1]
