"""Trained weights and their on-disk format.

A weight file is a JSON manifest plus a raw blob of little-endian float32
values.  The blob holds, for every weighted layer in order, the weight
tensor followed by the bias vector, each row-major.  The manifest records
shapes, per-layer scales (max |w|) and a SHA-256 checksum of the blob.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

from .network import Conv2D, Dense, NetworkSpec

FORMAT = "lumen-sim-weights"
FORMAT_VERSION = 1


class WeightFileError(ValueError):
    pass


def expected_shapes(spec: NetworkSpec):
    out = []
    for _, layer in spec.parametric_layers():
        if isinstance(layer, Dense):
            out.append(((layer.n_in, layer.n_out), (layer.n_out,)))
        elif isinstance(layer, Conv2D):
            out.append(((layer.kh, layer.kw, layer.cin, layer.cout), (layer.cout,)))
    return out


@dataclass(frozen=True)
class WeightSet:
    """Weights (Dense: ``n_in x n_out``; Conv2D: ``Kh x Kw x Cin x Cout``) and biases."""

    weights: tuple
    biases: tuple

    def __post_init__(self):
        w = tuple(np.array(a, dtype=np.float64) for a in self.weights)
        b = tuple(np.array(a, dtype=np.float64) for a in self.biases)
        if len(w) != len(b):
            raise ValueError("weights and biases must pair up")
        for a in w + b:
            if not np.all(np.isfinite(a)):
                raise ValueError("weight set contains non-finite values")
            a.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", b)

    def check(self, spec: NetworkSpec) -> "WeightSet":
        shapes = expected_shapes(spec)
        if len(shapes) != len(self.weights):
            raise ValueError(f"network has {len(shapes)} weighted layers, weight set has {len(self.weights)}")
        for i, ((ws, bs), w, b) in enumerate(zip(shapes, self.weights, self.biases)):
            if w.shape != ws or b.shape != bs:
                raise ValueError(f"weighted layer {i}: expected {ws}/{bs}, got {w.shape}/{b.shape}")
        return self

    def scales(self) -> list[float]:
        return [float(np.max(np.abs(w))) if w.size else 0.0 for w in self.weights]

    def equals(self, other: "WeightSet") -> bool:
        return (len(self.weights) == len(other.weights)
                and all(np.array_equal(a, b) for a, b in zip(self.weights, other.weights))
                and all(np.array_equal(a, b) for a, b in zip(self.biases, other.biases)))


def init_weights(spec: NetworkSpec, seed: int = 0) -> WeightSet:
    """Glorot-uniform weights and zero biases."""
    rng = np.random.default_rng(seed)
    ws, bs = [], []
    for wshape, bshape in expected_shapes(spec):
        fan_in = int(np.prod(wshape[:-1]))
        fan_out = wshape[-1] * (int(np.prod(wshape[:-2])) if len(wshape) == 4 else 1)
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        ws.append(rng.uniform(-limit, limit, size=wshape))
        bs.append(np.zeros(bshape))
    return WeightSet(tuple(ws), tuple(bs))


def _blob(ws: WeightSet) -> bytes:
    parts = []
    for w, b in zip(ws.weights, ws.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f4").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f4").tobytes())
    return b"".join(parts)


def save_weights(ws: WeightSet, manifest_path, spec: NetworkSpec | None = None) -> str:
    """Write ``<name>.json`` and its ``<name>.bin`` blob; returns the manifest path."""
    manifest_path = os.fspath(manifest_path)
    base, _ = os.path.splitext(manifest_path)
    blob_path = base + ".bin"
    blob = _blob(ws)
    os.makedirs(os.path.dirname(os.path.abspath(manifest_path)), exist_ok=True)
    manifest = {
        "format": FORMAT,
        "format_version": FORMAT_VERSION,
        "network": spec.name if spec is not None else "",
        "dtype": "float32",
        "byteorder": "little",
        "blob": os.path.basename(blob_path),
        "sha256": hashlib.sha256(blob).hexdigest(),
        "layers": [
            {"weight_shape": list(w.shape), "bias_shape": list(b.shape), "scale": s}
            for w, b, s in zip(ws.weights, ws.biases, ws.scales())
        ],
    }
    with open(blob_path, "wb") as f:
        f.write(blob)
    with open(manifest_path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest_path


def load_weights(manifest_path) -> WeightSet:
    manifest_path = os.fspath(manifest_path)
    try:
        with open(manifest_path) as f:
            manifest = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise WeightFileError(f"cannot read weight manifest {manifest_path}: {exc}") from None
    if manifest.get("format") != FORMAT or manifest.get("format_version") != FORMAT_VERSION:
        raise WeightFileError(f"{manifest_path}: not a {FORMAT} v{FORMAT_VERSION} manifest")
    blob_path = os.path.join(os.path.dirname(manifest_path), manifest["blob"])
    with open(blob_path, "rb") as f:
        blob = f.read()
    if hashlib.sha256(blob).hexdigest() != manifest["sha256"]:
        raise WeightFileError(f"{blob_path}: checksum mismatch")
    values = np.frombuffer(blob, dtype="<f4").astype(np.float64)
    ws, bs, pos = [], [], 0
    for layer in manifest["layers"]:
        for shape, dest in ((layer["weight_shape"], ws), (layer["bias_shape"], bs)):
            n = int(np.prod(shape))
            if pos + n > values.size:
                raise WeightFileError(f"{blob_path}: blob shorter than manifest shapes")
            dest.append(values[pos:pos + n].reshape(shape))
            pos += n
    if pos != values.size:
        raise WeightFileError(f"{blob_path}: {values.size - pos} trailing values")
    return WeightSet(tuple(ws), tuple(bs))


def to_float32(ws: WeightSet) -> WeightSet:
    """Round to the on-disk precision, as a save/load round trip would."""
    f = lambda a: np.asarray(a, dtype=np.float32).astype(np.float64)  # noqa: E731
    return WeightSet(tuple(map(f, ws.weights)), tuple(map(f, ws.biases)))
