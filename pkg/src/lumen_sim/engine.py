"""Forward inference on the ideal and photonic paths, evaluation and training.

The photonic path programs each weighted layer once (weights -> device
phases -> realized device weights) and then streams activations through:

1. activations are encoded as optical power ``x * p_fullscale``;
2. each multiplier scales its input by its realized weight;
3. a balanced photodetector pair sums the weighted powers into a current;
4. detector noise is added per summation event;
5. the current is decoded back to signal units, the bias is added
   electronically and the EOM nonlinearity is applied where the network
   has an ``Activation``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .devices import (
    MRR,
    DeviceParams,
    EOMParams,
    calibrate,
    calibration_range,
    check_backend,
    eom_activation,
    eom_activation_grad,
    mrr_weight,
    mzi_pair_weight,
    responsivity,
)
from .network import Activation, Conv2D, Dense, Flatten, MaxPool, NetworkSpec
from .noise import NoiseConfig, RngStream, add_noise
from .weights import WeightSet, init_weights

log = logging.getLogger(__name__)

IDEAL = "ideal"
CHUNK = 256  # evaluation batch; fixed so results do not depend on worker count


class NumericError(ArithmeticError):
    """Non-finite values during training or inference."""


@dataclass(frozen=True)
class EncodingConfig:
    p_fullscale: float = 1e-4  # W of optical power per unit activation
    weight_scale_per_layer: tuple | None = None  # None: max|w| / realizable limit

    def __post_init__(self):
        if not self.p_fullscale > 0:
            raise ValueError(f"p_fullscale must be positive, got {self.p_fullscale}")
        if self.weight_scale_per_layer is not None:
            scales = tuple(float(s) for s in self.weight_scale_per_layer)
            if any(not s > 0 for s in scales):
                raise ValueError("weight scales must be positive")
            object.__setattr__(self, "weight_scale_per_layer", scales)


@dataclass(frozen=True)
class AccuracyReport:
    n_samples: int
    n_correct: int
    backend: str
    noise: NoiseConfig
    seed: int
    n_clipped: int = 0

    @property
    def accuracy(self) -> float:
        return self.n_correct / self.n_samples


def _check_sequential(spec: NetworkSpec):
    if not spec.is_sequential():
        raise ValueError(f"network {spec.name!r} uses census-only layers; it cannot be executed")


def _batched(spec: NetworkSpec, x):
    x = np.asarray(x, dtype=np.float64)
    single = x.shape == spec.input_shape
    if single:
        x = x[None]
    if x.shape[1:] != spec.input_shape:
        raise ValueError(f"input shape {x.shape[1:]} does not match network input {spec.input_shape}")
    return x, single


# -- ideal path ----------------------------------------------------------------

def forward_ideal(spec: NetworkSpec, w: WeightSet, x, eom: EOMParams = EOMParams()):
    """Noise-free logits for one input or a batch (leading axis)."""
    _check_sequential(spec)
    w.check(spec)
    h, single = _batched(spec, x)
    k = 0
    for layer in spec.layers:
        if isinstance(layer, Dense):
            h = h @ w.weights[k] + w.biases[k]
            k += 1
        elif isinstance(layer, Conv2D):
            h = numerics.conv2d(h, w.weights[k], layer.stride, layer.padding) + w.biases[k]
            k += 1
        elif isinstance(layer, MaxPool):
            h = numerics.maxpool2d(h, layer.size, layer.stride, layer.padding)
        elif isinstance(layer, Flatten):
            h = h.reshape(h.shape[0], -1)
        elif isinstance(layer, Activation):
            h = eom_activation(h, eom)
    return h[0] if single else h


# -- photonic path -------------------------------------------------------------

@dataclass
class _ProgrammedLayer:
    layer_index: int
    device_weights: np.ndarray  # realized weights, fan_in x units
    scale: float
    bias: np.ndarray
    n_clipped: int


@dataclass
class PhotonicModel:
    """A network whose weights have been programmed onto one device backend."""

    spec: NetworkSpec
    backend: str
    devices: DeviceParams
    encoding: EncodingConfig
    layers: dict = field(default_factory=dict)  # top-level layer index -> _ProgrammedLayer

    @property
    def n_clipped(self) -> int:
        return sum(p.n_clipped for p in self.layers.values())

    @classmethod
    def program(cls, spec: NetworkSpec, w: WeightSet, backend: str,
                devices: DeviceParams = DeviceParams(), encoding: EncodingConfig = EncodingConfig(),
                calibrate_with: DeviceParams | None = None) -> "PhotonicModel":
        """Calibrate every weight to a phase and record the weight actually realized.

        ``calibrate_with`` sets the nominal device parameters the phases are
        solved against; the realized weights always use ``devices``.  They
        differ when modelling uncompensated device imperfections.
        """
        _check_sequential(spec)
        backend = check_backend(backend)
        w.check(spec)
        nominal = (calibrate_with or devices).multiplier(backend)
        actual = devices.multiplier(backend)
        limit = calibration_range(backend, nominal).symmetric_limit
        explicit = encoding.weight_scale_per_layer
        if explicit is not None and len(explicit) != len(w.weights):
            raise ValueError(f"{len(explicit)} weight scales given for {len(w.weights)} weighted layers")
        model = cls(spec, backend, devices, encoding)
        for k, (idx, _) in enumerate(spec.parametric_layers()):
            W = w.weights[k]
            if explicit is not None:
                scale = explicit[k]
                target = W / scale
            else:
                peak = float(np.max(np.abs(W))) if W.size else 0.0
                scale = peak / limit if peak > 0 else 1.0
                # in range by construction; absorb the last-ulp rounding of W / scale
                target = np.clip(W / scale, -limit, limit)
            phase, _, clipped = calibrate(target, backend, nominal)
            if backend == MRR:
                realized = mrr_weight(phase, actual)
            else:
                realized = mzi_pair_weight(phase[..., 0], phase[..., 1], actual)
            realized = np.asarray(realized).reshape(-1, W.shape[-1])
            model.layers[idx] = _ProgrammedLayer(idx, realized, scale, w.biases[k], int(np.sum(clipped)))
        if model.n_clipped:
            log.info("%d weights clipped to the realizable range", model.n_clipped)
        return model

    def _detect(self, prog: _ProgrammedLayer, x, noise: NoiseConfig, seed: int, first: int):
        """Optical dot products for a batch ``x`` (N x ... x fan_in) -> signal units."""
        if np.any(x < 0):
            raise ValueError(f"layer {prog.layer_index}: negative activation cannot be encoded as optical power")
        pd = self.devices.photodiode
        if noise.photodiode != pd:
            noise = noise.with_(photodiode=pd)
        R = responsivity(pd)
        p_fs = self.encoding.p_fullscale
        current = R * ((x * p_fs) @ prog.device_weights)
        if noise.active:
            draws = np.empty_like(current)
            for n in range(current.shape[0]):
                stream = RngStream(seed, first + n, prog.layer_index)
                draws[n] = stream.normal(current.shape[1:])
            current = add_noise(current, noise, draws)
        return current / (R * p_fs) * prog.scale + prog.bias

    def forward(self, x, noise: NoiseConfig = NoiseConfig(enabled=False), seed: int = 0,
                first_sample: int = 0):
        """Logits for one input or a batch; sample ``n`` of the batch uses
        noise stream ``first_sample + n``."""
        h, single = _batched(self.spec, x)
        eom = self.devices.eom
        for idx, layer in enumerate(self.spec.layers):
            if isinstance(layer, Dense):
                h = self._detect(self.layers[idx], h, noise, seed, first_sample)
            elif isinstance(layer, Conv2D):
                cols = numerics.im2col(h, layer.kh, layer.kw, layer.stride, layer.padding)
                h = self._detect(self.layers[idx], cols, noise, seed, first_sample)
            elif isinstance(layer, MaxPool):
                h = numerics.maxpool2d(h, layer.size, layer.stride, layer.padding)
            elif isinstance(layer, Flatten):
                h = h.reshape(h.shape[0], -1)
            elif isinstance(layer, Activation):
                h = eom_activation(h, eom)
        if not np.all(np.isfinite(h)):
            raise NumericError("non-finite logits on the photonic path")
        return h[0] if single else h


def forward_photonic(spec: NetworkSpec, w: WeightSet, x, backend: str,
                     enc: EncodingConfig = EncodingConfig(),
                     noise: NoiseConfig = NoiseConfig(enabled=False),
                     rng: RngStream = RngStream(0), devices: DeviceParams = DeviceParams()):
    """Logits computed through calibrated photonic devices and noisy detectors."""
    model = PhotonicModel.program(spec, w, backend, devices, enc)
    return model.forward(x, noise, rng.global_seed, rng.sample_index)


# -- evaluation ----------------------------------------------------------------

def _as_inputs(spec: NetworkSpec, images):
    images = np.asarray(images, dtype=np.float64)
    return images.reshape((images.shape[0],) + spec.input_shape)


def predict(spec, w, images, backend=IDEAL, enc=EncodingConfig(), noise=NoiseConfig(enabled=False),
            seed=0, devices=DeviceParams(), workers=1, model=None):
    """Class predictions for ``images``; fixed chunking keeps results worker-independent."""
    x = _as_inputs(spec, images)
    if backend == IDEAL:
        run = lambda lo: forward_ideal(spec, w, x[lo:lo + CHUNK], devices.eom)  # noqa: E731
    else:
        model = model or PhotonicModel.program(spec, w, backend, devices, enc)
        run = lambda lo: model.forward(x[lo:lo + CHUNK], noise, seed, lo)  # noqa: E731
    starts = range(0, x.shape[0], CHUNK)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            logits = list(ex.map(run, starts))
    else:
        logits = [run(lo) for lo in starts]
    return np.concatenate([numerics.argmax(l, axis=1) for l in logits])


def evaluate(spec, w, dataset, backend=IDEAL, enc=EncodingConfig(), noise=NoiseConfig(enabled=False),
             seed=0, devices=DeviceParams(), workers=1, model=None) -> AccuracyReport:
    """Top-1 accuracy of ``spec`` with weights ``w`` on ``(images, labels)``."""
    images, labels = dataset
    labels = np.asarray(labels)
    if len(images) == 0:
        raise ValueError("dataset is empty")
    if len(images) != len(labels):
        raise ValueError(f"{len(images)} images but {len(labels)} labels")
    if backend != IDEAL:
        backend = check_backend(backend)
        model = model or PhotonicModel.program(spec, w, backend, devices, enc)
    pred = predict(spec, w, images, backend, enc, noise, seed, devices, workers, model)
    return AccuracyReport(len(labels), int(np.sum(pred == labels)), backend, noise, seed,
                          model.n_clipped if model is not None else 0)


# -- training -------------------------------------------------------------------

def _col2im(dcols, x_shape, kh, kw, stride, padding):
    n, h, w_, c = x_shape
    top, bottom = numerics.same_padding(h, kh, stride) if padding == "same" else (0, 0)
    left, right = numerics.same_padding(w_, kw, stride) if padding == "same" else (0, 0)
    ho, wo = dcols.shape[1:3]
    dcols = dcols.reshape(n, ho, wo, kh, kw, c)
    dx = np.zeros((n, h + top + bottom, w_ + left + right, c))
    for i in range(kh):
        for j in range(kw):
            dx[:, i:i + stride * ho:stride, j:j + stride * wo:stride, :] += dcols[:, :, :, i, j, :]
    return dx[:, top:top + h, left:left + w_, :]


def _maxpool_backward(x, grad, size, stride, padding):
    stride = size if stride is None else stride
    n, h, w_, c = x.shape
    top, bottom = numerics.same_padding(h, size, stride) if padding == "same" else (0, 0)
    left, right = numerics.same_padding(w_, size, stride) if padding == "same" else (0, 0)
    xp = np.pad(x, [(0, 0), (top, bottom), (left, right), (0, 0)], constant_values=-np.inf)
    ho, wo = grad.shape[1:3]
    win = np.lib.stride_tricks.sliding_window_view(xp, (size, size), axis=(1, 2))
    win = win[:, ::stride, ::stride][:, :ho, :wo]  # n, ho, wo, c, size, size
    arg = win.reshape(n, ho, wo, c, size * size).argmax(axis=-1)
    dx = np.zeros_like(xp)
    for i in range(size):
        for j in range(size):
            mask = arg == i * size + j
            dx[:, i:i + stride * ho:stride, j:j + stride * wo:stride, :] += grad * mask
    return dx[:, top:top + h, left:left + w_, :]


def _forward_train(spec, params, x, eom):
    cache = []
    h = x
    k = 0
    for layer in spec.layers:
        if isinstance(layer, Dense):
            cache.append(h)
            h = h @ params[2 * k] + params[2 * k + 1]
            k += 1
        elif isinstance(layer, Conv2D):
            cols = numerics.im2col(h, layer.kh, layer.kw, layer.stride, layer.padding)
            cache.append((h.shape, cols))
            h = cols @ params[2 * k].reshape(-1, layer.cout) + params[2 * k + 1]
            k += 1
        elif isinstance(layer, MaxPool):
            cache.append(h)
            h = numerics.maxpool2d(h, layer.size, layer.stride, layer.padding)
        elif isinstance(layer, Flatten):
            cache.append(h.shape)
            h = h.reshape(h.shape[0], -1)
        elif isinstance(layer, Activation):
            cache.append(h)
            h = eom_activation(h, eom)
        else:
            cache.append(None)
    return h, cache


def _backward(spec, params, cache, grad, eom):
    grads = [None] * len(params)
    k = len(params) // 2
    for layer, c in zip(reversed(spec.layers), reversed(cache)):
        if isinstance(layer, Dense):
            k -= 1
            grads[2 * k] = c.T @ grad
            grads[2 * k + 1] = grad.sum(axis=0)
            grad = grad @ params[2 * k].T
        elif isinstance(layer, Conv2D):
            k -= 1
            x_shape, cols = c
            g2 = grad.reshape(-1, layer.cout)
            grads[2 * k] = (cols.reshape(-1, cols.shape[-1]).T @ g2).reshape(params[2 * k].shape)
            grads[2 * k + 1] = g2.sum(axis=0)
            dcols = grad @ params[2 * k].reshape(-1, layer.cout).T
            grad = _col2im(dcols, x_shape, layer.kh, layer.kw, layer.stride, layer.padding)
        elif isinstance(layer, MaxPool):
            grad = _maxpool_backward(c, grad, layer.size, layer.stride, layer.padding)
        elif isinstance(layer, Flatten):
            grad = grad.reshape(c)
        elif isinstance(layer, Activation):
            grad = grad * eom_activation_grad(c, eom)
    return grads


def cross_entropy(logits, labels):
    """Mean softmax cross-entropy and its gradient with respect to ``logits``."""
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    n = logits.shape[0]
    loss = -logp[np.arange(n), labels].mean()
    g = np.exp(logp)
    g[np.arange(n), labels] -= 1.0
    return loss, g / n


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.5
    epochs: int = 10
    batch: int = 64
    seed: int = 0
    momentum: float = 0.0


def train(spec: NetworkSpec, dataset, hyper: TrainConfig = TrainConfig(),
          eom: EOMParams = EOMParams(), init: WeightSet | None = None) -> WeightSet:
    """Mini-batch SGD on the ideal path with softmax cross-entropy.

    Deterministic for a fixed ``hyper.seed`` (initialization and shuffling).
    """
    _check_sequential(spec)
    images, labels = dataset
    x = _as_inputs(spec, images)
    y = np.asarray(labels, dtype=np.int64)
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"{x.shape[0]} images but {y.shape[0]} labels")
    ws = init if init is not None else init_weights(spec, hyper.seed)
    ws.check(spec)
    params = [a.copy() for pair in zip(ws.weights, ws.biases) for a in pair]
    velocity = [np.zeros_like(p) for p in params]
    rng = np.random.default_rng(hyper.seed + 1)
    for epoch in range(hyper.epochs):
        order = rng.permutation(x.shape[0])
        for b, lo in enumerate(range(0, x.shape[0], hyper.batch)):
            idx = order[lo:lo + hyper.batch]
            logits, cache = _forward_train(spec, params, x[idx], eom)
            loss, g = cross_entropy(logits, y[idx])
            if not math.isfinite(loss):
                raise NumericError(f"training diverged at epoch {epoch}, batch {b} (loss={loss})")
            grads = _backward(spec, params, cache, g, eom)
            for p, v, gr in zip(params, velocity, grads):
                v *= hyper.momentum
                v -= hyper.lr * gr
                p += v
        log.debug("epoch %d done, last batch loss %.4f", epoch, loss)
    return WeightSet(tuple(params[0::2]), tuple(params[1::2]))
