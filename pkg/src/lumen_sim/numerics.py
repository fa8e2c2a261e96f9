"""Deterministic float64 tensor arithmetic shared by the ideal and photonic paths.

Tensors are plain ``numpy.ndarray`` objects of dtype float64, row-major.
Images use the channels-last ``H x W x C`` layout and convolution kernels
``Kh x Kw x Cin x Cout``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_tensor",
    "matmul",
    "conv_output_size",
    "same_padding",
    "im2col",
    "conv2d",
    "maxpool2d",
    "flatten",
    "softmax",
    "argmax",
]


def as_tensor(x) -> np.ndarray:
    """Return ``x`` as a C-contiguous float64 array, rejecting NaN/Inf."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor contains non-finite values")
    return arr


def matmul(a, b) -> np.ndarray:
    """Real matrix product of ``a`` (m x k) and ``b`` (k x n)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"matmul expects 2-D operands, got shapes {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ValueError(
            f"matmul inner extents differ: a is {a.shape[0]}x{a.shape[1]}, "
            f"b is {b.shape[0]}x{b.shape[1]}"
        )
    return a @ b


def same_padding(size: int, kernel: int, stride: int) -> tuple[int, int]:
    # TF convention: output = ceil(size / stride), extra pad goes after
    out = -(-size // stride)
    total = max((out - 1) * stride + kernel - size, 0)
    return total // 2, total - total // 2


def conv_output_size(size: int, kernel: int, stride: int, padding: str) -> int:
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if padding == "valid":
        if kernel > size:
            raise ValueError(f"kernel extent {kernel} exceeds input extent {size}")
        return (size - kernel) // stride + 1
    if padding == "same":
        lo, hi = same_padding(size, kernel, stride)
        if kernel > size + lo + hi:
            raise ValueError(f"kernel extent {kernel} exceeds padded input extent {size + lo + hi}")
        return (size + lo + hi - kernel) // stride + 1
    raise ValueError(f"padding must be 'valid' or 'same', got {padding!r}")


def _pad(x: np.ndarray, kh: int, kw: int, stride: int, padding: str, value: float = 0.0):
    if padding == "same":
        top, bottom = same_padding(x.shape[-3], kh, stride)
        left, right = same_padding(x.shape[-2], kw, stride)
        widths = [(0, 0)] * (x.ndim - 3) + [(top, bottom), (left, right), (0, 0)]
        x = np.pad(x, widths, constant_values=value)
    return x


def im2col(x, kh: int, kw: int, stride: int = 1, padding: str = "valid") -> np.ndarray:
    """Unfold patches of ``x`` (``[N x] H x W x C``) into rows.

    Returns an array of shape ``[N x] H' x W' x (kh*kw*C)`` whose last axis
    is ordered like a flattened ``kh x kw x C`` kernel.
    """
    x = np.asarray(x, dtype=np.float64)
    h_out = conv_output_size(x.shape[-3], kh, stride, padding)
    w_out = conv_output_size(x.shape[-2], kw, stride, padding)
    xp = _pad(x, kh, kw, stride, padding)
    win = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(-3, -2))
    # win: [N,] H'' x W'' x C x kh x kw -> subsample by stride
    win = win[..., ::stride, ::stride, :, :, :][..., :h_out, :w_out, :, :, :]
    win = np.moveaxis(win, -3, -1)  # ..., kh, kw, C
    return np.ascontiguousarray(win).reshape(*win.shape[:-3], kh * kw * x.shape[-1])


def conv2d(x, k, stride: int = 1, padding: str = "valid") -> np.ndarray:
    """2-D cross-correlation of ``x`` (``[N x] H x W x Cin``) with ``k`` (Kh x Kw x Cin x Cout)."""
    x = np.asarray(x, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    if k.ndim != 4:
        raise ValueError(f"kernel must be Kh x Kw x Cin x Cout, got shape {k.shape}")
    if x.ndim < 3 or x.shape[-1] != k.shape[2]:
        raise ValueError(f"input channels {x.shape[-1:]} do not match kernel Cin={k.shape[2]}")
    kh, kw, cin, cout = k.shape
    cols = im2col(x, kh, kw, stride, padding)
    return cols @ k.reshape(kh * kw * cin, cout)


def maxpool2d(x, size: int = 2, stride: int | None = None, padding: str = "valid") -> np.ndarray:
    """Channel-wise max over ``size x size`` windows of ``[N x] H x W x C`` input."""
    x = np.asarray(x, dtype=np.float64)
    stride = size if stride is None else stride
    h_out = conv_output_size(x.shape[-3], size, stride, padding)
    w_out = conv_output_size(x.shape[-2], size, stride, padding)
    xp = _pad(x, size, size, stride, padding, value=-np.inf)
    win = np.lib.stride_tricks.sliding_window_view(xp, (size, size), axis=(-3, -2))
    win = win[..., ::stride, ::stride, :, :, :][..., :h_out, :w_out, :, :, :]
    return win.max(axis=(-2, -1))


def flatten(x, batched: bool = False) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if batched:
        return x.reshape(x.shape[0], -1)
    return x.reshape(-1)


def softmax(x, axis: int = -1) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    z = np.exp(x - x.max(axis=axis, keepdims=True))
    return z / z.sum(axis=axis, keepdims=True)


def argmax(x, axis: int = -1):
    """Index of the largest element; ties resolve to the lowest index."""
    return np.argmax(np.asarray(x), axis=axis)
