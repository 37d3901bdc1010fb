"""Dense CHW kernels: convolution, activation, resampling, concatenation.

Tensors are plain ``numpy`` arrays of shape ``(C, H, W)``. Network code keeps
them in float32; the kernels preserve the input dtype so that loss and
gradient checks can run in float64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def as_tensor(x, dtype=np.float32) -> np.ndarray:
    arr = np.asarray(x, dtype=dtype)
    if arr.ndim != 3:
        raise ValueError(f"expected a CxHxW tensor, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class ConvSpec:
    """Weights ``(out, in, kh, kw)`` and bias ``(out,)`` plus geometry."""

    weights: np.ndarray
    bias: np.ndarray
    stride: int = 1
    padding: int = 0

    def __post_init__(self):
        if self.weights.ndim != 4:
            raise ValueError(f"conv weights must be rank 4, got {self.weights.shape}")
        if self.bias.shape != (self.weights.shape[0],):
            raise ValueError(
                f"bias shape {self.bias.shape} does not match {self.weights.shape[0]} outputs"
            )
        if self.stride < 1 or self.padding < 0:
            raise ValueError("stride must be >= 1 and padding >= 0")

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weights.shape[1]

    @property
    def kernel(self) -> tuple[int, int]:
        return self.weights.shape[2], self.weights.shape[3]

    def output_size(self, height: int, width: int) -> tuple[int, int]:
        kh, kw = self.kernel
        oh = (height + 2 * self.padding - kh) // self.stride + 1
        ow = (width + 2 * self.padding - kw) // self.stride + 1
        return oh, ow


def _im2col(x: np.ndarray, spec: ConvSpec) -> tuple[np.ndarray, int, int]:
    c, h, w = x.shape
    if c != spec.in_channels:
        raise ValueError(f"conv expects {spec.in_channels} channels, got {c}")
    oh, ow = spec.output_size(h, w)
    if oh <= 0 or ow <= 0:
        raise ValueError(f"conv output would be {oh}x{ow} for input {h}x{w}")
    p, s = spec.padding, spec.stride
    if p:
        x = np.pad(x, ((0, 0), (p, p), (p, p)))
    kh, kw = spec.kernel
    win = sliding_window_view(x, (kh, kw), axis=(1, 2))[:, ::s, ::s][:, :oh, :ow]
    # rows = output pixels, columns = (in_channel, ky, kx) in weight order
    cols = win.transpose(1, 2, 0, 3, 4).reshape(oh * ow, c * kh * kw)
    return cols, oh, ow


def conv2d(x: np.ndarray, spec: ConvSpec) -> np.ndarray:
    """Zero-padded cross-correlation."""
    cols, oh, ow = _im2col(x, spec)
    wmat = spec.weights.reshape(spec.out_channels, -1).astype(x.dtype, copy=False)
    out = cols @ wmat.T
    out += spec.bias.astype(x.dtype, copy=False)
    return np.ascontiguousarray(out.T).reshape(spec.out_channels, oh, ow)


def conv2d_rows(x: np.ndarray, spec: ConvSpec, rows: np.ndarray) -> tuple[np.ndarray, int, int]:
    """Evaluate the convolution only at flat output indices ``rows``.

    Returns ``(values (len(rows), out), oh, ow)``; used by the gather path of
    sparse convolution.
    """
    c, h, w = x.shape
    if c != spec.in_channels:
        raise ValueError(f"conv expects {spec.in_channels} channels, got {c}")
    oh, ow = spec.output_size(h, w)
    p, s = spec.padding, spec.stride
    if p:
        x = np.pad(x, ((0, 0), (p, p), (p, p)))
    win = sliding_window_view(x, spec.kernel, axis=(1, 2))
    ys, xs = np.divmod(rows, ow)
    cols = win[:, ys * s, xs * s].transpose(1, 0, 2, 3).reshape(len(rows), -1)
    wmat = spec.weights.reshape(spec.out_channels, -1).astype(x.dtype, copy=False)
    vals = cols @ wmat.T
    vals += spec.bias.astype(x.dtype, copy=False)
    return vals, oh, ow


def leaky_relu(x: np.ndarray, slope: float = 0.1) -> np.ndarray:
    return np.where(x >= 0, x, x * x.dtype.type(slope))


def sigmoid(x: np.ndarray) -> np.ndarray:
    one = x.dtype.type(1)
    return one / (one + np.exp(-x))


def _axis_taps(n_in: int, n_out: int, scale: float):
    # half-pixel centres, clamped to the valid range at the borders
    src = (np.arange(n_out, dtype=np.float64) + 0.5) / scale - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    i0 = np.floor(src).astype(np.intp)
    i1 = np.minimum(i0 + 1, n_in - 1)
    frac = src - i0
    return i0, i1, frac


def resize_bilinear(x: np.ndarray, scale: float) -> np.ndarray:
    """Bilinear resize by ``scale`` with half-pixel sample centres.

    Output pixel ``i`` samples the input at ``(i + 0.5) / scale - 0.5``,
    clamped to ``[0, n - 1]``. Output size is ``round(n * scale)``.
    """
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    c, h, w = x.shape
    oh, ow = int(round(h * scale)), int(round(w * scale))
    if oh < 1 or ow < 1:
        raise ValueError(f"resize by {scale} of {h}x{w} gives an empty tensor")
    y0, y1, fy = _axis_taps(h, oh, scale)
    x0, x1, fx = _axis_taps(w, ow, scale)
    fy = fy.astype(x.dtype)[None, :, None]
    fx = fx.astype(x.dtype)[None, None, :]
    one = x.dtype.type(1)
    top = x[:, y0, :] * (one - fy) + x[:, y1, :] * fy
    return top[:, :, x0] * (one - fx) + top[:, :, x1] * fx


def concat_channels(parts) -> np.ndarray:
    parts = list(parts)
    if not parts:
        raise ValueError("nothing to concatenate")
    hw = parts[0].shape[1:]
    for p in parts[1:]:
        if p.shape[1:] != hw:
            raise ValueError(f"spatial mismatch: {p.shape[1:]} vs {hw}")
    return np.concatenate(parts, axis=0)
