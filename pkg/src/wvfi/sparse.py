"""Valid masks from coarse detail coefficients, dilation, sparse convolution."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .tensor import ConvSpec, conv2d, conv2d_rows
from .wavelet import WaveletBand

_CROSS3 = np.ones((3, 3), dtype=bool)


def density(mask: np.ndarray) -> float:
    return float(np.count_nonzero(mask)) / mask.size


def upsample_nearest2(mask: np.ndarray) -> np.ndarray:
    return np.repeat(np.repeat(mask, 2, axis=-2), 2, axis=-1)


def channel_masks(high: WaveletBand, ll: np.ndarray, eta: float) -> np.ndarray:
    """Per-channel masks ``(C, 2h, 2w)`` before the union over channels."""
    if eta < 0:
        raise ValueError(f"eta must be non-negative, got {eta}")
    c, h, w = high.lh.shape
    if ll.shape != (c, 2 * h, 2 * w):
        raise ValueError(f"LL {ll.shape} must be twice the detail size {high.lh.shape}")
    mag = np.maximum(np.maximum(np.abs(high.lh), np.abs(high.hl)), np.abs(high.hh))
    ll64 = ll.astype(np.float64).reshape(c, -1)
    # flat channel: range is 0, so the threshold degenerates to 0
    thresh = eta * (ll64.max(axis=1) - ll64.min(axis=1))
    return upsample_nearest2(mag.astype(np.float64) > thresh[:, None, None])


def compute_valid_mask(high: WaveletBand, ll: np.ndarray, eta: float) -> np.ndarray:
    """Boolean ``(H, W)`` mask at ``ll``'s resolution: union over channels."""
    return channel_masks(high, ll, eta).any(axis=0)


def dilate3(mask: np.ndarray) -> np.ndarray:
    return ndimage.binary_dilation(mask, structure=_CROSS3, border_value=0)


def _check_mask(x: np.ndarray, mask: np.ndarray, spec: ConvSpec) -> None:
    if spec.stride != 1:
        raise ValueError("sparse convolution supports stride 1 only")
    oh, ow = spec.output_size(*x.shape[1:])
    if mask.shape != (oh, ow):
        raise ValueError(f"mask {mask.shape} does not match conv output {(oh, ow)}")


def sparse_conv2d(x: np.ndarray, mask: np.ndarray, spec: ConvSpec) -> np.ndarray:
    """Reference path: dense convolution, invalid positions set to exactly 0."""
    _check_mask(x, mask, spec)
    out = conv2d(x, spec)
    return np.where(mask[None], out, out.dtype.type(0))


def sparse_conv2d_gather(x: np.ndarray, mask: np.ndarray, spec: ConvSpec) -> np.ndarray:
    """Gather-compute-scatter path; evaluates only the valid positions."""
    _check_mask(x, mask, spec)
    rows = np.flatnonzero(mask)
    out = np.zeros((spec.out_channels,) + mask.shape, dtype=x.dtype)
    if rows.size:
        vals, _, _ = conv2d_rows(x, spec, rows)
        out.reshape(spec.out_channels, -1)[:, rows] = vals.T
    return out
