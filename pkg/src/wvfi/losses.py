"""Training objectives with analytic gradients w.r.t. predictions, and the
PSNR / SSIM quality metrics.

Losses compute in float64 regardless of input dtype and reduce by mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .wavelet import WaveletBand, WaveletPyramid

CENSUS_PATCH = 7
CENSUS_SQUASH = 0.81
HAMMING_THRESH = 0.1


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 0.01  # frequency loss
    beta: float = 1.0  # computation cost
    charbonnier_alpha: float = 0.5
    charbonnier_eps: float = 1e-3

    def __post_init__(self):
        if min(self.alpha, self.beta, self.charbonnier_alpha, self.charbonnier_eps) < 0:
            raise ValueError("loss weights must be non-negative")


def rho(x, alpha: float = 0.5, eps: float = 1e-3):
    """Charbonnier penalty ``(x^2 + eps^2)^alpha``."""
    x = np.asarray(x, dtype=np.float64)
    return (x * x + eps * eps) ** alpha


def rho_grad(x, alpha: float = 0.5, eps: float = 1e-3):
    x = np.asarray(x, dtype=np.float64)
    return 2.0 * alpha * x * (x * x + eps * eps) ** (alpha - 1.0)


def _same_shape(a, b) -> None:
    if np.shape(a) != np.shape(b):
        raise ValueError(f"shape mismatch: {np.shape(a)} vs {np.shape(b)}")


def charbonnier(pred, gt, alpha: float = 0.5, eps: float = 1e-3) -> tuple[float, np.ndarray]:
    _same_shape(pred, gt)
    d = np.asarray(pred, dtype=np.float64) - np.asarray(gt, dtype=np.float64)
    n = d.size
    return float(rho(d, alpha, eps).mean()), rho_grad(d, alpha, eps) / n


def _census(gray: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Soft census responses ``(K, H, W)`` and the raw neighbour differences."""
    r = CENSUS_PATCH // 2
    padded = np.pad(gray, r)
    win = sliding_window_view(padded, (CENSUS_PATCH, CENSUS_PATCH))
    q = win.reshape(gray.shape + (-1,)).transpose(2, 0, 1) - gray[None]
    return q / np.sqrt(CENSUS_SQUASH + q * q), q


def census_loss(pred, gt, alpha: float = 0.5, eps: float = 1e-3) -> tuple[float, np.ndarray]:
    """Soft-Hamming distance of 7x7 soft census transforms.

    Grayscale is the channel mean scaled to [0, 255]. The per-pixel distance
    goes through the Charbonnier penalty and is averaged over the interior,
    excluding a border of half the patch size.
    """
    _same_shape(pred, gt)
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    c, h, w = pred.shape
    if c != 3:
        raise ValueError(f"census loss expects RGB input, got {c} channels")
    r = CENSUS_PATCH // 2
    if h <= 2 * r or w <= 2 * r:
        raise ValueError(f"image {h}x{w} is too small for a {CENSUS_PATCH}x{CENSUS_PATCH} patch")

    ta, qa = _census(pred.mean(axis=0) * 255.0)
    tb, _ = _census(gt.mean(axis=0) * 255.0)
    d = ta - tb
    d2 = d * d
    dist = (d2 / (HAMMING_THRESH + d2)).sum(axis=0)
    inner = (slice(r, h - r), slice(r, w - r))
    n = (h - 2 * r) * (w - 2 * r)
    loss = float(rho(dist[inner], alpha, eps).sum() / n)

    # backward: dist -> d -> soft response -> neighbour difference -> gray
    g_dist = np.zeros_like(dist)
    g_dist[inner] = rho_grad(dist[inner], alpha, eps) / n
    g_d = g_dist[None] * 2.0 * HAMMING_THRESH * d / (HAMMING_THRESH + d2) ** 2
    g_q = g_d * CENSUS_SQUASH / (CENSUS_SQUASH + qa * qa) ** 1.5
    g_gray = -g_q.sum(axis=0)
    g_pad = np.zeros((h + 2 * r, w + 2 * r))
    k = 0
    for dy in range(CENSUS_PATCH):
        for dx in range(CENSUS_PATCH):
            g_pad[dy : dy + h, dx : dx + w] += g_q[k]
            k += 1
    g_gray += g_pad[r : r + h, r : r + w]
    grad = np.broadcast_to(g_gray * (255.0 / c), (c, h, w)).copy()
    return loss, grad


def reconstruction_loss(pred, gt, alpha: float = 0.5, eps: float = 1e-3) -> tuple[float, np.ndarray]:
    """Charbonnier plus census."""
    l1, g1 = charbonnier(pred, gt, alpha, eps)
    l2, g2 = census_loss(pred, gt, alpha, eps)
    return l1 + l2, g1 + g2


def frequency_loss(
    pred: WaveletPyramid, gt: WaveletPyramid, alpha: float = 0.5, eps: float = 1e-3
) -> tuple[float, WaveletPyramid]:
    """Sum over all 16 coefficient maps of the mean Charbonnier distance."""
    if len(pred) != len(gt) or pred.size != gt.size:
        raise ValueError("pyramids are not congruent")
    total = 0.0
    grads = []
    for pb, gb in zip(pred.levels, gt.levels):
        gl = []
        for p, g in zip(pb.bands(), gb.bands()):
            loss, grad = charbonnier(p, g, alpha, eps)
            total += loss
            gl.append(grad)
        grads.append(WaveletBand(*gl))
    return total, WaveletPyramid(grads, pred.size)


def cost_regularization(sample, flops_per_candidate, height: int, width: int) -> float:
    """Selection-weighted FLOPs per input pixel."""
    h = np.asarray(sample, dtype=np.float64)
    f = np.asarray(flops_per_candidate, dtype=np.float64)
    if h.shape != f.shape:
        raise ValueError(f"{h.size} selection weights vs {f.size} FLOPs counts")
    if np.any(h < 0) or abs(h.sum() - 1.0) > 1e-5:
        raise ValueError("selection is not on the simplex")
    return float(np.dot(h, f)) / (height * width)


def total_loss(reconstruction: float, frequency: float, cost: float, weights: LossWeights | None = None) -> float:
    weights = weights or LossWeights()
    return reconstruction + weights.alpha * frequency + weights.beta * cost


def psnr(pred, gt) -> float:
    _same_shape(pred, gt)
    mse = float(np.mean((np.asarray(pred, np.float64) - np.asarray(gt, np.float64)) ** 2))
    if mse < 1e-10:
        return 100.0
    return 10.0 * math.log10(1.0 / mse)


def _gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2
    g = np.exp(-(x * x) / (2 * sigma * sigma))
    return g / g.sum()


def _filter_valid(img: np.ndarray, g: np.ndarray) -> np.ndarray:
    k = g.size
    rows = sliding_window_view(img, k, axis=0) @ g
    return sliding_window_view(rows, k, axis=1) @ g


def ssim(pred, gt, k1: float = 0.01, k2: float = 0.03, data_range: float = 1.0) -> float:
    """Mean SSIM over channels, 11x11 Gaussian window (sigma 1.5), valid region."""
    _same_shape(pred, gt)
    a = np.asarray(pred, np.float64)
    b = np.asarray(gt, np.float64)
    if a.shape[1] < 11 or a.shape[2] < 11:
        raise ValueError("SSIM needs images of at least 11x11")
    g = _gaussian_window()
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    scores = []
    for x, y in zip(a, b):
        mx, my = _filter_valid(x, g), _filter_valid(y, g)
        sxx = _filter_valid(x * x, g) - mx * mx
        syy = _filter_valid(y * y, g) - my * my
        sxy = _filter_valid(x * y, g) - mx * my
        num = (2 * mx * my + c1) * (2 * sxy + c2)
        den = (mx * mx + my * my + c1) * (sxx + syy + c2)
        scores.append(float(np.mean(num / den)))
    return float(np.mean(scores))
