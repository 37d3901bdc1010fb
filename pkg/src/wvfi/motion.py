"""Motion network: pyramid encoder, coarse-to-fine flow/occlusion decoders,
the embedded threshold classifier, and Gumbel-softmax candidate selection.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import DEFAULT_CANDIDATES, LEVELS
from .rng import SplitMix64
from .tensor import concat_channels, conv2d, leaky_relu, resize_bilinear, sigmoid
from .weights import NetworkWeights

TRAIN_SOFT = "train-soft"
INFER_ARGMAX = "infer-argmax"


@dataclass(frozen=True, eq=False)
class FlowField:
    """Displacements ``(2, H, W)`` as (x, y) in pixels of the stored resolution."""

    to0: np.ndarray
    to1: np.ndarray

    def __post_init__(self):
        if self.to0.shape != self.to1.shape or self.to0.shape[0] != 2:
            raise ValueError(f"flow shapes {self.to0.shape} / {self.to1.shape}")

    def resized(self, scale: float) -> "FlowField":
        return FlowField(resize_flow(self.to0, scale), resize_flow(self.to1, scale))


@dataclass(frozen=True, eq=False)
class MotionEstimate:
    flow: FlowField
    occlusion: np.ndarray
    merged: np.ndarray
    warped0: np.ndarray
    warped1: np.ndarray


def resize_flow(flow: np.ndarray, scale: float) -> np.ndarray:
    return resize_bilinear(flow, scale) * flow.dtype.type(scale)


def backward_warp(image: np.ndarray, flow: np.ndarray) -> np.ndarray:
    """Bilinear sample of ``image`` at ``(x + u, y + v)``; taps outside read 0."""
    c, h, w = image.shape
    if flow.shape != (2, h, w):
        raise ValueError(f"flow {flow.shape} does not match image {image.shape}")
    gy, gx = np.mgrid[0:h, 0:w]
    sx = gx + flow[0].astype(np.float64)
    sy = gy + flow[1].astype(np.float64)
    x0 = np.floor(sx)
    y0 = np.floor(sy)
    fx = sx - x0
    fy = sy - y0
    x0 = x0.astype(np.intp)
    y0 = y0.astype(np.intp)
    out = np.zeros((c, h, w), dtype=np.float64)
    flat = image.reshape(c, -1)
    for dy, wy in ((0, 1.0 - fy), (1, fy)):
        for dx, wx in ((0, 1.0 - fx), (1, fx)):
            yy = y0 + dy
            xx = x0 + dx
            ok = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
            idx = np.where(ok, yy * w + xx, 0)
            wt = np.where(ok, wy * wx, 0.0)
            out += flat[:, idx].astype(np.float64) * wt
    return out.astype(image.dtype)


def occlusion_merge(warped0: np.ndarray, warped1: np.ndarray, occ: np.ndarray) -> np.ndarray:
    if warped0.shape != warped1.shape or occ.shape != (1,) + warped0.shape[1:]:
        raise ValueError(f"shapes {warped0.shape}, {warped1.shape}, {occ.shape}")
    one = occ.dtype.type(1)
    return occ * warped0 + (one - occ) * warped1


def _encode(image: np.ndarray, weights: NetworkWeights) -> list[np.ndarray]:
    feats = []
    x = image
    for l in range(1, LEVELS + 1):
        x = leaky_relu(conv2d(x, weights.conv(f"mp.enc{l}.0", stride=2)))
        x = leaky_relu(conv2d(x, weights.conv(f"mp.enc{l}.1")))
        feats.append(x)
    return feats


def _classify(feat: np.ndarray, weights: NetworkWeights) -> np.ndarray:
    x = leaky_relu(conv2d(feat, weights.conv("mp.cls.conv")))
    x = x.mean(axis=(1, 2), keepdims=True)
    x = leaky_relu(conv2d(x, weights.conv("mp.cls.fc1", padding=0)))
    return conv2d(x, weights.conv("mp.cls.fc2", padding=0)).reshape(-1)


def mpnet_forward(
    i0: np.ndarray, i1: np.ndarray, weights: NetworkWeights
) -> tuple[MotionEstimate, np.ndarray]:
    """Estimate intermediate flows, occlusion and merged frame; also classifier logits."""
    if i0.shape != i1.shape or i0.shape[0] != 3:
        raise ValueError(f"need two 3xHxW frames, got {i0.shape} and {i1.shape}")
    _, h, w = i0.shape
    if h % 16 or w % 16:
        raise ValueError(f"{h}x{w} is not divisible by 16")
    i0 = i0.astype(np.float32)
    i1 = i1.astype(np.float32)
    feats0 = _encode(i0, weights)
    feats1 = _encode(i1, weights)

    flow = occ_logit = logits = None
    for l in range(LEVELS, 0, -1):
        f0, f1 = feats0[l - 1], feats1[l - 1]
        if l == LEVELS:
            x = concat_channels([f0, f1])
        else:
            flow = resize_flow(flow, 2.0)
            occ_logit = resize_bilinear(occ_logit, 2.0)
            f0 = backward_warp(f0, flow[0:2])
            f1 = backward_warp(f1, flow[2:4])
            x = concat_channels([flow, occ_logit, f0, f1])
        x = leaky_relu(conv2d(x, weights.conv(f"mp.dec{l}.0")))
        x = leaky_relu(conv2d(x, weights.conv(f"mp.dec{l}.1")))
        if l == LEVELS:
            logits = _classify(x, weights)
        out = conv2d(x, weights.conv(f"mp.dec{l}.head"))
        flow = out[0:4] if l == LEVELS else flow + out[0:4]
        occ_logit = out[4:5]

    flow = resize_flow(flow, 2.0)
    occ = sigmoid(resize_bilinear(occ_logit, 2.0))
    field = FlowField(flow[0:2], flow[2:4])
    warped0 = backward_warp(i0, field.to0)
    warped1 = backward_warp(i1, field.to1)
    merged = occlusion_merge(warped0, warped1, occ)
    return MotionEstimate(field, occ, merged, warped0, warped1), logits


def softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = np.exp(z - z.max())
    return z / z.sum()


@dataclass(frozen=True)
class ThresholdPolicy:
    candidates: tuple[float, ...] = DEFAULT_CANDIDATES
    probabilities: tuple[float, ...] | None = None
    temperature: float = 1.0
    sample: tuple[float, ...] | None = None
    mode: str = INFER_ARGMAX

    def validate(self) -> None:
        if self.mode not in (TRAIN_SOFT, INFER_ARGMAX):
            raise ValueError(f"unknown policy mode {self.mode!r}")
        if self.temperature <= 0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        m = len(self.candidates)
        if self.probabilities is not None:
            p = np.asarray(self.probabilities, dtype=np.float64)
            if p.shape != (m,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-5:
                raise ValueError(f"invalid probability vector {self.probabilities}")
        if self.sample is not None:
            h = np.asarray(self.sample, dtype=np.float64)
            if h.shape != (m,) or np.any(h < 0) or abs(h.sum() - 1.0) > 1e-5:
                raise ValueError(f"selection {self.sample} is not on the simplex")

    @property
    def selected(self) -> int:
        if self.sample is None:
            raise ValueError("policy has not been sampled")
        return int(np.argmax(self.sample))

    @property
    def eta(self) -> float:
        """Threshold ratio of the selection (expected value for soft samples)."""
        return float(np.dot(self.sample, self.candidates))


def gumbel_noise(seed: int, m: int) -> np.ndarray:
    u = SplitMix64(seed).uniform(m)
    return -np.log(-np.log(u))


def gumbel_softmax(probabilities, noise: np.ndarray, temperature: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        z = (np.log(np.asarray(probabilities, dtype=np.float64)) + noise) / temperature
    z = np.exp(z - z.max())
    return z / z.sum()


def gumbel_sample(policy: ThresholdPolicy, seed: int) -> ThresholdPolicy:
    """Fill ``sample``: soft Gumbel-softmax draw, or noiseless one-hot argmax."""
    policy.validate()
    if policy.probabilities is None:
        raise ValueError("policy has no probabilities to sample from")
    p = np.asarray(policy.probabilities, dtype=np.float64)
    if policy.mode == INFER_ARGMAX:
        h = np.zeros_like(p)
        h[np.argmax(p)] = 1.0
    else:
        h = gumbel_softmax(p, gumbel_noise(seed, len(p)), policy.temperature)
    return replace(policy, sample=tuple(float(v) for v in h))


def temperature_schedule(step: int, total_steps: int, start: float = 1.0, end: float = 0.4) -> float:
    """Linear annealing from ``start`` to ``end`` over ``total_steps``."""
    if total_steps <= 0:
        return end
    frac = min(max(step / total_steps, 0.0), 1.0)
    return start + (end - start) * frac
