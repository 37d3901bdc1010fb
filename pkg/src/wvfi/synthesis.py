"""Synthesis network: complementary context encoders, sparse coefficient
decoders and progressive IDWT reconstruction, plus the candidate mixture.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import flops as flops_mod
from .config import LEVELS
from .motion import (
    INFER_ARGMAX,
    MotionEstimate,
    ThresholdPolicy,
    backward_warp,
    gumbel_sample,
    mpnet_forward,
    softmax,
)
from .sparse import compute_valid_mask, dilate3, sparse_conv2d
from .tensor import concat_channels, conv2d, leaky_relu, resize_bilinear
from .wavelet import WaveletBand, WaveletPyramid, decompose, idwt_haar
from .weights import NetworkWeights


@dataclass(frozen=True, eq=False)
class ContextPyramid:
    """Per-level context ``concat(warped feat0, warped feat1, motion feat)``
    and the Haar pyramid of the merged frame that coefficients refine."""

    levels: list[np.ndarray]
    size: tuple[int, int]
    base: WaveletPyramid

    def level(self, l: int) -> np.ndarray:
        return self.levels[l - 1]


@dataclass(eq=False)
class SynthesisResult:
    frame: np.ndarray
    pyramid: WaveletPyramid
    masks: dict[int, np.ndarray]
    flops: int
    eta_used: float
    ledger: flops_mod.FlopsLedger | None = None
    motion: MotionEstimate | None = None
    policy: ThresholdPolicy | None = None
    branches: list["SynthesisResult"] = field(default_factory=list)

    def densities(self) -> dict[int, float]:
        return {l: float(np.count_nonzero(m)) / m.size for l, m in sorted(self.masks.items())}


def encode_context(
    i0: np.ndarray, i1: np.ndarray, motion: MotionEstimate, weights: NetworkWeights
) -> ContextPyramid:
    _, h, w = i0.shape
    if h % 16 or w % 16:
        raise ValueError(f"{h}x{w} is not divisible by 16")
    flow = motion.flow
    x0, x1 = i0.astype(np.float32), i1.astype(np.float32)
    y = concat_channels([flow.to0, flow.to1, motion.occlusion, motion.merged]).astype(np.float32)
    levels = []
    for l in range(1, LEVELS + 1):
        spec1 = weights.conv(f"ws.enc1.{l}", stride=2)
        x0 = leaky_relu(conv2d(x0, spec1))
        x1 = leaky_relu(conv2d(x1, spec1))
        y = leaky_relu(conv2d(y, weights.conv(f"ws.enc2.{l}", stride=2)))
        flow = flow.resized(0.5)
        levels.append(
            concat_channels([backward_warp(x0, flow.to0), backward_warp(x1, flow.to1), y])
        )
    return ContextPyramid(levels, (h, w), decompose(motion.merged.astype(np.float32), LEVELS))


def wsnet_reconstruct(
    ctx: ContextPyramid,
    eta: float,
    weights: NetworkWeights,
    force_dense: bool = False,
) -> SynthesisResult:
    """Predict the coefficient pyramid coarse-to-fine and invert it.

    Heads predict residuals over the merged frame's pyramid. Level 4 is
    dense and predicts all four bands. At levels 3..1 the valid
    mask comes from the coarser detail magnitudes against ``eta`` times the
    per-channel LL range; the feature conv is masked by the dilated mask and
    the coefficient head by the mask itself. ``force_dense`` overrides every
    mask with ones.
    """
    if eta < 0:
        raise ValueError(f"eta must be non-negative, got {eta}")
    x = leaky_relu(conv2d(ctx.level(LEVELS), weights.conv(f"ws.dec{LEVELS}.0")))
    out = conv2d(x, weights.conv(f"ws.dec{LEVELS}.head"))
    out += np.concatenate(ctx.base.level(LEVELS).bands())
    bands = {LEVELS: WaveletBand(out[0:3], out[3:6], out[6:9], out[9:12])}
    skip = x
    ll = idwt_haar(bands[LEVELS])
    masks = {}
    for l in range(LEVELS - 1, 0, -1):
        if force_dense:
            mask = np.ones(ll.shape[1:], dtype=bool)
        else:
            mask = compute_valid_mask(bands[l + 1], ll, eta)
        masks[l] = mask
        skip = resize_bilinear(skip, 2.0)
        x = concat_channels([ctx.level(l), skip])
        x = leaky_relu(sparse_conv2d(x, dilate3(mask), weights.conv(f"ws.dec{l}.0")))
        out = sparse_conv2d(x, mask, weights.conv(f"ws.dec{l}.head"))
        out += np.where(mask, np.concatenate(ctx.base.level(l).bands()[1:]), np.float32(0))
        bands[l] = WaveletBand(ll, out[0:3], out[3:6], out[6:9])
        ll = idwt_haar(bands[l])
    pyramid = WaveletPyramid([bands[l] for l in range(1, LEVELS + 1)], ctx.size)
    result = SynthesisResult(ll, pyramid, masks, 0, float(eta))
    result.ledger = flops_mod.ledger_for_synthesis(result, weights)
    result.flops = result.ledger.total
    return result


def mixture(branches: list[SynthesisResult], h) -> tuple[np.ndarray, WaveletPyramid, float]:
    """Selection-weighted sums of frames, pyramids and FLOPs."""
    frame = sum(np.float32(hk) * b.frame for hk, b in zip(h, branches))
    levels = []
    for i in range(LEVELS):
        parts = [b.pyramid.levels[i].bands() for b in branches]
        levels.append(
            WaveletBand(*(sum(np.float32(hk) * p[j] for hk, p in zip(h, parts)) for j in range(4)))
        )
    cost = float(sum(hk * b.flops for hk, b in zip(h, branches)))
    return frame.astype(np.float32), WaveletPyramid(levels, branches[0].pyramid.size), cost


def interpolate(
    i0: np.ndarray,
    i1: np.ndarray,
    policy: ThresholdPolicy,
    weights: NetworkWeights,
    seed: int = 0,
) -> SynthesisResult:
    """Full forward pass with classifier-driven threshold selection.

    Missing probabilities are taken from the classifier; a missing sample is
    drawn with ``gumbel_sample``. Argmax mode runs the selected candidate
    only; soft mode runs every candidate and mixes by the sample.
    """
    motion, logits = mpnet_forward(i0, i1, weights)
    if policy.probabilities is None:
        probs = softmax(logits)
        policy = ThresholdPolicy(
            policy.candidates,
            tuple(float(p) for p in probs),
            policy.temperature,
            policy.sample,
            policy.mode,
        )
    policy.validate()
    if policy.sample is None:
        policy = gumbel_sample(policy, seed)
    ctx = encode_context(i0, i1, motion, weights)

    if policy.mode == INFER_ARGMAX:
        k = policy.selected
        result = wsnet_reconstruct(ctx, policy.candidates[k], weights)
    else:
        branches = [wsnet_reconstruct(ctx, eta, weights) for eta in policy.candidates]
        frame, pyramid, cost = mixture(branches, policy.sample)
        lead = branches[policy.selected]
        result = SynthesisResult(
            frame, pyramid, lead.masks, int(round(cost)), policy.eta, lead.ledger,
            branches=branches,
        )
    result.motion = motion
    result.policy = policy
    return result


def interpolate_fixed(
    i0: np.ndarray, i1: np.ndarray, eta: float, weights: NetworkWeights
) -> SynthesisResult:
    """Forward pass with a fixed threshold ratio (classifier output ignored)."""
    motion, logits = mpnet_forward(i0, i1, weights)
    ctx = encode_context(i0, i1, motion, weights)
    result = wsnet_reconstruct(ctx, eta, weights)
    result.motion = motion
    probs = tuple(float(p) for p in softmax(logits))
    result.policy = ThresholdPolicy(probabilities=probs)
    return result
