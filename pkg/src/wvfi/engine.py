"""Arbitrary-size entry point (reflective padding to a multiple of 16) and
JSON-ready run reports."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import EngineConfig
from .motion import INFER_ARGMAX, ThresholdPolicy
from .synthesis import SynthesisResult, interpolate, interpolate_fixed
from .weights import NetworkWeights

MULTIPLE = 16


def pad_to_multiple(image: np.ndarray, multiple: int = MULTIPLE) -> np.ndarray:
    _, h, w = image.shape
    ph, pw = -h % multiple, -w % multiple
    if not ph and not pw:
        return image
    return np.pad(image, ((0, 0), (0, ph), (0, pw)), mode="reflect")


@dataclass
class Interpolation:
    frame: np.ndarray
    result: SynthesisResult
    size: tuple[int, int]


def run(i0: np.ndarray, i1: np.ndarray, weights: NetworkWeights, config: EngineConfig) -> Interpolation:
    """Interpolate the middle frame of ``i0``/``i1`` of any size."""
    if i0.shape != i1.shape:
        raise ValueError(f"frame shapes differ: {i0.shape} vs {i1.shape}")
    _, h, w = i0.shape
    p0, p1 = pad_to_multiple(i0), pad_to_multiple(i1)
    if config.dynamic:
        policy = ThresholdPolicy(
            candidates=config.candidates, temperature=config.temperature, mode=INFER_ARGMAX
        )
        result = interpolate(p0, p1, policy, weights, seed=config.seed)
    else:
        result = interpolate_fixed(p0, p1, config.eta, weights)
    return Interpolation(result.frame[:, :h, :w], result, (h, w))


def report(run_out: Interpolation, include_ledger: bool = True) -> dict:
    res = run_out.result
    out = {
        "height": run_out.size[0],
        "width": run_out.size[1],
        "eta_used": res.eta_used,
        "mask_density": {str(l): d for l, d in res.densities().items()},
        "flops": res.flops,
    }
    if res.policy is not None:
        out["candidates"] = list(res.policy.candidates)
        out["probabilities"] = list(res.policy.probabilities or ())
        out["selection"] = list(res.policy.sample) if res.policy.sample else None
    if include_ledger and res.ledger is not None:
        out["ledger"] = res.ledger.to_dict()
    return out
