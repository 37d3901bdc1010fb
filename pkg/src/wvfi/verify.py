"""Quick self-check suite behind ``wvfi verify``."""

from __future__ import annotations

import time
from typing import Callable

import numpy as np

from . import losses, sparse, wavelet
from .config import ETA_GRID, ArchConfig
from .motion import TRAIN_SOFT, ThresholdPolicy, gumbel_sample, mpnet_forward
from .synthesis import encode_context, wsnet_reconstruct
from .tensor import ConvSpec, conv2d, leaky_relu
from .weights import init_weights


def central_difference(fn: Callable[[np.ndarray], float], x: np.ndarray, step: float) -> np.ndarray:
    grad = np.zeros_like(x, dtype=np.float64)
    for idx in np.ndindex(x.shape):
        xp = x.copy()
        xm = x.copy()
        xp[idx] += step
        xm[idx] -= step
        grad[idx] = (fn(xp) - fn(xm)) / (2 * step)
    return grad


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-12))


def random_conv(rng: np.random.Generator, cin: int, cout: int, k: int = 3, pad: int = 1) -> ConvSpec:
    return ConvSpec(
        rng.standard_normal((cout, cin, k, k)).astype(np.float32),
        rng.standard_normal(cout).astype(np.float32),
        1,
        pad,
    )


def check_roundtrip(rng) -> str:
    err = 0.0
    for _ in range(10):
        x = rng.uniform(0, 1, (3, 64, 64)).astype(np.float32)
        err = max(err, float(np.abs(wavelet.reconstruct(wavelet.decompose(x, 4)) - x).max()))
    assert err < 1e-6, err
    return f"max error {err:.2e}"


def check_sparse_equivalence(rng) -> str:
    for _ in range(10):
        x = rng.standard_normal((4, 12, 10)).astype(np.float32)
        spec = random_conv(rng, 4, 5)
        mask = rng.uniform(size=(12, 10)) < 0.4
        got = sparse.sparse_conv2d(x, mask, spec)
        assert np.array_equal(got, np.where(mask, conv2d(x, spec), 0)), "masked conv differs"
    return "10 random triples exact"


def check_cascade(rng) -> str:
    worst = 0.0
    for _ in range(10):
        x = rng.standard_normal((3, 16, 16)).astype(np.float32)
        a, b = random_conv(rng, 3, 6), random_conv(rng, 6, 4)
        mask = rng.uniform(size=(16, 16)) < 0.2
        dense = conv2d(leaky_relu(conv2d(x, a)), b)
        casc = sparse.sparse_conv2d(leaky_relu(sparse.sparse_conv2d(x, sparse.dilate3(mask), a)), mask, b)
        worst = max(worst, float(np.abs(casc - dense)[:, mask].max(initial=0.0)))
    assert worst <= 1e-6, worst
    return f"max error {worst:.1e}"


def check_monotonicity(rng) -> str:
    weights = init_weights(ArchConfig.tiny(), seed=int(rng.integers(1 << 31)))
    i0 = rng.uniform(0, 1, (3, 32, 32)).astype(np.float32)
    i1 = np.roll(i0, 1, axis=2)
    motion, _ = mpnet_forward(i0, i1, weights)
    ctx = encode_context(i0, i1, motion, weights)
    prev_flops, prev_dens = None, None
    for eta in ETA_GRID:
        res = wsnet_reconstruct(ctx, eta, weights)
        dens = res.densities()
        if prev_flops is not None:
            assert res.flops <= prev_flops, f"flops rose at eta={eta}"
            assert all(dens[l] <= prev_dens[l] for l in dens), f"density rose at eta={eta}"
        prev_flops, prev_dens = res.flops, dens
    return f"{len(ETA_GRID)} thresholds, flops non-increasing"


def check_gradients(rng) -> str:
    pred = rng.uniform(0, 1, (3, 9, 9))
    gt = rng.uniform(0, 1, (3, 9, 9))
    errs = {}
    _, g = losses.charbonnier(pred, gt)
    errs["charbonnier"] = relative_error(g, central_difference(lambda p: losses.charbonnier(p, gt)[0], pred, 1e-6))
    _, g = losses.census_loss(pred, gt)
    errs["census"] = relative_error(g, central_difference(lambda p: losses.census_loss(p, gt)[0], pred, 1e-5))
    assert errs["charbonnier"] < 1e-4 and errs["census"] < 1e-3, errs
    return ", ".join(f"{k} {v:.1e}" for k, v in errs.items())


def check_gumbel(rng) -> str:
    policy = ThresholdPolicy(probabilities=(0.1, 0.2, 0.6, 0.1), mode=TRAIN_SOFT, temperature=0.5)
    for seed in range(200):
        h = np.asarray(gumbel_sample(policy, seed).sample)
        assert abs(h.sum() - 1) <= 1e-5 and h.min() >= 0
    return "200 samples on the simplex"


CHECKS = [
    ("wavelet round trip", check_roundtrip),
    ("sparse/dense equivalence", check_sparse_equivalence),
    ("cascade exactness", check_cascade),
    ("threshold monotonicity", check_monotonicity),
    ("loss gradients", check_gradients),
    ("gumbel simplex", check_gumbel),
]


def run_checks(seed: int = 0, echo: Callable[[str], None] = print) -> bool:
    rng = np.random.default_rng(seed)
    ok = True
    for name, fn in CHECKS:
        t = time.perf_counter()
        try:
            detail = fn(rng)
            status = "PASS"
        except AssertionError as exc:
            detail, status, ok = str(exc), "FAIL", False
        echo(f"{status}  {name:<28} {detail} ({time.perf_counter() - t:.2f}s)")
    return ok
