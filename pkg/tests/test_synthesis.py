import numpy as np
import pytest

from conftest import piecewise_frame
from wvfi.config import ETA_GRID
from wvfi.motion import INFER_ARGMAX, TRAIN_SOFT, ThresholdPolicy, mpnet_forward
from wvfi.synthesis import encode_context, interpolate, interpolate_fixed, wsnet_reconstruct
from wvfi.wavelet import WaveletBand, WaveletPyramid, reconstruct
from wvfi.weights import zero_motion_heads


@pytest.fixture(scope="module")
def ctx(tiny_weights):
    rng = np.random.default_rng(3)
    i0 = piecewise_frame(rng, (64, 64))
    i1 = np.roll(i0, 2, axis=2)
    motion, _ = mpnet_forward(i0, i1, tiny_weights)
    return encode_context(i0, i1, motion, tiny_weights)


def test_context_shapes(ctx, tiny_weights):
    arch = tiny_weights.arch
    for l in range(1, 5):
        assert ctx.level(l).shape == (arch.context_channels(l), 64 >> l, 64 >> l)


def test_frame_is_idwt_of_pyramid(ctx, tiny_weights):
    res = wsnet_reconstruct(ctx, 0.005, tiny_weights)
    assert res.frame.shape == (3, 64, 64)
    np.testing.assert_allclose(reconstruct(res.pyramid), res.frame, atol=1e-6)


def test_force_dense_agrees_inside_mask(ctx, tiny_weights):
    dense = wsnet_reconstruct(ctx, 0.0, tiny_weights, force_dense=True)
    assert all(d == 1.0 for d in dense.densities().values())
    assert dense.flops == dense.ledger.dense_total
    sparse = wsnet_reconstruct(ctx, 0.01, tiny_weights)
    # the coarsest level sees no mask, so it must be identical
    for a, b in zip(dense.pyramid.level(4).bands(), sparse.pyramid.level(4).bands()):
        assert np.array_equal(a, b)
    # level 3 inputs are shared, so coefficients match wherever the mask is set
    m = sparse.masks[3]
    for a, b in zip(dense.pyramid.level(3).bands()[1:], sparse.pyramid.level(3).bands()[1:]):
        np.testing.assert_allclose(a[:, m], b[:, m], atol=1e-6)


def test_huge_eta_keeps_only_coarsest(ctx, tiny_weights):
    res = wsnet_reconstruct(ctx, 1e6, tiny_weights)
    assert all(d == 0.0 for d in res.densities().values())
    top = res.pyramid.level(4)
    levels = [
        WaveletBand(*(np.zeros((3, 64 >> l, 64 >> l), np.float32) for _ in range(4)))
        for l in range(1, 4)
    ] + [top]
    expected = reconstruct(WaveletPyramid(levels, (64, 64)))
    np.testing.assert_allclose(res.frame, expected, atol=1e-6)


def test_masks_nest_and_flops_fall(ctx, tiny_weights):
    prev = None
    for eta in ETA_GRID:
        res = wsnet_reconstruct(ctx, eta, tiny_weights)
        if prev is not None:
            assert res.flops <= prev.flops
            for l in res.masks:
                assert not np.any(res.masks[l] & ~prev.masks[l])
        prev = res


def test_negative_eta_rejected(ctx, tiny_weights):
    with pytest.raises(ValueError):
        wsnet_reconstruct(ctx, -0.1, tiny_weights)


def test_one_hot_soft_matches_single_branch(tiny_weights):
    rng = np.random.default_rng(5)
    i0, i1 = piecewise_frame(rng, (32, 32)), piecewise_frame(rng, (32, 32))
    motion, _ = mpnet_forward(i0, i1, tiny_weights)
    ref = wsnet_reconstruct(encode_context(i0, i1, motion, tiny_weights), 0.01, tiny_weights)
    pol = ThresholdPolicy(probabilities=(0.25,) * 4, sample=(0.0, 0.0, 1.0, 0.0), mode=TRAIN_SOFT)
    res = interpolate(i0, i1, pol, tiny_weights)
    np.testing.assert_allclose(res.frame, ref.frame, atol=1e-6)
    assert res.flops == ref.flops
    assert res.eta_used == pytest.approx(0.01)


def test_soft_mixture_averages_branches(tiny_weights):
    rng = np.random.default_rng(6)
    i0, i1 = piecewise_frame(rng, (32, 32)), piecewise_frame(rng, (32, 32))
    pol = ThresholdPolicy(probabilities=(0.25,) * 4, sample=(0.5, 0.5, 0.0, 0.0), mode=TRAIN_SOFT)
    res = interpolate(i0, i1, pol, tiny_weights)
    a, b = res.branches[0], res.branches[1]
    np.testing.assert_allclose(res.frame, 0.5 * a.frame + 0.5 * b.frame, atol=1e-6)
    assert res.flops == round(0.5 * a.flops + 0.5 * b.flops)


def test_argmax_runs_selected_candidate(tiny_weights):
    rng = np.random.default_rng(8)
    i0, i1 = piecewise_frame(rng, (32, 32)), piecewise_frame(rng, (32, 32))
    pol = ThresholdPolicy(probabilities=(0.05, 0.05, 0.05, 0.85), mode=INFER_ARGMAX)
    res = interpolate(i0, i1, pol, tiny_weights)
    assert res.eta_used == pytest.approx(0.015)
    fixed = interpolate_fixed(i0, i1, 0.015, tiny_weights)
    assert res.frame.tobytes() == fixed.frame.tobytes()


def test_classifier_fills_probabilities(tiny_weights):
    rng = np.random.default_rng(9)
    i0, i1 = piecewise_frame(rng, (32, 32)), piecewise_frame(rng, (32, 32))
    res = interpolate(i0, i1, ThresholdPolicy(mode=INFER_ARGMAX), tiny_weights)
    p = np.asarray(res.policy.probabilities)
    assert p.shape == (4,) and abs(p.sum() - 1) < 1e-6
    assert res.policy.selected == int(np.argmax(p))


def test_zero_heads_static_scene(tiny_weights):
    # with zero motion heads and a static pair, the merged frame is the input
    rng = np.random.default_rng(10)
    i0 = piecewise_frame(rng, (32, 32))
    res = interpolate_fixed(i0, i0.copy(), 0.0, zero_motion_heads(tiny_weights))
    assert np.array_equal(res.motion.merged, i0)
    assert np.all(np.isfinite(res.frame))


def test_rejects_bad_size(tiny_weights):
    x = np.zeros((3, 40, 40), np.float32)
    with pytest.raises(ValueError):
        interpolate_fixed(x, x, 0.0, tiny_weights)
