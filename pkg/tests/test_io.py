import struct

import numpy as np
import pytest

from wvfi.config import ArchConfig
from wvfi.imageio import ImageFormatError, load_image, save_image, to_bytes
from wvfi.weights import (
    MAGIC,
    WeightFileError,
    init_weights,
    load_weights,
    save_weights,
)


@pytest.mark.parametrize("suffix", [".png", ".ppm"])
def test_image_round_trip(tmp_path, rng, suffix):
    img = rng.uniform(0, 1, (3, 13, 17)).astype(np.float32)
    path = tmp_path / f"x{suffix}"
    save_image(img, path)
    back = load_image(path)
    assert back.dtype == np.float32 and back.shape == img.shape
    assert np.abs(back - img).max() <= 1 / 510 + 1e-7


def test_byte_scaling():
    assert np.array_equal(to_bytes(np.array([[[0.0]], [[1.0]], [[2 / 255]]])).ravel(), [0, 255, 2])
    assert np.array_equal(to_bytes(np.array([[[-1.0]], [[9.0]], [[0.5 / 255]]])).ravel(), [0, 255, 1])


def test_ppm_full_scale(tmp_path):
    path = tmp_path / "w.ppm"
    path.write_bytes(b"P6\n# comment\n2 1\n255\n" + bytes([255] * 6))
    img = load_image(path)
    assert img.shape == (3, 1, 2) and np.all(img == 1.0)


def test_truncated_ppm(tmp_path):
    path = tmp_path / "t.ppm"
    path.write_bytes(b"P6\n4 4\n255\n" + bytes(10))
    with pytest.raises(ImageFormatError, match="truncated"):
        load_image(path)


def test_unknown_format_and_missing(tmp_path):
    path = tmp_path / "x.bmp"
    path.write_bytes(b"BM\x00\x00")
    with pytest.raises(ImageFormatError):
        load_image(path)
    with pytest.raises(ImageFormatError):
        load_image(tmp_path / "nope.png")


def test_save_rejects_gray(tmp_path):
    with pytest.raises(ValueError):
        save_image(np.zeros((1, 4, 4)), tmp_path / "g.png")


def test_weight_round_trip(tmp_path, tiny_weights):
    path = tmp_path / "w.bin"
    save_weights(tiny_weights, path)
    back = load_weights(path, ArchConfig.tiny())
    assert back.tensors.keys() == tiny_weights.tensors.keys()
    for k, v in tiny_weights.tensors.items():
        assert back.tensors[k].dtype == np.float32
        assert np.array_equal(back.tensors[k], v)


def test_same_seed_same_weights():
    a = init_weights(ArchConfig.tiny(), seed=3)
    b = init_weights(ArchConfig.tiny(), seed=3)
    c = init_weights(ArchConfig.tiny(), seed=4)
    assert all(np.array_equal(a.tensors[k], b.tensors[k]) for k in a.tensors)
    assert any(not np.array_equal(a.tensors[k], c.tensors[k]) for k in a.tensors)


def test_init_bound():
    w = init_weights(ArchConfig.tiny(), seed=1, zero_mean_details=False)
    spec = w.tensors["ws.enc1.1.weight"]
    cout, cin, k, _ = spec.shape
    bound = np.sqrt(6.0 / ((cin + cout) * k * k))
    assert np.abs(spec).max() <= bound
    assert np.all(w.tensors["ws.enc1.1.bias"] == 0)


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"XXXX" + struct.pack("<II", 1, 0))
    with pytest.raises(WeightFileError, match="offset 0"):
        load_weights(path)


def test_bad_version_and_truncation(tmp_path, tiny_weights):
    path = tmp_path / "v.bin"
    path.write_bytes(MAGIC + struct.pack("<II", 99, 0))
    with pytest.raises(WeightFileError, match="version"):
        load_weights(path)
    good = tmp_path / "g.bin"
    save_weights(tiny_weights, good)
    data = good.read_bytes()
    path.write_bytes(data[: len(data) // 2])
    with pytest.raises(WeightFileError, match="truncated"):
        load_weights(path, ArchConfig.tiny())
    path.write_bytes(data + b"\x00")
    with pytest.raises(WeightFileError, match="trailing"):
        load_weights(path, ArchConfig.tiny())


def test_wrong_architecture(tmp_path, tiny_weights):
    path = tmp_path / "w.bin"
    save_weights(tiny_weights, path)
    with pytest.raises(WeightFileError):
        load_weights(path)
