"""8-bit RGB image I/O: PNG through Pillow, binary PPM (P6) parsed directly."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np


class ImageFormatError(ValueError):
    pass


_PPM_HEADER = re.compile(rb"P6\s+(?:#[^\n]*\s+)*(\d+)\s+(?:#[^\n]*\s+)*(\d+)\s+(?:#[^\n]*\s+)*(\d+)\s")


def _read_ppm(data: bytes, path) -> np.ndarray:
    m = _PPM_HEADER.match(data)
    if not m:
        raise ImageFormatError(f"{path}: malformed PPM header")
    w, h, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ImageFormatError(f"{path}: only 8-bit PPM is supported (maxval {maxval})")
    body = data[m.end() :]
    need = w * h * 3
    if len(body) < need:
        raise ImageFormatError(f"{path}: truncated PPM, {len(body)} of {need} pixel bytes")
    return np.frombuffer(body[:need], dtype=np.uint8).reshape(h, w, 3)


def _read_png(path) -> np.ndarray:
    from PIL import Image

    try:
        with Image.open(path) as im:
            im.load()
            if im.mode != "RGB":
                im = im.convert("RGB")
            return np.asarray(im, dtype=np.uint8)
    except (OSError, SyntaxError) as exc:
        raise ImageFormatError(f"{path}: cannot decode PNG ({exc})") from exc


def load_image(path) -> np.ndarray:
    """Read an RGB image as a float32 3xHxW tensor in [0, 1]."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ImageFormatError(f"{path}: {exc.strerror}") from exc
    if data.startswith(b"P6"):
        pixels = _read_ppm(data, path)
    elif data.startswith(b"\x89PNG"):
        pixels = _read_png(path)
    else:
        raise ImageFormatError(f"{path}: unsupported format (expected PNG or binary PPM)")
    return (pixels.transpose(2, 0, 1).astype(np.float32) / np.float32(255)).copy()


def to_bytes(image: np.ndarray) -> np.ndarray:
    """Round half up to 8 bits, clamped; returns HxWx3 uint8."""
    q = np.floor(np.asarray(image, np.float64) * 255.0 + 0.5)
    return np.clip(q, 0, 255).astype(np.uint8).transpose(1, 2, 0)


def save_image(image: np.ndarray, path) -> None:
    path = Path(path)
    if image.ndim != 3 or image.shape[0] != 3:
        raise ValueError(f"expected a 3xHxW image, got {image.shape}")
    pixels = to_bytes(image)
    if path.suffix.lower() in (".ppm", ".pnm"):
        h, w, _ = pixels.shape
        path.write_bytes(b"P6\n%d %d\n255\n" % (w, h) + pixels.tobytes())
    else:
        from PIL import Image

        Image.fromarray(pixels, "RGB").save(path, format="PNG")
