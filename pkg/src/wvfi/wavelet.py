"""Orthonormal Haar DWT/IDWT and the 4-level pyramid built from it.

Band orientation, for a 2x2 block ``[[a, b], [c, d]]`` (rows top to bottom)
and 1D filters ``L = [1, 1]/sqrt(2)``, ``H = [-1, 1]/sqrt(2)``:

    LL = ( a + b + c + d) / 2
    LH = (-a - b + c + d) / 2    low-pass along x, high-pass along y
    HL = (-a + b - c + d) / 2    high-pass along x, low-pass along y
    HH = ( a - b - c + d) / 2

so LH responds to changes between rows (horizontal edges) and HL to changes
between columns (vertical edges).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LEVELS = 4


@dataclass(frozen=True, eq=False)
class WaveletBand:
    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray

    def __post_init__(self):
        shapes = {b.shape for b in self.bands()}
        if len(shapes) != 1:
            raise ValueError(f"band shapes differ: {sorted(shapes)}")

    def bands(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.ll, self.lh, self.hl, self.hh

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.ll.shape

    def map(self, fn) -> "WaveletBand":
        return WaveletBand(*(fn(b) for b in self.bands()))


@dataclass(frozen=True, eq=False)
class WaveletPyramid:
    """Bands for levels 1..L; ``levels[0]`` is level 1 (half resolution)."""

    levels: list[WaveletBand] = field(default_factory=list)
    size: tuple[int, int] = (0, 0)

    def __post_init__(self):
        h, w = self.size
        for i, band in enumerate(self.levels, start=1):
            _, bh, bw = band.shape
            if (bh << i, bw << i) != (h, w):
                raise ValueError(f"level {i} is {bh}x{bw}, inconsistent with {h}x{w}")

    def __len__(self) -> int:
        return len(self.levels)

    def level(self, l: int) -> WaveletBand:
        return self.levels[l - 1]

    def maps(self) -> list[np.ndarray]:
        return [b for band in self.levels for b in band.bands()]


def dwt_haar(image: np.ndarray) -> WaveletBand:
    c, h, w = image.shape
    if h % 2 or w % 2:
        raise ValueError(f"DWT needs even dimensions, got {h}x{w}")
    x = image.astype(np.float64)
    a = x[:, 0::2, 0::2]
    b = x[:, 0::2, 1::2]
    cc = x[:, 1::2, 0::2]
    d = x[:, 1::2, 1::2]
    dt = image.dtype
    return WaveletBand(
        ll=(0.5 * (a + b + cc + d)).astype(dt),
        lh=(0.5 * (-a - b + cc + d)).astype(dt),
        hl=(0.5 * (-a + b - cc + d)).astype(dt),
        hh=(0.5 * (a - b - cc + d)).astype(dt),
    )


def idwt_haar(band: WaveletBand) -> np.ndarray:
    ll, lh, hl, hh = (b.astype(np.float64) for b in band.bands())
    c, h, w = ll.shape
    out = np.empty((c, 2 * h, 2 * w), dtype=np.float64)
    out[:, 0::2, 0::2] = 0.5 * (ll - lh - hl + hh)
    out[:, 0::2, 1::2] = 0.5 * (ll - lh + hl - hh)
    out[:, 1::2, 0::2] = 0.5 * (ll + lh - hl - hh)
    out[:, 1::2, 1::2] = 0.5 * (ll + lh + hl + hh)
    return out.astype(band.ll.dtype)


def decompose(image: np.ndarray, levels: int = LEVELS) -> WaveletPyramid:
    _, h, w = image.shape
    if levels < 1:
        raise ValueError("need at least one level")
    if h % (1 << levels) or w % (1 << levels):
        raise ValueError(f"{h}x{w} is not divisible by 2**{levels}")
    bands = []
    ll = image
    for _ in range(levels):
        band = dwt_haar(ll)
        bands.append(band)
        ll = band.ll
    return WaveletPyramid(bands, (h, w))


def reconstruct(pyramid: WaveletPyramid) -> np.ndarray:
    """Progressive IDWT from the deepest level; shallower LL bands are ignored."""
    if not pyramid.levels:
        raise ValueError("empty pyramid")
    ll = pyramid.levels[-1].ll
    for band in reversed(pyramid.levels):
        if ll.shape != band.lh.shape:
            raise ValueError(f"malformed pyramid: LL {ll.shape} vs detail {band.lh.shape}")
        ll = idwt_haar(WaveletBand(ll, band.lh, band.hl, band.hh))
    return ll


def energy(pyramid: WaveletPyramid) -> float:
    """Energy of the orthonormal representation: deepest LL plus all details."""
    total = float(np.sum(pyramid.levels[-1].ll.astype(np.float64) ** 2))
    for band in pyramid.levels:
        total += sum(float(np.sum(b.astype(np.float64) ** 2)) for b in band.bands()[1:])
    return total
