"""Network weights: deterministic initialisation and the ``WVFI`` file format.

File layout (all little-endian)::

    b"WVFI"  u32 version  u32 count
    count x { u16 name_len, name (UTF-8), u8 rank, rank x u32 dims, f32 data }
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ArchConfig, layer_table, motion_head_names
from .rng import SplitMix64
from .tensor import ConvSpec

MAGIC = b"WVFI"
VERSION = 1


class WeightFileError(ValueError):
    pass


@dataclass
class NetworkWeights:
    tensors: dict[str, np.ndarray]
    arch: ArchConfig = field(default_factory=ArchConfig)
    version: int = VERSION

    def conv(self, layer: str, stride: int = 1, padding: int = 1) -> ConvSpec:
        return ConvSpec(
            self.tensors[f"{layer}.weight"], self.tensors[f"{layer}.bias"], stride, padding
        )

    def validate(self) -> None:
        """Every layer of ``arch`` present with the right shape."""
        for layer in layer_table(self.arch):
            for suffix, shape in ((".weight", layer.shape), (".bias", (layer.out_ch,))):
                key = layer.name + suffix
                if key not in self.tensors:
                    raise WeightFileError(f"missing tensor {key!r}")
                if self.tensors[key].shape != shape:
                    raise WeightFileError(
                        f"{key}: shape {self.tensors[key].shape}, expected {shape}"
                    )

    def replace(self, **updates: np.ndarray) -> "NetworkWeights":
        tensors = dict(self.tensors)
        tensors.update(updates)
        return NetworkWeights(tensors, self.arch, self.version)


def init_weights(
    arch: ArchConfig | None = None, seed: int = 0, zero_mean_details: bool = True
) -> NetworkWeights:
    """Glorot-uniform convolution weights, zero biases, in layer-table order.

    Kernels of layers that emit high-frequency wavelet coefficients have their
    spatial mean removed per (out, in) pair, so locally constant features map
    to zero detail coefficients.
    """
    arch = arch or ArchConfig()
    rng = SplitMix64(seed)
    tensors: dict[str, np.ndarray] = {}
    for layer in layer_table(arch):
        k2 = layer.kernel * layer.kernel
        bound = math.sqrt(6.0 / (layer.in_ch * k2 + layer.out_ch * k2))
        n = layer.out_ch * layer.in_ch * k2
        w = rng.uniform_range(n, -bound, bound).reshape(layer.shape)
        if zero_mean_details and layer.detail_head:
            first = 3 if layer.name.startswith("ws.dec4") else 0  # LL outputs keep their DC
            w[first:] -= w[first:].mean(axis=(2, 3), keepdims=True)
        tensors[layer.name + ".weight"] = w.astype(np.float32)
        tensors[layer.name + ".bias"] = np.zeros(layer.out_ch, dtype=np.float32)
    return NetworkWeights(tensors, arch)


def zero_motion_heads(weights: NetworkWeights) -> NetworkWeights:
    """Copy with every flow/occlusion output head set to zero."""
    updates = {}
    for name in motion_head_names():
        for suffix in (".weight", ".bias"):
            updates[name + suffix] = np.zeros_like(weights.tensors[name + suffix])
    return weights.replace(**updates)


def save_weights(weights: NetworkWeights, path) -> None:
    parts = [MAGIC, struct.pack("<II", weights.version, len(weights.tensors))]
    for name, arr in weights.tensors.items():
        raw = name.encode("utf-8")
        parts.append(struct.pack("<H", len(raw)))
        parts.append(raw)
        parts.append(struct.pack("<B", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise WeightFileError(f"truncated file reading {what} at offset {self.pos}")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def load_weights(path, arch: ArchConfig | None = None) -> NetworkWeights:
    """Read a weight file and check it against ``arch`` (default architecture if None)."""
    r = _Reader(Path(path).read_bytes())
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise WeightFileError(f"bad magic {magic!r} at offset 0, expected {MAGIC!r}")
    (version,) = r.unpack("<I", "version")
    if version != VERSION:
        raise WeightFileError(f"unsupported version {version} at offset 4")
    (count,) = r.unpack("<I", "entry count")
    tensors = {}
    for _ in range(count):
        start = r.pos
        (nlen,) = r.unpack("<H", "name length")
        try:
            name = r.take(nlen, "name").decode("utf-8")
        except UnicodeDecodeError as exc:
            raise WeightFileError(f"invalid UTF-8 name at offset {start + 2}") from exc
        (rank,) = r.unpack("<B", "rank")
        dims = r.unpack(f"<{rank}I", "dims")
        n = math.prod(dims)
        data = r.take(4 * n, f"data of {name!r}")
        tensors[name] = np.frombuffer(data, dtype="<f4").astype(np.float32).reshape(dims)
    if r.pos != len(r.data):
        raise WeightFileError(f"trailing bytes at offset {r.pos}")
    weights = NetworkWeights(tensors, arch or ArchConfig(), version)
    weights.validate()
    return weights
