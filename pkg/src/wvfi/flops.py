"""FLOPs accounting: one multiply-accumulate counts as 2 FLOPs, biases and
activations are free, sparse layers are charged dense cost times mask density.
"""

from __future__ import annotations

from dataclasses import dataclass, field


def conv_flops_dense(kernel: tuple[int, int], in_ch: int, out_ch: int, out_h: int, out_w: int) -> int:
    kh, kw = kernel
    return 2 * kh * kw * in_ch * out_ch * out_h * out_w


def conv_flops(spec, out_h: int, out_w: int, valid_fraction: float = 1.0) -> int:
    """Charged FLOPs of one convolution (``spec`` needs kernel/in/out channels)."""
    if not 0.0 <= valid_fraction <= 1.0:
        raise ValueError(f"valid_fraction must lie in [0, 1], got {valid_fraction}")
    dense = conv_flops_dense(spec.kernel, spec.in_channels, spec.out_channels, out_h, out_w)
    return round(dense * valid_fraction)


@dataclass
class LedgerEntry:
    layer: str
    dense_flops: int
    valid_fraction: float
    charged_flops: int


@dataclass
class FlopsLedger:
    entries: list[LedgerEntry] = field(default_factory=list)

    def charge(self, layer: str, dense_flops: int, valid_fraction: float = 1.0) -> int:
        if not 0.0 <= valid_fraction <= 1.0:
            raise ValueError(f"valid_fraction must lie in [0, 1], got {valid_fraction}")
        charged = round(dense_flops * valid_fraction)
        self.entries.append(LedgerEntry(layer, dense_flops, valid_fraction, charged))
        return charged

    @property
    def total(self) -> int:
        return sum(e.charged_flops for e in self.entries)

    @property
    def dense_total(self) -> int:
        return sum(e.dense_flops for e in self.entries)

    def subtotal(self, prefix: str) -> int:
        return sum(e.charged_flops for e in self.entries if e.layer.startswith(prefix))

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "dense_total": self.dense_total,
            "entries": [
                {
                    "layer": e.layer,
                    "dense_flops": e.dense_flops,
                    "valid_fraction": e.valid_fraction,
                    "charged_flops": e.charged_flops,
                }
                for e in self.entries
            ],
        }


def ledger_for_synthesis(result, weights) -> FlopsLedger:
    """Charge every layer of the pipeline for one synthesis result.

    Motion-network, encoder and level-4 layers are dense; decoder feature
    convs at levels 1..3 are charged at the density of the dilated mask and
    coefficient heads at the density of the mask itself.
    """
    from .config import layer_table
    from .sparse import density, dilate3

    h, w = result.pyramid.size
    ledger = FlopsLedger()
    for layer in layer_table(weights.arch):
        oh, ow = layer.out_size(h, w)
        dense = layer.repeat * conv_flops_dense(
            (layer.kernel, layer.kernel), layer.in_ch, layer.out_ch, oh, ow
        )
        if layer.mask is None:
            frac = 1.0
        elif layer.mask == "dilated":
            frac = density(dilate3(result.masks[layer.level]))
        else:
            frac = density(result.masks[layer.level])
        ledger.charge(layer.name, dense, frac)
    return ledger
