"""Architecture, engine configuration and the layer table both networks share.

The layer table is the single source of truth for weight names, shapes,
initialisation order and FLOPs accounting.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

LEVELS = 4
MOTION_HEAD_CHANNELS = 5  # flow to frame 0 (2), flow to frame 1 (2), occlusion logit
ENCODER2_INPUTS = 8  # two flows, occlusion, merged RGB frame

# compression threshold ratios swept for the accuracy/compute trade-off
ETA_GRID = (0.0, 0.0025, 0.005, 0.0075, 0.01, 0.0125, 0.015)
DEFAULT_CANDIDATES = (0.0, 0.005, 0.010, 0.015)


@dataclass(frozen=True)
class ArchConfig:
    """Channel widths, indexed by pyramid level 1..4."""

    mp_encoder: tuple[int, ...] = (32, 48, 72, 96)
    mp_decoder: tuple[int, ...] = (32, 48, 72, 96)
    classifier_channels: int = 32
    classifier_hidden: int = 32
    num_candidates: int = 4
    ws_encoder1: tuple[int, ...] = (32, 64, 96, 128)
    ws_encoder2: tuple[int, ...] = (32, 64, 96, 128)
    ws_decoder: tuple[int, ...] = (48, 64, 96, 128)

    def __post_init__(self):
        for name in ("mp_encoder", "mp_decoder", "ws_encoder1", "ws_encoder2", "ws_decoder"):
            widths = getattr(self, name)
            if len(widths) != LEVELS or min(widths) < 1:
                raise ValueError(f"{name} needs {LEVELS} positive widths, got {widths}")
        if self.num_candidates < 1:
            raise ValueError("need at least one threshold candidate")

    def context_channels(self, level: int) -> int:
        return 2 * self.ws_encoder1[level - 1] + self.ws_encoder2[level - 1]

    @classmethod
    def tiny(cls) -> "ArchConfig":
        """Narrow network for fast tests."""
        return cls(
            mp_encoder=(4, 6, 8, 10),
            mp_decoder=(4, 6, 8, 10),
            classifier_channels=4,
            classifier_hidden=6,
            ws_encoder1=(4, 6, 8, 10),
            ws_encoder2=(4, 6, 8, 10),
            ws_decoder=(6, 8, 10, 12),
        )


@dataclass(frozen=True)
class LayerDef:
    """One learnable layer.

    ``level`` fixes the output resolution (``H / 2**level``); ``None`` means a
    fully connected layer on a pooled 1x1 map. ``repeat`` counts how many
    times the shared weights run per forward pass. ``mask`` is ``None`` for
    dense layers, ``"dilated"`` or ``"valid"`` for sparse ones.
    """

    name: str
    in_ch: int
    out_ch: int
    kernel: int
    stride: int
    padding: int
    level: int | None
    repeat: int = 1
    mask: str | None = None
    detail_head: bool = False

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.out_ch, self.in_ch, self.kernel, self.kernel)

    def out_size(self, height: int, width: int) -> tuple[int, int]:
        if self.level is None:
            return 1, 1
        return height >> self.level, width >> self.level


def layer_table(arch: ArchConfig) -> list[LayerDef]:
    layers: list[LayerDef] = []
    add = layers.append

    # motion network: pyramid encoder, run on both frames
    prev = 3
    for l in range(1, LEVELS + 1):
        w = arch.mp_encoder[l - 1]
        add(LayerDef(f"mp.enc{l}.0", prev, w, 3, 2, 1, l, repeat=2))
        add(LayerDef(f"mp.enc{l}.1", w, w, 3, 1, 1, l, repeat=2))
        prev = w
    for l in range(LEVELS, 0, -1):
        w = arch.mp_decoder[l - 1]
        feat = 2 * arch.mp_encoder[l - 1]
        cin = feat if l == LEVELS else MOTION_HEAD_CHANNELS + feat
        add(LayerDef(f"mp.dec{l}.0", cin, w, 3, 1, 1, l))
        add(LayerDef(f"mp.dec{l}.1", w, w, 3, 1, 1, l))
        add(LayerDef(f"mp.dec{l}.head", w, MOTION_HEAD_CHANNELS, 3, 1, 1, l))
        if l == LEVELS:
            c, hdn = arch.classifier_channels, arch.classifier_hidden
            add(LayerDef("mp.cls.conv", w, c, 3, 1, 1, l))
            add(LayerDef("mp.cls.fc1", c, hdn, 1, 1, 0, None))
            add(LayerDef("mp.cls.fc2", hdn, arch.num_candidates, 1, 1, 0, None))

    # synthesis network: two context encoders, one stride-2 conv per level
    prev = 3
    for l in range(1, LEVELS + 1):
        w = arch.ws_encoder1[l - 1]
        add(LayerDef(f"ws.enc1.{l}", prev, w, 3, 2, 1, l, repeat=2))
        prev = w
    prev = ENCODER2_INPUTS
    for l in range(1, LEVELS + 1):
        w = arch.ws_encoder2[l - 1]
        add(LayerDef(f"ws.enc2.{l}", prev, w, 3, 2, 1, l))
        prev = w

    skip = arch.ws_decoder[LEVELS - 1]
    for l in range(LEVELS, 0, -1):
        w = arch.ws_decoder[l - 1]
        if l == LEVELS:
            add(LayerDef(f"ws.dec{l}.0", arch.context_channels(l), w, 3, 1, 1, l))
            add(LayerDef(f"ws.dec{l}.head", w, 12, 3, 1, 1, l, detail_head=True))
        else:
            cin = arch.context_channels(l) + skip
            add(LayerDef(f"ws.dec{l}.0", cin, w, 3, 1, 1, l, mask="dilated"))
            add(LayerDef(f"ws.dec{l}.head", w, 9, 3, 1, 1, l, mask="valid", detail_head=True))
    return layers


def motion_head_names() -> list[str]:
    return [f"mp.dec{l}.head" for l in range(1, LEVELS + 1)]


@dataclass(frozen=True)
class EngineConfig:
    """Run-time settings for the interpolation engine and CLI."""

    dynamic: bool = False
    eta: float = 0.0
    candidates: tuple[float, ...] = DEFAULT_CANDIDATES
    temperature: float = 1.0
    seed: int = 0
    arch: ArchConfig = field(default_factory=ArchConfig)

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError(f"fixed eta must be >= 0, got {self.eta}")
        c = self.candidates
        if any(b <= a for a, b in zip(c, c[1:])):
            raise ValueError(f"candidates must be strictly increasing, got {c}")
        if len(c) != self.arch.num_candidates:
            raise ValueError(
                f"{len(c)} candidates but the classifier has {self.arch.num_candidates} outputs"
            )
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")

    def to_dict(self) -> dict:
        return asdict(self)
