"""Architecture configuration and the desk/paper presets."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

DEFAULT_KERNEL_SIZES = (3, 7, 11, 15, 19)
PAPER_LEVEL_RESOLUTIONS = (256, 320, 416, 544, 800)
DESK_LEVEL_RESOLUTIONS = (64, 80, 104, 136, 200)  # paper list / 4


@dataclass(frozen=True)
class NetworkConfig:
    """Widths and schedules for generator and discriminators.

    `channels` are (stem, mid, feature) widths; the encoder downsamples x4,
    so the feature grid is (H/4, W/4, channels[2]).
    """

    preset: str = "desk"
    n_levels: int = 5
    kernel_sizes: tuple[int, ...] = DEFAULT_KERNEL_SIZES
    channels: tuple[int, int, int] = (16, 32, 64)
    disc_channels: tuple[int, int, int] = (16, 32, 64)
    n_blocks: int = 2
    cardinality: int = 4
    photo_size: int = 64
    level_resolutions: tuple[int, ...] = DESK_LEVEL_RESOLUTIONS
    cue_segments: int = 32

    def __post_init__(self):
        if len(self.kernel_sizes) != self.n_levels:
            raise ValueError("kernel schedule length must equal n_levels")
        if list(self.kernel_sizes) != sorted(self.kernel_sizes):
            raise ValueError("kernel sizes must increase")
        if any(k % 2 == 0 for k in self.kernel_sizes):
            raise ValueError("kernel sizes must be odd")
        if len(self.level_resolutions) != self.n_levels:
            raise ValueError("level_resolutions length must equal n_levels")
        if list(self.level_resolutions) != sorted(set(self.level_resolutions)):
            raise ValueError("level_resolutions must be strictly increasing")
        if self.channels[2] // 2 % self.cardinality != 0:
            raise ValueError("feature width must accommodate the grouped convs")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkConfig":
        d = dict(d)
        for key in ("kernel_sizes", "channels", "disc_channels", "level_resolutions"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


DESK = NetworkConfig()

PAPER = NetworkConfig(
    preset="paper",
    n_levels=5,
    kernel_sizes=DEFAULT_KERNEL_SIZES,
    channels=(64, 128, 256),
    disc_channels=(64, 128, 256),
    n_blocks=4,
    cardinality=32,
    photo_size=256,
    level_resolutions=PAPER_LEVEL_RESOLUTIONS,
    cue_segments=200,
)

PRESETS = {"desk": DESK, "paper": PAPER}


def get_preset(name: str) -> NetworkConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
