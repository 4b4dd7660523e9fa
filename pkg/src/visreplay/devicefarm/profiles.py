"""Built-in device geometries (portrait orientation)."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from ..errors import ConfigError


class Skin(str, enum.Enum):
    A = "SkinA"
    B = "SkinB"


class DeviceKind(str, enum.Enum):
    VIRTUAL = "Virtual"
    PHOTO = "PhysicalPhoto"


@dataclass(frozen=True)
class DeviceProfile:
    name: str
    width: int
    height: int
    dpi: float
    platform_skin: Skin = Skin.A
    kind: DeviceKind = DeviceKind.VIRTUAL

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0 or self.dpi <= 0:
            raise ConfigError(f"profile {self.name}: width, height and dpi must be positive")

    @property
    def scale(self) -> float:
        """Pixels per density-independent pixel."""
        return self.dpi / 160.0

    def px(self, dp: float) -> int:
        return int(round(dp * self.scale))

    @property
    def width_dp(self) -> float:
        return self.width / self.scale

    @property
    def height_dp(self) -> float:
        return self.height / self.scale


_BUILTIN = (
    DeviceProfile("D1", 2200, 2480, 420, Skin.A, DeviceKind.VIRTUAL),
    DeviceProfile("D2", 720, 1600, 270, Skin.A, DeviceKind.PHOTO),
    DeviceProfile("D3", 1080, 2340, 440, Skin.A, DeviceKind.VIRTUAL),
    DeviceProfile("D4", 1080, 1920, 420, Skin.A, DeviceKind.VIRTUAL),
    DeviceProfile("D5", 480, 800, 240, Skin.A, DeviceKind.VIRTUAL),
    DeviceProfile("D6", 1284, 2778, 458, Skin.B, DeviceKind.PHOTO),
    DeviceProfile("D7", 1080, 1920, 401, Skin.B, DeviceKind.PHOTO),
    DeviceProfile("D8", 1284, 2778, 264, Skin.B, DeviceKind.PHOTO),
)


def list_profiles() -> list[DeviceProfile]:
    return list(_BUILTIN)


def get_profile(name: str) -> DeviceProfile:
    for p in _BUILTIN:
        if p.name == name:
            return p
    raise ConfigError(f"unknown device profile {name!r}")


def parse_profiles(spec: str | list[str] | None) -> list[DeviceProfile]:
    """Profiles from a comma-separated list of names; all built-ins when empty."""
    if not spec:
        return list_profiles()
    names = spec.split(",") if isinstance(spec, str) else list(spec)
    return [get_profile(n.strip()) for n in names if n.strip()]
