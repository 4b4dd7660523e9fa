"""Simulated device farm and the wire protocol for external devices."""

from .profiles import DeviceKind, DeviceProfile, Skin, get_profile, list_profiles, parse_profiles

__all__ = ["DeviceKind", "DeviceProfile", "Skin", "get_profile", "list_profiles", "parse_profiles"]
