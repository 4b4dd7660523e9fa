import numpy as np
import pytest

from visreplay.corpus import build_catalog
from visreplay.devicefarm.device import SimulatedDevice
from visreplay.devicefarm.profiles import get_profile
from visreplay.replay import perception_for

# criterion number -> (title, passed, detail), filled in by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criteria")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {n:>2} {title}: {detail}")


@pytest.fixture(scope="session")
def app():
    return build_catalog()


@pytest.fixture(scope="session")
def snap_of(app):
    """Render ``page`` on ``profile`` at ``offset`` and run the full detector on it."""
    cache = {}

    def get(profile, page, offset=0, h_offset=0):
        key = (profile, page, offset, h_offset)
        if key not in cache:
            dev = SimulatedDevice(app, get_profile(profile), page)
            dev.state = dev.state.__class__(dev.profile, page, scroll_offset=offset, h_offset=h_offset)
            cap = perception_for(dev).capture(dev)
            cache[key] = (dev, cap.snapshot)
        return cache[key]

    return get


def solid(h, w, rgb):
    img = np.zeros((h, w, 3), dtype=np.uint8)
    img[:] = rgb
    return img
