"""Device state, action semantics and the in-process simulated device."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..detection import TextFixture, TextLine
from ..errors import ContractError
from ..imaging import image_digest
from .layout import PageLayout
from .pages import ACTION_TYPES, App
from .profiles import DeviceKind, DeviceProfile
from .render import GtEntry, get_layout, photo_margins, render, resolve_page, make_photo, viewport_truth

PAGER_SNAP = 8


@dataclass(frozen=True)
class ConcreteAction:
    """A device-level input event in screen pixels.

    Drags (``ScrollV``, ``SwipeH``) move the finger from ``(x, y)`` to
    ``(x2, y2)``; content follows the finger.
    """

    type: str
    x: int
    y: int
    x2: int | None = None
    y2: int | None = None
    text: str | None = None
    duration_ms: int = 0

    def __post_init__(self):
        if self.type not in ACTION_TYPES:
            raise ContractError(f"unknown action type {self.type!r}")
        if self.type in ("ScrollV", "SwipeH") and (self.x2 is None or self.y2 is None):
            raise ContractError(f"{self.type} needs an end point")

    def to_dict(self) -> dict:
        return {"type": self.type, "x": self.x, "y": self.y, "x2": self.x2, "y2": self.y2,
                "text": self.text, "duration_ms": self.duration_ms}

    @classmethod
    def from_dict(cls, d: dict) -> ConcreteAction:
        try:
            return cls(str(d["type"]), int(d["x"]), int(d["y"]),
                       None if d.get("x2") is None else int(d["x2"]),
                       None if d.get("y2") is None else int(d["y2"]),
                       d.get("text"), int(d.get("duration_ms") or 0))
        except (KeyError, TypeError, ValueError) as exc:
            raise ContractError(f"malformed action: {exc}") from exc


@dataclass(frozen=True)
class DeviceState:
    profile: DeviceProfile
    page: str
    scroll_offset: int = 0
    h_offset: int = 0
    rng_seed: int = 0
    inputs: tuple[tuple[str, str], ...] = ()
    focus: str | None = None
    ad_phase: int = 0

    def __post_init__(self):
        if self.scroll_offset < 0 or self.h_offset < 0:
            raise ContractError("offsets must be non-negative")

    def input_value(self, field_id: str) -> str | None:
        return dict(self.inputs).get(field_id)


def _layout_for(app: App, state: DeviceState) -> PageLayout:
    return get_layout(resolve_page(app, state.page), state.profile, state.inputs)


def clamp_state(app: App, state: DeviceState) -> DeviceState:
    lay = _layout_for(app, state)
    off = min(max(0, state.scroll_offset), lay.max_offset())
    hoff = min(max(0, state.h_offset), lay.max_h_offset())
    return replace(state, scroll_offset=off, h_offset=hoff)


def hit_chain(lay: PageLayout, x: int, y: int) -> list:
    """Nodes under a content-space point, smallest first."""
    hits = [(i, n) for i, n in enumerate(lay.nodes)
            if n.box[0] <= y < n.box[2] and n.box[1] <= x < n.box[3]]
    hits.sort(key=lambda p: ((p[1].box[2] - p[1].box[0]) * (p[1].box[3] - p[1].box[1]), -p[0]))
    return [n for _, n in hits]


def _set_input(inputs: tuple, field_id: str, text: str) -> tuple:
    d = dict(inputs)
    d[field_id] = text
    return tuple(sorted(d.items()))


def apply_action(app: App, state: DeviceState, action: ConcreteAction) -> DeviceState:
    """Next state after ``action``; taps on dead space change nothing."""
    prof = state.profile
    for x, y in ((action.x, action.y), (action.x2, action.y2)):
        if x is None:
            continue
        if not (0 <= x < prof.width and 0 <= y < prof.height):
            raise ContractError(f"point ({x}, {y}) outside {prof.width}x{prof.height} screen")
    page = resolve_page(app, state.page)
    lay = get_layout(page, prof, state.inputs)
    t = action.type
    if t == "ScrollV":
        off = min(max(0, state.scroll_offset + action.y - action.y2), lay.max_offset())
        return replace(state, scroll_offset=off)
    if t == "SwipeH":
        dx = action.x - action.x2
        if lay.panes > 1:
            # pagers snap: a swipe longer than an eighth of a pane turns one page
            if abs(dx) * PAGER_SNAP < lay.pane_width:
                return state
            pane = state.h_offset // lay.pane_width + (1 if dx > 0 else -1)
            return replace(state, h_offset=min(max(0, pane), lay.panes - 1) * lay.pane_width)
        hoff = min(max(0, state.h_offset + dx), lay.max_h_offset())
        return replace(state, h_offset=hoff)
    chain = hit_chain(lay, action.x + state.h_offset, action.y + state.scroll_offset)
    if t == "Input":
        target = next((n.id for n in chain if n.editable), state.focus)
        if target is None or action.text is None:
            return state
        return replace(state, inputs=_set_input(state.inputs, target, action.text), focus=target)
    for n in chain:
        to = page.transitions.get((n.id, t))
        if to is not None:
            app.page(to)
            return replace(state, page=to, scroll_offset=0, h_offset=0, focus=None)
        if n.editable and t == "Click":
            return replace(state, focus=n.id)
    return state


class SimulatedDevice:
    """In-process device: renders frames and applies actions to its state.

    Every screenshot registers its text lines in ``fixture`` so that the
    fixture text provider can read them back by image digest.
    """

    def __init__(self, app: App, profile: DeviceProfile, page: str | None = None,
                 rng_seed: int = 0, fixture: TextFixture | None = None):
        self.app = app
        self.profile = profile
        self.fixture = fixture if fixture is not None else TextFixture()
        self.state = DeviceState(profile, page or app.start, rng_seed=rng_seed)
        app.page(self.state.page)

    @property
    def name(self) -> str:
        return self.profile.name

    def reset(self, page: str | None = None) -> None:
        self.state = DeviceState(self.profile, page or self.app.start, rng_seed=self.state.rng_seed)
        self.app.page(self.state.page)

    def layout(self) -> PageLayout:
        return _layout_for(self.app, self.state)

    def render(self):
        return render(self.app, self.state)

    def ground_truth(self) -> list[GtEntry]:
        return viewport_truth(self.layout(), self.state.h_offset, self.state.scroll_offset)

    def screenshot(self) -> np.ndarray:
        out = self.render()
        lines = out.text_lines
        img = out.frame
        if self.profile.kind is DeviceKind.PHOTO:
            img = make_photo(out.frame, self.state)
            mx, my = photo_margins(self.profile)
            lines = [TextLine(ln.bbox.shifted(mx, my), ln.content) for ln in lines]
        # screenshots are immutable, which lets every later consumer reuse one digest
        img.flags.writeable = False
        self.fixture.register(image_digest(img), lines)
        return img

    def execute(self, action: ConcreteAction) -> None:
        self.state = apply_action(self.app, self.state, action)

    def close(self) -> None:
        pass
