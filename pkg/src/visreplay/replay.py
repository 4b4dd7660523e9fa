"""Record actions on a source device and replay them on target devices.

Widget-dependent actions (click, long press, input) are replayed by finding
the recorded widget on the target screen, scrolling one screen at a time when
it is not visible. Widget-independent actions (vertical scroll, horizontal
swipe) are replayed by stepping the target until its screen matches the
source's screen after the action.
"""

from __future__ import annotations

import enum
import json
import math
from collections import OrderedDict
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import jsonschema
import numpy as np

from .detection import DetectConfig, detect_gui, detect_photo, fixture_text_provider
from .devicefarm.device import ConcreteAction
from .devicefarm.profiles import DeviceKind, DeviceProfile
from .devicefarm.render import viewport_truth
from .errors import ConfigError, ContractError, DeviceIOError, RecordError, ScreenNotFound, AmbiguousScreen
from .extraction import GuiSnapshot, WidgetProfile
from .imaging import embed_clip, image_digest
from .matching import (MatchConfig, gui_unchanged_same_device, match_gui_cross_device,
                       match_widget, order_by_screen)
from .schemas import load_schema

WIDGET_DEPENDENT = ("Click", "LongPress", "Input")
WIDGET_INDEPENDENT = ("ScrollV", "SwipeH")
PROBE_FRACTION = 4
MIN_STEP_FRACTION = 128
REFINE_FROM = 0.5
MAX_SCROLL_STEPS = 64


class Status(str, enum.Enum):
    REPLAYED = "Replayed"
    WIDGET_NOT_FOUND = "WidgetNotFound"
    MARGIN_REACHED = "MarginReached"
    DEVICE_IO_ERROR = "DeviceIOError"


# -- perception ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Capture:
    """One screenshot and the snapshot detected from it.

    ``image`` is what the device returned (a photo for camera devices);
    ``snapshot`` is in screen coordinates.
    """

    image: np.ndarray = field(repr=False)
    snapshot: GuiSnapshot
    digest: str


class Perception:
    """Screenshot-to-snapshot pipeline with a digest-keyed cache."""

    def __init__(self, provider, detect_cfg: DetectConfig | None = None, encoder=embed_clip,
                 cache_size: int = 16):
        self.provider = provider
        self.detect_cfg = detect_cfg or DetectConfig()
        self.encoder = encoder
        self.cache_size = cache_size
        self._cache: OrderedDict[tuple, GuiSnapshot] = OrderedDict()

    def snapshot(self, image: np.ndarray, profile: DeviceProfile) -> GuiSnapshot:
        digest = image_digest(image)
        key = (digest, profile.name)
        snap = self._cache.get(key)
        if snap is not None:
            self._cache.move_to_end(key)
            return snap
        cfg = self.detect_cfg.for_dpi(profile.dpi)
        if profile.kind is DeviceKind.PHOTO:
            _, snap = detect_photo(image, self.provider, cfg, device=profile, encoder=self.encoder)
        else:
            snap = detect_gui(image, self.provider, cfg, device=profile, encoder=self.encoder)
        self._cache[key] = snap
        while len(self._cache) > self.cache_size:
            self._cache.popitem(last=False)
        return snap

    def capture(self, device) -> Capture:
        image = device.screenshot()
        try:
            snap = self.snapshot(image, device.profile)
        except (ScreenNotFound, AmbiguousScreen) as exc:
            raise DeviceIOError(f"unusable photo from {device.profile.name}: {exc}") from exc
        return Capture(image, snap, image_digest(image))


def perception_for(device, detect_cfg: DetectConfig | None = None) -> Perception:
    """Perception reading text from a simulated device's own fixture."""
    return Perception(fixture_text_provider(device.fixture), detect_cfg)


# -- scripts and records ------------------------------------------------------

@dataclass(frozen=True)
class ScriptStep:
    """One scripted action. ``widget`` names the page widget to act on;
    ``screens`` is a drag length in screen heights (ScrollV) or widths (SwipeH),
    positive meaning forward (down or to the next pane)."""

    action: str
    widget: str | None = None
    text: str | None = None
    screens: float = 0.0
    duration_ms: int = 0

    def __post_init__(self):
        if self.action not in WIDGET_DEPENDENT + WIDGET_INDEPENDENT:
            raise ContractError(f"unknown action {self.action!r}")
        if self.action in WIDGET_DEPENDENT and not self.widget:
            raise ContractError(f"{self.action} step needs a widget")
        if self.action == "Input" and self.text is None:
            raise ContractError("Input step needs text")

    def to_dict(self) -> dict:
        d = {"action": self.action}
        if self.widget is not None:
            d["widget"] = self.widget
        if self.text is not None:
            d["text"] = self.text
        if self.screens:
            d["screens"] = self.screens
        if self.duration_ms:
            d["duration_ms"] = self.duration_ms
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ScriptStep:
        return cls(d["action"], d.get("widget"), d.get("text"), float(d.get("screens", 0.0)),
                   int(d.get("duration_ms", 0)))


@dataclass(frozen=True)
class TestCase:
    name: str
    source_device: str
    start_page: str
    steps: tuple[ScriptStep, ...]
    correction_budget: int = 1

    __test__ = False  # keep pytest from collecting this class

    def __post_init__(self):
        if not self.steps:
            raise ContractError("a test case needs at least one step")
        if self.correction_budget not in (0, 1):
            raise ContractError("correction_budget must be 0 or 1")

    @property
    def widget_independent_count(self) -> int:
        return sum(1 for s in self.steps if s.action in WIDGET_INDEPENDENT)

    def to_dict(self) -> dict:
        return {"name": self.name, "source_device": self.source_device, "start_page": self.start_page,
                "correction_budget": self.correction_budget, "steps": [s.to_dict() for s in self.steps]}

    @classmethod
    def from_dict(cls, d: dict) -> TestCase:
        try:
            jsonschema.validate(d, load_schema("testcase"))
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"invalid test case: {exc.message}") from exc
        return cls(d["name"], d["source_device"], d["start_page"],
                   tuple(ScriptStep.from_dict(s) for s in d["steps"]), d.get("correction_budget", 1))

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: str | Path) -> TestCase:
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read test case {path}: {exc}") from exc


@dataclass(frozen=True, eq=False)
class ActionRecord:
    action_type: str
    point: tuple[int, int]
    source_device: DeviceProfile
    source_before: GuiSnapshot
    distance: int = 0
    text_payload: str | None = None
    duration_ms: int = 0
    source_after: GuiSnapshot | None = None
    source_widget: int | None = None

    def __post_init__(self):
        if self.widget_dependent and self.source_widget is None:
            raise ContractError("widget-dependent records need a source widget")
        if not self.widget_dependent and self.source_after is None:
            raise ContractError("widget-independent records need the after snapshot")

    @property
    def widget_dependent(self) -> bool:
        return self.action_type in WIDGET_DEPENDENT

    def to_dict(self) -> dict:
        return {"action_type": self.action_type, "point": list(self.point),
                "source_device": self.source_device.name, "distance": self.distance,
                "text_payload": self.text_payload, "duration_ms": self.duration_ms,
                "source_before": self.source_before.digest,
                "source_after": self.source_after.digest if self.source_after else None,
                "source_widget": self.source_widget}


def drag_action(action_type: str, profile: DeviceProfile, distance: int) -> ConcreteAction:
    """A drag through the screen middle moving content by ``distance`` pixels."""
    if action_type == "ScrollV":
        span = profile.height - 1
        d = max(-span, min(span, distance))
        y = (span + d) // 2
        x = profile.width // 2
        return ConcreteAction("ScrollV", x, y, x, y - d)
    if action_type == "SwipeH":
        span = profile.width - 1
        d = max(-span, min(span, distance))
        x = (span + d) // 2
        y = profile.height // 2
        return ConcreteAction("SwipeH", x, y, x - d, y)
    raise ContractError(f"{action_type} is not a drag")


def tap_point_for_widget(w: WidgetProfile) -> tuple[int, int]:
    box = w.location
    return (box.left + box.right) // 2, (box.top + box.bottom) // 2


def script_point(device, widget_id: str) -> tuple[int, int]:
    """Centre of the first visible piece of ``widget_id`` on a simulated device."""
    for g in device.ground_truth():
        if g.id == widget_id or g.owner == widget_id:
            return (g.bbox.left + g.bbox.right) // 2, (g.bbox.top + g.bbox.bottom) // 2
    raise RecordError(f"widget {widget_id!r} is not on the source screen")


def record_scripted_action(source, step: ScriptStep, perception: Perception,
                           point: tuple[int, int] | None = None) -> ActionRecord:
    """Capture the source screen, resolve the acted-on widget, then perform the action."""
    prof = source.profile
    before = perception.capture(source).snapshot
    if step.action in WIDGET_DEPENDENT:
        if point is None:
            point = script_point(source, step.widget)
        widget = before.widget_at(*point)
        if widget is None:
            raise RecordError(f"no detected widget under {point}")
        source.execute(ConcreteAction(step.action, point[0], point[1], text=step.text,
                                      duration_ms=step.duration_ms))
        return ActionRecord(step.action, tuple(point), prof, before, text_payload=step.text,
                            duration_ms=step.duration_ms, source_widget=widget)
    extent = prof.height if step.action == "ScrollV" else prof.width
    action = drag_action(step.action, prof, int(round(step.screens * extent)))
    source.execute(action)
    after = perception.capture(source).snapshot
    distance = (action.y - action.y2) if step.action == "ScrollV" else (action.x - action.x2)
    return ActionRecord(step.action, (action.x, action.y), prof, before, distance=distance,
                        source_after=after)


# -- replay -------------------------------------------------------------------

@dataclass
class ReplayOutcome:
    device: str
    status: Status
    executed_point: tuple[int, int] | None = None
    scroll_steps_used: int = 0
    logs: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if self.status is Status.REPLAYED and self.executed_point is None:
            raise ContractError("a replayed outcome needs the executed point")

    def to_dict(self) -> dict:
        return {"device": self.device, "status": self.status.value,
                "executed_point": list(self.executed_point) if self.executed_point else None,
                "scroll_steps_used": self.scroll_steps_used, "logs": self.logs}


def _clamp_point(x: int, y: int, profile: DeviceProfile) -> tuple[int, int]:
    return min(max(0, x), profile.width - 1), min(max(0, y), profile.height - 1)


def replay_widget_dependent(rec: ActionRecord, target, perception: Perception,
                            cfg: MatchConfig | None = None,
                            max_steps: int = MAX_SCROLL_STEPS) -> ReplayOutcome:
    """Find the recorded widget on the target, scrolling down and then up a screen at a time."""
    if not rec.widget_dependent:
        raise ContractError("record is widget-independent")
    cfg = cfg or MatchConfig()
    prof = target.profile
    name = prof.name
    logs: list[dict] = []
    steps = 0

    def attempt(cap: Capture):
        res = match_widget(rec.source_before, rec.source_widget, cap.snapshot, cfg)
        logs.append(dict(res.log_entry(rec.source_widget), screen=steps))
        return res.matched

    def execute(cap: Capture, j: int) -> ReplayOutcome:
        x, y = _clamp_point(*tap_point_for_widget(cap.snapshot.profiles[j]), prof)
        target.execute(ConcreteAction(rec.action_type, x, y, text=rec.text_payload,
                                      duration_ms=rec.duration_ms))
        return ReplayOutcome(name, Status.REPLAYED, (x, y), steps, logs)

    cap = perception.capture(target)
    j = attempt(cap)
    if j is not None:
        return execute(cap, j)
    for direction in (1, -1):
        drag = drag_action("ScrollV", prof, direction * (prof.height - 1))
        while steps < max_steps:
            target.execute(drag)
            steps += 1
            nxt = perception.capture(target)
            if gui_unchanged_same_device(cap.image, nxt.image, cfg):
                cap = nxt
                break
            cap = nxt
            j = attempt(cap)
            if j is not None:
                return execute(cap, j)
    return ReplayOutcome(name, Status.WIDGET_NOT_FOUND, None, steps, logs)


def _gui_check(rec: ActionRecord, cap: Capture, cfg: MatchConfig, logs: list, steps: int):
    small, large = order_by_screen(rec.source_after, cap.snapshot)
    gm = match_gui_cross_device(small, large, cfg)
    logs.append({"screen": steps, "fraction": gm.fraction, "counted": gm.counted,
                 "matched": gm.matched})
    return gm, small is cap.snapshot


def _wanted_direction(gm, small: GuiSnapshot, target_is_small: bool, vertical: bool) -> int:
    """Which way the target should move, judged from where the unmatched widgets sit.

    Unmatched widgets low on the source screen mean the target has not yet
    scrolled far enough; low on the target screen mean it went too far.
    """
    pos = [((w.bbox.top + w.bbox.bottom) if vertical else (w.bbox.left + w.bbox.right)) / 2
           for i, w in enumerate(small.raw) if i in gm.results and gm.results[i].matched is None]
    if not pos:
        return 0
    extent = small.height if vertical else small.width
    forward = sum(pos) / len(pos) > extent / 2
    return (1 if forward else -1) * (-1 if target_is_small else 1)


def replay_widget_independent(rec: ActionRecord, target, perception: Perception,
                              cfg: MatchConfig | None = None,
                              max_steps: int = MAX_SCROLL_STEPS) -> ReplayOutcome:
    """Step the target in the recorded direction until its screen matches the source's.

    Probes move a quarter screen. Once at least ``REFINE_FROM`` of the
    widgets match and the unmatched ones show that the target has moved
    past the source's view, the search turns back with half the step. It
    keeps halving at every turn and gives up below ``1/MIN_STEP_FRACTION``
    of the screen.
    """
    if rec.widget_dependent:
        raise ContractError("record is widget-dependent")
    cfg = cfg or MatchConfig()
    prof = target.profile
    name = prof.name
    centre = (prof.width // 2, prof.height // 2)
    if rec.distance == 0 or gui_unchanged_same_device(rec.source_before.image, rec.source_after.image, cfg):
        return ReplayOutcome(name, Status.REPLAYED, centre, 0, [])
    logs: list[dict] = []
    steps = 0
    cap = perception.capture(target)
    gm, _ = _gui_check(rec, cap, cfg, logs, steps)
    if gm.matched:
        return ReplayOutcome(name, Status.REPLAYED, centre, steps, logs)
    vertical = rec.action_type == "ScrollV"
    extent = prof.height if vertical else prof.width
    sign = 1 if rec.distance > 0 else -1
    step = extent // PROBE_FRACTION
    refining = False
    while steps < max_steps:
        drag = drag_action(rec.action_type, prof, sign * step)
        target.execute(drag)
        steps += 1
        nxt = perception.capture(target)
        still = gui_unchanged_same_device(cap.image, nxt.image, cfg)
        if still and not refining:
            return ReplayOutcome(name, Status.MARGIN_REACHED, None, steps, logs)
        cap = nxt
        gm, target_small = _gui_check(rec, cap, cfg, logs, steps)
        if gm.matched:
            return ReplayOutcome(name, Status.REPLAYED, (drag.x, drag.y), steps, logs)
        if not vertical or gm.fraction < REFINE_FROM:
            continue
        small = cap.snapshot if target_small else rec.source_after
        want = _wanted_direction(gm, small, target_small, vertical)
        if want == -sign:
            refining = True
            sign, step = want, step // 2
            if step * MIN_STEP_FRACTION < extent:
                break
        elif still:
            break
    return ReplayOutcome(name, Status.MARGIN_REACHED, None, steps, logs)


def replay_action(rec: ActionRecord, target, perception: Perception,
                  cfg: MatchConfig | None = None) -> ReplayOutcome:
    try:
        if rec.widget_dependent:
            return replay_widget_dependent(rec, target, perception, cfg)
        return replay_widget_independent(rec, target, perception, cfg)
    except DeviceIOError as exc:
        return ReplayOutcome(target.profile.name, Status.DEVICE_IO_ERROR, logs=[{"error": str(exc)}])


# -- test cases with ground-truth judging ---------------------------------------

def truth_key(entry) -> str:
    """Identity used for judging; wrapped lines of one label share it."""
    return entry.owner if entry.wtype == "TextLine" else entry.id


class JudgedDevice:
    """Device handle that lets the harness see ground truth before each action.

    ``handle`` carries the actual traffic (in-process or over the adapter);
    ``sim`` is the simulated device behind it, used only for judging and for
    simulated manual corrections.
    """

    def __init__(self, handle, sim):
        self.handle, self.sim = handle, sim
        self.profile = handle.profile
        self.truth_before_last = None
        self.actions = 0

    @property
    def name(self) -> str:
        return self.profile.name

    def screenshot(self) -> np.ndarray:
        return self.handle.screenshot()

    def execute(self, action: ConcreteAction) -> None:
        self.truth_before_last = self.sim.ground_truth()
        self.actions += 1
        self.handle.execute(action)

    def close(self) -> None:
        self.handle.close()


@dataclass(frozen=True)
class SourceTruth:
    """What the harness knows about a recorded step from the source's ground truth."""

    key: str | None = None
    visible: frozenset = frozenset()
    complete: frozenset = frozenset()
    at_margin: bool = False


def visible_keys(truth) -> tuple[frozenset, frozenset]:
    """``(all visible, fully visible)`` identity sets of a viewport."""
    return (frozenset(truth_key(g) for g in truth),
            frozenset(truth_key(g) for g in truth if not g.clipped))


def screens_correspond(a_profile, a_truth, b_profile, b_truth) -> bool:
    """Everything fully shown on the smaller screen is shown on the larger one."""
    a_all, a_full = a_truth
    b_all, b_full = b_truth
    a_area = a_profile.width_dp * a_profile.height_dp
    b_area = b_profile.width_dp * b_profile.height_dp
    return a_full <= b_all if a_area <= b_area else b_full <= a_all


def at_margin(sim, action_type: str, direction: int) -> bool:
    """Whether a simulated device cannot move further in ``direction``."""
    lay, st = sim.layout(), sim.state
    if action_type == "ScrollV":
        pos, end = st.scroll_offset, lay.max_offset()
    else:
        pos, end = st.h_offset, lay.max_h_offset()
    return pos >= end if direction > 0 else pos <= 0


def record_test_case(tc: TestCase, source, perception: Perception) -> list[tuple[ActionRecord, SourceTruth]]:
    source.reset(tc.start_page)
    out = []
    for step in tc.steps:
        if step.action in WIDGET_DEPENDENT:
            point = script_point(source, step.widget)
            hit = [g for g in source.ground_truth() if g.bbox.contains_point(*point)]
            hit.sort(key=lambda g: g.bbox.area)
            key = truth_key(hit[0]) if hit else None
            rec = record_scripted_action(source, step, perception, point)
            out.append((rec, SourceTruth(key=key)))
        else:
            rec = record_scripted_action(source, step, perception)
            vis, full = visible_keys(source.ground_truth())
            margin = at_margin(source, rec.action_type, rec.distance)
            out.append((rec, SourceTruth(visible=vis, complete=full, at_margin=margin)))
    return out


@dataclass
class StepReport:
    index: int
    action: str
    outcome: ReplayOutcome | None
    correct: bool
    corrected: bool = False
    offscreen: bool = False

    def to_dict(self) -> dict:
        return {"index": self.index, "action": self.action, "correct": self.correct,
                "corrected": self.corrected, "offscreen": self.offscreen,
                "outcome": self.outcome.to_dict() if self.outcome else None}


@dataclass
class DeviceReport:
    device: str
    steps: list[StepReport]

    @property
    def failures(self) -> int:
        return sum(1 for s in self.steps if not s.correct)

    @property
    def zero_correction(self) -> bool:
        return self.failures == 0

    @property
    def one_correction(self) -> bool:
        return self.failures <= 1 and all(s.outcome is not None for s in self.steps)

    def to_dict(self) -> dict:
        return {"device": self.device, "zero_correction": self.zero_correction,
                "one_correction": self.one_correction, "steps": [s.to_dict() for s in self.steps]}


@dataclass
class TestCaseReport:
    name: str
    source: str
    devices: list[DeviceReport]
    correction_budget: int = 1

    __test__ = False

    @property
    def zero_correction(self) -> bool:
        return all(d.zero_correction for d in self.devices)

    @property
    def one_correction(self) -> bool:
        return all(d.one_correction for d in self.devices)

    @property
    def success(self) -> bool:
        return self.one_correction if self.correction_budget else self.zero_correction

    def to_dict(self) -> dict:
        return {"name": self.name, "source": self.source, "correction_budget": self.correction_budget,
                "zero_correction": self.zero_correction, "one_correction": self.one_correction,
                "devices": [d.to_dict() for d in self.devices]}


def _judge(rec: ActionRecord, truth: SourceTruth, outcome: ReplayOutcome, dev: JudgedDevice) -> bool:
    if outcome.status in (Status.WIDGET_NOT_FOUND, Status.DEVICE_IO_ERROR):
        return False
    if rec.widget_dependent:
        x, y = outcome.executed_point
        return any(truth_key(g) == truth.key and g.bbox.contains_point(x, y)
                   for g in dev.truth_before_last or ())
    if truth.at_margin and at_margin(dev.sim, rec.action_type, rec.distance):
        return True
    return screens_correspond(rec.source_device, (truth.visible, truth.complete),
                              dev.profile, visible_keys(dev.sim.ground_truth()))


def correct_step(rec: ActionRecord, truth: SourceTruth, dev: JudgedDevice, state_before) -> None:
    """Simulated manual correction: restore the pre-step state and do the step right."""
    sim = dev.sim
    sim.state = state_before
    lay = sim.layout()
    prof = sim.profile
    if rec.widget_dependent:
        nodes = [n for n in lay.nodes if n.kind is not None and
                 (n.owner if n.wtype == "TextLine" else n.id) == truth.key]
        if not nodes:
            raise RecordError(f"{truth.key!r} does not exist on {prof.name}")
        t, l, b, r = nodes[0].box
        pane = (l // lay.pane_width) * lay.pane_width
        off = min(max(0, (t + b) // 2 - prof.height // 2), lay.max_offset())
        sim.state = replace(sim.state, scroll_offset=off, h_offset=pane)
        x, y = _clamp_point((l + r) // 2 - pane, (t + b) // 2 - off, prof)
        dev.execute(ConcreteAction(rec.action_type, x, y, text=rec.text_payload,
                                   duration_ms=rec.duration_ms))
        return
    if truth.at_margin:
        if rec.action_type == "ScrollV":
            off = lay.max_offset() if rec.distance > 0 else 0
            sim.state = replace(sim.state, scroll_offset=off)
        else:
            hoff = lay.max_h_offset() if rec.distance > 0 else 0
            sim.state = replace(sim.state, h_offset=hoff)
        return
    want = (truth.visible, truth.complete)
    if rec.action_type == "SwipeH":
        candidates = [(off, k * lay.pane_width) for k in range(lay.panes) for off in (0,)]
    else:
        step = max(1, prof.px(4))
        candidates = [(off, sim.state.h_offset) for off in range(0, lay.max_offset() + 1, step)]
        candidates.append((lay.max_offset(), sim.state.h_offset))
    here = sim.state.scroll_offset, sim.state.h_offset
    good = [c for c in candidates
            if screens_correspond(rec.source_device, want, prof, visible_keys(viewport_truth(lay, c[1], c[0])))]
    if good:
        off, hoff = min(good, key=lambda c: (abs(c[0] - here[0]) + abs(c[1] - here[1]), c))
        sim.state = replace(sim.state, scroll_offset=off, h_offset=hoff)


def replay_on_device(tc: TestCase, records, dev: JudgedDevice, perception: Perception,
                     cfg: MatchConfig | None = None, budget: int = 1) -> DeviceReport:
    dev.sim.reset(tc.start_page)
    reports: list[StepReport] = []
    corrections = 0
    for k, (rec, truth) in enumerate(records):
        if corrections > budget:
            reports.append(StepReport(k, rec.action_type, None, False))
            continue
        before = dev.sim.state
        offscreen = rec.widget_dependent and truth.key not in visible_keys(dev.sim.ground_truth())[1]
        outcome = replay_action(rec, dev, perception, cfg)
        ok = _judge(rec, truth, outcome, dev)
        corrected = False
        if not ok:
            corrections += 1
            if corrections <= budget and outcome.status is not Status.DEVICE_IO_ERROR:
                try:
                    correct_step(rec, truth, dev, before)
                    corrected = True
                except RecordError:
                    # nothing to correct to: the widget does not exist on this device
                    corrections = budget + 1
            else:
                corrections = budget + 1
        reports.append(StepReport(k, rec.action_type, outcome, ok, corrected, offscreen))
    return DeviceReport(dev.name, reports)


def replay_test_case(tc: TestCase, source, targets: list[JudgedDevice], cfg: MatchConfig | None = None,
                     perceive: Callable[[object], Perception] = perception_for,
                     records=None) -> TestCaseReport:
    """Record ``tc`` on ``source`` and replay it on every target.

    The first wrong step on a device is corrected from ground truth and the
    case goes on, so one run yields both the 0- and 1-correction verdicts.
    """
    if records is None:
        records = record_test_case(tc, source, perceive(source))
    devices = [replay_on_device(tc, records, dev, perceive(dev.sim), cfg) for dev in targets]
    return TestCaseReport(tc.name, tc.source_device, devices, tc.correction_budget)


def scroll_bound(content_height: int, screen_height: int) -> int:
    """Most screen-height scrolls one sweep can take before reaching a margin."""
    return math.ceil(content_height / screen_height) + 1
