"""Evaluation harness: corpus generation, matching and replay metrics, log verification.

Every metric is computed from ground truth the renderer knows. Each scored
sample is written as one JSON line, and :func:`verify_report` recomputes
every aggregate in the report from those lines alone.
"""

from __future__ import annotations

import csv
import json
import random
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .detection import DetectConfig, TextFixture, fixture_text_provider
from .devicefarm.device import DeviceState, SimulatedDevice
from .devicefarm.pages import App
from .devicefarm.profiles import get_profile
from .devicefarm.render import get_layout
from .devicefarm.adapter import loopback_session
from .errors import ConfigError, ContractError
from .extraction import GuiSnapshot, WidgetKind
from .imaging import Bbox, image_digest, read_png, to_grayscale, write_png
from .matching import (MatchConfig, PairContext, match_gui_cross_device, match_widget,
                       normalize_text, order_by_screen, template_match_baseline, text_contains,
                       _center_distance)
from .replay import (JudgedDevice, Perception, TestCase, WIDGET_DEPENDENT, replay_test_case,
                     screens_correspond, truth_key)

METHODS = ("multimodal", "text_only", "embedding_only", "template")
SAMPLE_TEXT = 25
SAMPLE_NONTEXT = 25
FRAME_STRIDE = 0.75


# -- corpus -------------------------------------------------------------------

@dataclass
class CorpusManifest:
    pages: list[str]
    profiles: list[str]
    pair_plan: list[tuple[str, str]]
    seed: int = 0
    root: Path | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.profiles:
            raise ConfigError("manifest lists no profiles")
        for name in self.profiles:
            get_profile(name)
        for a, b in self.pair_plan:
            if a not in self.profiles or b not in self.profiles:
                raise ConfigError(f"pair ({a}, {b}) uses a profile outside the manifest")
        if self.root is not None:
            for p in self.pages:
                if not (self.root / p).is_file():
                    raise ConfigError(f"page file {p} does not exist")

    @classmethod
    def full_plan(cls, profiles: list[str]) -> list[tuple[str, str]]:
        return [(a, b) for a in profiles for b in profiles]

    def to_dict(self) -> dict:
        return {"pages": list(self.pages), "profiles": list(self.profiles),
                "pair_plan": [list(p) for p in self.pair_plan], "seed": self.seed}

    @classmethod
    def load(cls, path: str | Path) -> CorpusManifest:
        path = Path(path)
        try:
            d = json.loads(path.read_text(encoding="utf-8"))
            return cls(list(d["pages"]), list(d["profiles"]),
                       [tuple(p) for p in d.get("pair_plan") or cls.full_plan(list(d["profiles"]))],
                       int(d.get("seed", 0)), path.parent)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"bad manifest {path}: {exc}") from exc


def _dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def frame_positions(app: App, page_id: str, profile, rng: random.Random) -> list[tuple[int, int]]:
    """``(h_offset, scroll_offset)`` pairs covering the page, plus one seeded extra offset."""
    lay = get_layout(app.page(page_id), profile)
    stride = max(1, int(profile.height * FRAME_STRIDE))
    offs = list(range(0, lay.max_offset(), stride)) + [lay.max_offset()]
    extra = rng.randint(0, lay.max_offset()) if lay.max_offset() else 0
    offs = sorted(set(offs) | {extra})
    return [(k * lay.pane_width, off) for k in range(lay.panes) for off in offs]


def gen_corpus(out: str | Path, app: App, profiles: list[str], seed: int = 0,
               pages: list[str] | None = None) -> CorpusManifest:
    """Render every page on every profile and write frames, truth and correspondence tables."""
    out = Path(out)
    profs = [get_profile(p) for p in profiles]
    page_ids = pages or [p.id for p in app]
    for pid in page_ids:
        app.page(pid)
    (out / "pages").mkdir(parents=True, exist_ok=True)
    page_files = []
    for pid in page_ids:
        rel = f"pages/{pid}.json"
        _dump(app.page(pid).to_dict(), out / rel)
        page_files.append(rel)
    fixture = TextFixture()
    correspondence: dict = {}
    frame_sets = []
    for pid in page_ids:
        for prof in profs:
            rng = random.Random(f"{seed}:{pid}:{prof.name}")
            fdir = out / "frames" / pid / prof.name
            fdir.mkdir(parents=True, exist_ok=True)
            dev = SimulatedDevice(app, prof, pid, rng_seed=seed, fixture=fixture)
            frames = []
            for k, (hoff, off) in enumerate(frame_positions(app, pid, prof, rng)):
                dev.state = DeviceState(prof, pid, scroll_offset=off, h_offset=hoff, rng_seed=seed)
                img = dev.screenshot()
                truth = dev.ground_truth()
                write_png(img, fdir / f"{k}.png")
                _dump({"page": pid, "profile": prof.name, "scroll_offset": off, "h_offset": hoff,
                       "digest": image_digest(img), "truth": [g.to_dict() for g in truth]},
                      fdir / f"{k}.json")
                frames.append(f"frames/{pid}/{prof.name}/{k}")
                for g in truth:
                    table = correspondence.setdefault(pid, {}).setdefault(truth_key(g), {})
                    table.setdefault(prof.name, []).append([k, list(g.bbox.as_tuple())])
            frame_sets.append({"page": pid, "profile": prof.name, "frames": frames})
    fixture.save(out / "fixture.json")
    _dump(correspondence, out / "correspondence.json")
    _dump(frame_sets, out / "frame_sets.json")
    manifest = CorpusManifest(page_files, list(profiles), CorpusManifest.full_plan(list(profiles)),
                              seed, out)
    _dump(manifest.to_dict(), out / "manifest.json")
    return manifest


@dataclass(eq=False)
class Frame:
    """One corpus frame; the image is read from disk on demand."""

    page: str
    profile: str
    index: int
    scroll_offset: int
    h_offset: int
    path: Path = field(repr=False)
    truth: list[dict] = field(repr=False)

    @property
    def name(self) -> str:
        return f"{self.page}/{self.profile}/{self.index}"

    @property
    def image(self) -> np.ndarray:
        return read_png(self.path)

    def keys(self) -> tuple[frozenset, frozenset]:
        full = frozenset(_key(g) for g in self.truth if g["bbox"] == g["full"])
        return frozenset(_key(g) for g in self.truth), full


def _key(g: dict) -> str:
    return g["owner"] if g["type"] == "TextLine" else g["id"]


class Corpus:
    """A generated corpus read back from disk.

    Detection runs on demand. Snapshots are kept until :meth:`release`, so
    callers evaluate one page at a time to bound memory.
    """

    def __init__(self, root: str | Path, detect_cfg: DetectConfig | None = None):
        self.root = Path(root)
        self.manifest = CorpusManifest.load(self.root / "manifest.json")
        self.fixture = TextFixture.load(self.root / "fixture.json")
        self.perception = Perception(fixture_text_provider(self.fixture), detect_cfg, cache_size=1)
        self.frames: dict[tuple[str, str], list[Frame]] = defaultdict(list)
        self._snaps: dict[str, GuiSnapshot] = {}
        self._grays: dict[str, np.ndarray] = {}
        for fs in json.loads((self.root / "frame_sets.json").read_text(encoding="utf-8")):
            for rel in fs["frames"]:
                meta = json.loads((self.root / f"{rel}.json").read_text(encoding="utf-8"))
                self.frames[(fs["page"], fs["profile"])].append(
                    Frame(meta["page"], meta["profile"], int(rel.rsplit("/", 1)[1]), meta["scroll_offset"],
                          meta["h_offset"], self.root / f"{rel}.png", meta["truth"]))

    @property
    def pages(self) -> list[str]:
        return sorted({p for p, _ in self.frames})

    def snapshot(self, frame: Frame) -> GuiSnapshot:
        snap = self._snaps.get(frame.name)
        if snap is None:
            snap = self._snaps[frame.name] = self.perception.snapshot(frame.image, get_profile(frame.profile))
        return snap

    def gray(self, frame: Frame) -> np.ndarray:
        """Grayscale of the frame's screen; photos are cut down to the detected screen."""
        g = self._grays.get(frame.name)
        if g is None:
            g = self._grays[frame.name] = to_grayscale(self.snapshot(frame).image)
        return g

    def release(self) -> None:
        self._snaps.clear()
        self._grays.clear()


def widget_identity(box: Bbox, truth: list[dict], min_iou: float = 0.5) -> str | None:
    """Ground-truth identity of a detected box: the best-overlapping truth entry."""
    best, key = min_iou, None
    for g in truth:
        iou = box.iou(Bbox(*g["bbox"]))
        if iou >= best:
            best, key = iou, _key(g)
    return key


# -- widget matching ----------------------------------------------------------

def text_only_match(source: GuiSnapshot, i: int, target: GuiSnapshot) -> int | None:
    """Text containment with the longest-content rule; nearest centre on ties."""
    ws = normalize_text(source.raw[i].text)
    if not ws:
        return None
    texts = [normalize_text(w.text) for w in target.raw]
    cands = [j for j, t in enumerate(texts) if t and (text_contains(ws, t) or text_contains(t, ws))]
    if not cands:
        return None
    pool = [j for j in cands if texts[j] == ws]
    if not pool:
        longest = max(len(texts[j]) for j in cands)
        pool = [j for j in cands if len(texts[j]) == longest]
    return min(pool, key=lambda j: (_center_distance(source, i, target, j), j))


def embedding_only_match(ctx: PairContext, i: int) -> int | None:
    if not len(ctx.target):
        return None
    row = ctx.sims[i]
    j = int(np.argmax(row))
    return j if row[j] >= ctx.cfg.embed_threshold else None


def sample_sources(corpus: Corpus, page: str, profile: str,
                   rng: random.Random) -> list[tuple[Frame, int, str]]:
    """Up to 25 text and 25 non-text widgets of a page, each identity once."""
    seen: dict[str, tuple[Frame, int, bool]] = {}
    for f in corpus.frames.get((page, profile), []):
        full = f.keys()[1]
        for i, w in enumerate(corpus.snapshot(f).raw):
            ident = widget_identity(w.bbox, f.truth)
            if ident is not None and ident in full and ident not in seen:
                seen[ident] = (f, i, w.kind is WidgetKind.TEXT)
    text = [(f, i, k) for k, (f, i, t) in seen.items() if t]
    other = [(f, i, k) for k, (f, i, t) in seen.items() if not t]
    return (rng.sample(text, min(SAMPLE_TEXT, len(text)))
            + rng.sample(other, min(SAMPLE_NONTEXT, len(other))))


def _best_target_frame(frames: list[Frame], ident: str, context: frozenset) -> Frame | None:
    best, score = None, -1
    for f in frames:
        vis, full = f.keys()
        if ident not in full:
            continue
        s = len(vis & context)
        if s > score:
            best, score = f, s
    return best


def eval_widget_matching(corpus: Corpus, cfg: MatchConfig | None = None, seed: int = 0,
                         pairs: list[tuple[str, str]] | None = None,
                         methods: tuple[str, ...] = METHODS) -> list[dict]:
    """Score every method on sampled widgets of every page and profile pair; return log rows."""
    cfg = cfg or MatchConfig()
    rows = []
    for page in corpus.pages:
        for src, tgt in pairs or corpus.manifest.pair_plan:
            rng = random.Random(f"{seed}:{page}:{src}")
            t_frames = corpus.frames.get((page, tgt), [])
            contexts: dict[tuple[str, str], PairContext] = {}
            for sf, i, ident in sample_sources(corpus, page, src, rng):
                tf = _best_target_frame(t_frames, ident, sf.keys()[0])
                if tf is None:
                    continue
                ctx = contexts.get((sf.name, tf.name))
                if ctx is None:
                    ctx = contexts[(sf.name, tf.name)] = PairContext(corpus.snapshot(sf), corpus.snapshot(tf), cfg)
                for method in methods:
                    rows.append(_score(corpus, method, ctx, i, ident, sf, tf, src, tgt, page))
        corpus.release()
    return rows


def _score(corpus: Corpus, method, ctx: PairContext, i, ident, sf: Frame, tf: Frame, src, tgt, page) -> dict:
    s_snap, t_snap = ctx.source, ctx.target
    stage = None
    matched = None
    if method == "multimodal":
        res = match_widget(s_snap, i, t_snap, ctx.cfg, ctx)
        matched, stage = res.matched, res.stage.value
        got = widget_identity(t_snap.raw[matched].bbox, tf.truth) if matched is not None else None
    elif method == "text_only":
        matched = text_only_match(s_snap, i, t_snap)
        got = widget_identity(t_snap.raw[matched].bbox, tf.truth) if matched is not None else None
    elif method == "embedding_only":
        matched = embedding_only_match(ctx, i)
        got = widget_identity(t_snap.raw[matched].bbox, tf.truth) if matched is not None else None
    elif method == "template":
        got = None
        try:
            box = template_match_baseline(s_snap.profiles[i].clip, corpus.gray(tf))
        except ContractError:
            box = None
        if box is not None:
            cx, cy = box.center()
            hit = [g for g in tf.truth if _key(g) == ident and Bbox(*g["bbox"]).contains_point(cx, cy)]
            got = ident if hit else None
            matched = list(box.as_tuple())
    else:
        raise ConfigError(f"unknown method {method!r}")
    return {"kind": "widget", "method": method, "source": src, "target": tgt, "page": page,
            "source_frame": sf.name, "target_frame": tf.name, "source_widget": i, "identity": ident,
            "matched_widget": matched, "matched_identity": got, "stage": stage,
            "correct": got == ident}


# -- GUI matching ---------------------------------------------------------------

def eval_gui_matching(corpus: Corpus, cfg: MatchConfig | None = None, seed: int = 0,
                      pairs: list[tuple[str, str]] | None = None, per_page: int = 4,
                      cross_page: int = 2) -> list[dict]:
    """Label frame pairs by ground-truth correspondence and score the GUI matcher on them."""
    cfg = cfg or MatchConfig()
    rows = []
    pages = corpus.pages
    plan = [(a, b) for a, b in pairs or corpus.manifest.pair_plan if a < b]
    for page in pages:
        for a, b in plan:
            pa, pb = get_profile(a), get_profile(b)
            rng = random.Random(f"{seed}:gui:{a}:{b}:{page}")
            fa, fb = corpus.frames.get((page, a), []), corpus.frames.get((page, b), [])
            if not fa or not fb:
                continue
            # the top of the page always corresponds; the rest are drawn at random
            cands = [(x, y) for x in fa for y in fb][1:]
            rng.shuffle(cands)
            chosen = [(fa[0], fb[0])] + cands[:per_page - 1]
            others = [p for p in pages if p != page and corpus.frames.get((p, b))]
            for other in rng.sample(others, min(cross_page, len(others))):
                chosen.append((rng.choice(fa), rng.choice(corpus.frames[(other, b)])))
            for x, y in chosen:
                label = x.page == y.page and screens_correspond(pa, x.keys(), pb, y.keys())
                small, large = order_by_screen(corpus.snapshot(x), corpus.snapshot(y))
                gm = match_gui_cross_device(small, large, cfg)
                rows.append({"kind": "gui", "source": a, "target": b, "frame_a": x.name, "frame_b": y.name,
                             "label": label, "predicted": gm.matched, "fraction": gm.fraction,
                             "counted": gm.counted, "correct": gm.matched == label})
        corpus.release()
    return rows


# -- replay ---------------------------------------------------------------------

class DeviceFarm:
    """Simulated devices for one replay run, one per profile, with shared perception."""

    def __init__(self, app: App, profiles: list[str], seed: int = 0, detect_cfg: DetectConfig | None = None,
                 transport: str = "direct"):
        if transport not in ("direct", "loopback"):
            raise ConfigError(f"unknown transport {transport!r}")
        self.app = app
        self.transport = transport
        self.sims = {p: SimulatedDevice(app, get_profile(p), rng_seed=seed) for p in profiles}
        self.perceptions = {p: Perception(fixture_text_provider(s.fixture), detect_cfg)
                            for p, s in self.sims.items()}
        self.handles = {}

    def perceive(self, dev) -> Perception:
        return self.perceptions[dev.profile.name]

    def target(self, name: str) -> JudgedDevice:
        sim = self.sims[name]
        if self.transport == "direct":
            return JudgedDevice(sim, sim)
        if name not in self.handles:
            self.handles[name] = loopback_session(sim)
        return JudgedDevice(self.handles[name], sim)

    def close(self) -> None:
        for h in self.handles.values():
            h.close()
        self.handles.clear()


def eval_replay(cases: list[TestCase], app: App, profiles: list[str], cfg: MatchConfig | None = None,
                seed: int = 0, transport: str = "direct", detect_cfg: DetectConfig | None = None,
                targets: list[str] | None = None) -> tuple[list, list[dict]]:
    """Replay every case from its source to every other listed profile; return reports and log rows.

    ``targets`` narrows the replay to a subset of ``profiles``; sources still come from ``profiles``.
    """
    for t in targets or ():
        if t not in profiles:
            raise ConfigError(f"target {t} is not among {profiles}")
    farm = DeviceFarm(app, profiles, seed, detect_cfg, transport)
    reports, rows = [], []
    try:
        for tc in cases:
            if tc.source_device not in farm.sims:
                raise ConfigError(f"case {tc.name} records on {tc.source_device}, not in {profiles}")
            devices = [farm.target(p) for p in targets or profiles if p != tc.source_device]
            rep = replay_test_case(tc, farm.sims[tc.source_device], devices, cfg, perceive=farm.perceive)
            reports.append(rep)
            for d in rep.devices:
                for s in d.steps:
                    oc = s.outcome
                    rows.append({"kind": "replay_step", "case": tc.name, "source": tc.source_device,
                                 "device": d.device, "index": s.index, "action": s.action,
                                 "dependent": s.action in WIDGET_DEPENDENT, "correct": s.correct,
                                 "corrected": s.corrected, "offscreen": s.offscreen,
                                 "status": oc.status.value if oc else None,
                                 "executed_point": list(oc.executed_point) if oc and oc.executed_point else None,
                                 "scroll_steps": oc.scroll_steps_used if oc else None})
            rows.append({"kind": "replay_case", "case": tc.name, "source": tc.source_device,
                         "devices": [d.device for d in rep.devices],
                         "zero_correction": rep.zero_correction, "one_correction": rep.one_correction})
    finally:
        farm.close()
    return reports, rows


# -- aggregation ------------------------------------------------------------------

def _acc(correct: int, counted: int) -> dict:
    return {"counted": counted, "correct": correct,
            "accuracy": (correct / counted) if counted else None}


def aggregate(rows: list[dict], profiles: list[str]) -> dict:
    """Every report number, derived from log rows only."""
    wm: dict = {}
    for method in METHODS:
        sel = [r for r in rows if r["kind"] == "widget" and r["method"] == method]
        if not sel:
            continue
        wm[method] = {a: {b: _acc(sum(r["correct"] for r in sel if r["source"] == a and r["target"] == b),
                                  sum(1 for r in sel if r["source"] == a and r["target"] == b))
                          for b in profiles} for a in profiles}
    gui = [r for r in rows if r["kind"] == "gui"]
    gm = {a: {b: _acc(sum(r["correct"] for r in gui if {r["source"], r["target"]} == {a, b}),
                      sum(1 for r in gui if {r["source"], r["target"]} == {a, b}))
              for b in profiles} for a in profiles}
    steps = [r for r in rows if r["kind"] == "replay_step" and r["status"] is not None]
    dep = [r for r in steps if r["dependent"]]
    ind = [r for r in steps if not r["dependent"]]
    cases = [r for r in rows if r["kind"] == "replay_case"]
    families = defaultdict(list)
    for r in steps:
        families[r["case"]].append(r)
    baseline = []
    for method, matrix in wm.items():
        total = [sum(matrix[a][b]["correct"] for a in profiles for b in profiles if a != b),
                 sum(matrix[a][b]["counted"] for a in profiles for b in profiles if a != b)]
        baseline.append({"method": method, "cross_profile": _acc(*total)})
    return {
        "profiles": list(profiles),
        "widget_match_accuracy": wm,
        "gui_match_accuracy": {"matrix": gm,
                               "overall": _acc(sum(r["correct"] for r in gui), len(gui))},
        "action_accuracy": {"widget_dependent": _acc(sum(r["correct"] for r in dep), len(dep)),
                            "widget_independent": _acc(sum(r["correct"] for r in ind), len(ind))},
        "testcase_accuracy": {"zero_correction": _acc(sum(r["zero_correction"] for r in cases), len(cases)),
                              "one_correction": _acc(sum(r["one_correction"] for r in cases), len(cases))},
        "baseline_rows": baseline,
    }


def write_logs(rows: list[dict], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for r in rows:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    return path


def read_logs(path: str | Path) -> list[dict]:
    with Path(path).open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def verify_report(report: dict, log_path: str | Path) -> list[str]:
    """Recompute ``report`` from the JSON-lines log; return the keys that disagree."""
    again = aggregate(read_logs(log_path), report["profiles"])
    return [k for k in again if json.dumps(again[k], sort_keys=True) != json.dumps(report.get(k), sort_keys=True)]


def write_csvs(report: dict, out: str | Path) -> list[Path]:
    out = Path(out)
    paths = []
    p = out / "widget_matching.csv"
    with p.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "source", "target", "counted", "correct", "accuracy"])
        for method, matrix in report["widget_match_accuracy"].items():
            for a, row in matrix.items():
                for b, cell in row.items():
                    w.writerow([method, a, b, cell["counted"], cell["correct"], _fmt(cell["accuracy"])])
    paths.append(p)
    p = out / "gui_matching.csv"
    with p.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["profile_a", "profile_b", "counted", "correct", "accuracy"])
        for a, row in report["gui_match_accuracy"]["matrix"].items():
            for b, cell in row.items():
                w.writerow([a, b, cell["counted"], cell["correct"], _fmt(cell["accuracy"])])
    paths.append(p)
    p = out / "replay.csv"
    with p.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "counted", "correct", "accuracy"])
        for group in ("action_accuracy", "testcase_accuracy"):
            for name, cell in report[group].items():
                w.writerow([f"{group}.{name}", cell["counted"], cell["correct"], _fmt(cell["accuracy"])])
    paths.append(p)
    return paths


def _fmt(x) -> str:
    return "" if x is None else f"{x:.6f}"
