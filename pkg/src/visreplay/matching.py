"""Widget and GUI matching across devices."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import cv2
import numpy as np

from .errors import ConfigError, ContractError
from .extraction import GuiSnapshot, WidgetKind
from .imaging import Bbox, to_grayscale


@dataclass(frozen=True)
class MatchConfig:
    embed_threshold: float = 0.8
    shape_rel_tol: float = 0.3
    aspect_abs_tol: float = 0.5
    area_ratio_band: tuple[float, float] = (0.5, 2.0)
    gui_match_fraction: float = 1.0
    gui_unchanged_mad_tol: float = 0.02

    def __post_init__(self):
        if not 0 < self.embed_threshold <= 1:
            raise ConfigError("embed_threshold must be in (0, 1]")
        if not 0 < self.gui_match_fraction <= 1:
            raise ConfigError("gui_match_fraction must be in (0, 1]")
        lo, hi = self.area_ratio_band
        if not 0 < lo <= 1 <= hi:
            raise ConfigError("area_ratio_band must satisfy 0 < lo <= 1 <= hi")
        if self.shape_rel_tol < 0 or self.aspect_abs_tol < 0 or self.gui_unchanged_mad_tol < 0:
            raise ConfigError("tolerances must be non-negative")
        object.__setattr__(self, "area_ratio_band", (float(lo), float(hi)))


class Stage(str, enum.Enum):
    TEXT_CONTAINMENT = "TextContainment"
    LONGEST_CONTENT = "LongestContent"
    SHAPE_FILTER = "ShapeFilter"
    EMBEDDING_FILTER = "EmbeddingFilter"
    NEIGHBOR_FILTER = "NeighborFilter"
    CENTER_TIE_BREAK = "CenterTieBreak"
    NO_MATCH = "NoMatch"


@dataclass(frozen=True)
class MatchResult:
    matched: int | None
    stage: Stage
    candidates_considered: int
    similarity: float | None = None

    def __post_init__(self):
        if (self.matched is None) != (self.stage is Stage.NO_MATCH):
            raise ContractError("matched is None exactly when stage is NoMatch")

    def log_entry(self, source_widget: int) -> dict:
        return {"source_widget": source_widget, "stage": self.stage.value,
                "candidates_considered": self.candidates_considered,
                "matched_widget": self.matched, "similarity": self.similarity}


NO_MATCH = MatchResult(None, Stage.NO_MATCH, 0)


def normalize_text(s: str | None) -> str:
    return " ".join((s or "").casefold().split())


def text_contains(a: str | None, b: str | None) -> bool:
    """Whether normalized ``a`` occurs in normalized ``b`` on word boundaries."""
    na, nb = normalize_text(a), normalize_text(b)
    if not na:
        return False
    return f" {na} " in f" {nb} "


class PairContext:
    """Similarity and text caches for matching one source snapshot against one target."""

    def __init__(self, source: GuiSnapshot, target: GuiSnapshot, cfg: MatchConfig):
        self.source, self.target, self.cfg = source, target, cfg
        self.src_text = [normalize_text(p.text) for p in source.profiles]
        self.tgt_text = [normalize_text(p.text) for p in target.profiles]
        self._sims: np.ndarray | None = None

    @property
    def sims(self) -> np.ndarray:
        if self._sims is None:
            self._sims = _similarity_matrix(self.source, self.target)
        return self._sims

    def sim(self, i: int, j: int) -> float:
        return float(self.sims[i, j])


def _unit_rows(snapshot: GuiSnapshot) -> np.ndarray:
    if not snapshot.profiles:
        return np.zeros((0, 0))
    e = np.stack([np.asarray(p.clip_embedding, dtype=np.float64) for p in snapshot.profiles])
    norms = np.linalg.norm(e, axis=1, keepdims=True)
    return np.divide(e, norms, out=np.zeros_like(e), where=norms > 0)


def _similarity_matrix(source: GuiSnapshot, target: GuiSnapshot) -> np.ndarray:
    a, b = _unit_rows(source), _unit_rows(target)
    if a.size == 0 or b.size == 0:
        return np.zeros((len(source), len(target)))
    if a.shape[1] != b.shape[1]:
        raise ContractError("embedding length mismatch between snapshots")
    return np.clip(a @ b.T, -1.0, 1.0)


def shape_compatible(source: GuiSnapshot, i: int, target: GuiSnapshot, j: int,
                     cfg: MatchConfig) -> bool:
    """Shape check after scaling each box by its own screen size."""
    ss, ts = source.profiles[i].shape, target.profiles[j].shape
    sw, sh = ss.width / source.width, ss.height / source.height
    tw, th = ts.width / target.width, ts.height / target.height
    if abs(sw - tw) / max(sw, tw) > cfg.shape_rel_tol:
        return False
    if abs(sh - th) / max(sh, th) > cfg.shape_rel_tol:
        return False
    lo, hi = cfg.area_ratio_band
    if not lo <= (sw * sh) / (tw * th) <= hi:
        return False
    return abs(ss.aspect_ratio - ts.aspect_ratio) <= cfg.aspect_abs_tol


def _surroundings_match(ctx: PairContext, a: int, b: int) -> bool:
    sa, tb = ctx.source.raw[a], ctx.target.raw[b]
    if sa.has_text and tb.has_text:
        x, y = ctx.src_text[a], ctx.tgt_text[b]
        return text_contains(x, y) or text_contains(y, x)
    if sa.has_text or tb.has_text:
        return False
    return ctx.sim(a, b) >= ctx.cfg.embed_threshold


def neighbor_score(source: GuiSnapshot, i: int, target: GuiSnapshot, j: int,
                   cfg: MatchConfig | None = None, ctx: PairContext | None = None) -> int:
    """Number of matching slots among parent and the four directional neighbours."""
    ctx = ctx or PairContext(source, target, cfg or MatchConfig())
    score = 0
    for a, b in zip(source.profiles[i].neighbors.slots(), target.profiles[j].neighbors.slots()):
        if a is not None and b is not None and _surroundings_match(ctx, a, b):
            score += 1
    return score


def _center_distance(source: GuiSnapshot, i: int, target: GuiSnapshot, j: int) -> float:
    (x1, y1), (x2, y2) = source.profiles[i].norm_center, target.profiles[j].norm_center
    return (x1 - x2) ** 2 + (y1 - y2) ** 2


def _narrow(ctx: PairContext, i: int, pool: list[int], order: tuple[str, ...],
            considered: int) -> MatchResult:
    """Apply the tie-breaking filters in ``order`` until one candidate remains."""
    cfg = ctx.cfg

    def done(j: int, stage: Stage) -> MatchResult:
        return MatchResult(j, stage, considered, ctx.sim(i, j))

    for step in order:
        if step == "shape":
            kept = [j for j in pool if shape_compatible(ctx.source, i, ctx.target, j, cfg)]
            stage = Stage.SHAPE_FILTER
        elif step == "embedding":
            kept = [j for j in pool if ctx.sim(i, j) >= cfg.embed_threshold]
            stage = Stage.EMBEDDING_FILTER
        else:
            scores = {j: neighbor_score(ctx.source, i, ctx.target, j, cfg, ctx) for j in pool}
            best = max(scores.values())
            kept = [j for j in pool if scores[j] == best]
            stage = Stage.NEIGHBOR_FILTER
        if kept:
            pool = kept
        if len(pool) == 1:
            return done(pool[0], stage)
    best = min(pool, key=lambda j: (_center_distance(ctx.source, i, ctx.target, j), j))
    return done(best, Stage.CENTER_TIE_BREAK)


def match_text_widget(source: GuiSnapshot, i: int, target: GuiSnapshot,
                      cfg: MatchConfig | None = None, ctx: PairContext | None = None) -> MatchResult:
    """Text cascade: containment, content, shape, embedding, neighbours, center."""
    ctx = ctx or PairContext(source, target, cfg or MatchConfig())
    ws = ctx.src_text[i]
    if not ws:
        raise ContractError("source widget has no text")
    cands = [j for j, t in enumerate(ctx.tgt_text)
             if t and (text_contains(ws, t) or text_contains(t, ws))]
    if not cands:
        return NO_MATCH
    considered = len(cands)
    if len(cands) == 1:
        return MatchResult(cands[0], Stage.TEXT_CONTAINMENT, considered, ctx.sim(i, cands[0]))
    pool = [j for j in cands if ctx.tgt_text[j] == ws]
    if not pool:
        longest = max(len(ctx.tgt_text[j]) for j in cands)
        pool = [j for j in cands if len(ctx.tgt_text[j]) == longest]
    if len(pool) == 1:
        return MatchResult(pool[0], Stage.LONGEST_CONTENT, considered, ctx.sim(i, pool[0]))
    return _narrow(ctx, i, pool, ("shape", "embedding", "neighbor"), considered)


def match_nontext_widget(source: GuiSnapshot, i: int, target: GuiSnapshot,
                         cfg: MatchConfig | None = None, ctx: PairContext | None = None) -> MatchResult:
    """Non-text cascade: embedding gate, shape, neighbours, center."""
    ctx = ctx or PairContext(source, target, cfg or MatchConfig())
    if source.raw[i].kind is not WidgetKind.NONTEXT:
        raise ContractError("source widget is not a non-text widget")
    thr = ctx.cfg.embed_threshold
    cands = [j for j, w in enumerate(ctx.target.raw)
             if w.kind is WidgetKind.NONTEXT and ctx.sim(i, j) >= thr]
    if not cands:
        return NO_MATCH
    if len(cands) == 1:
        return MatchResult(cands[0], Stage.EMBEDDING_FILTER, 1, ctx.sim(i, cands[0]))
    return _narrow(ctx, i, cands, ("shape", "neighbor"), len(cands))


def match_widget(source: GuiSnapshot, i: int, target: GuiSnapshot,
                 cfg: MatchConfig | None = None, ctx: PairContext | None = None) -> MatchResult:
    """Dispatch on kind; a container with text tries the text path first."""
    ctx = ctx or PairContext(source, target, cfg or MatchConfig())
    raw = source.raw[i]
    if raw.has_text:
        res = match_text_widget(source, i, target, ctx.cfg, ctx)
        if res.matched is not None or raw.kind is WidgetKind.TEXT:
            return res
    return match_nontext_widget(source, i, target, ctx.cfg, ctx)


def gui_unchanged_same_device(before: np.ndarray, after: np.ndarray,
                              cfg: MatchConfig | None = None) -> bool:
    """Mean absolute luminance difference of 64x128 box-downscaled frames within tolerance."""
    cfg = cfg or MatchConfig()
    if before.shape != after.shape:
        raise ContractError(f"frame sizes differ: {before.shape} vs {after.shape}")
    a = cv2.resize(to_grayscale(before), (64, 128), interpolation=cv2.INTER_AREA)
    b = cv2.resize(to_grayscale(after), (64, 128), interpolation=cv2.INTER_AREA)
    mad = float(np.mean(np.abs(a.astype(np.float64) - b.astype(np.float64))))
    return mad <= cfg.gui_unchanged_mad_tol * 255.0


def dp_area(device) -> float:
    scale = 160.0 / device.dpi
    return device.width * scale * device.height * scale


def touches_edge(box: Bbox, width: int, height: int) -> bool:
    return box.top == 0 or box.left == 0 or box.bottom == height or box.right == width


@dataclass
class GuiMatch:
    matched: bool
    fraction: float
    counted: int
    results: dict[int, MatchResult] = field(default_factory=dict)

    def log_lines(self) -> list[str]:
        return [json.dumps(r.log_entry(i), sort_keys=True) for i, r in sorted(self.results.items())]


def match_gui_cross_device(g_small: GuiSnapshot, g_large: GuiSnapshot,
                           cfg: MatchConfig | None = None) -> GuiMatch:
    """Every fully visible widget of the smaller-screen GUI must find a counterpart.

    Widgets cut by the screen edge are skipped; they are only partly shown.
    """
    cfg = cfg or MatchConfig()
    if g_small.device is not None and g_large.device is not None:
        if dp_area(g_small.device) > dp_area(g_large.device):
            raise ContractError(f"{g_small.device.name} has the larger screen; swap the arguments")
    ctx = PairContext(g_small, g_large, cfg)
    results = {}
    for i, w in enumerate(g_small.raw):
        if touches_edge(w.bbox, g_small.width, g_small.height):
            continue
        results[i] = match_widget(g_small, i, g_large, cfg, ctx)
    if not results:
        return GuiMatch(True, 1.0, 0, results)
    hits = sum(1 for r in results.values() if r.matched is not None)
    fraction = hits / len(results)
    return GuiMatch(fraction >= cfg.gui_match_fraction, fraction, len(results), results)


def order_by_screen(a: GuiSnapshot, b: GuiSnapshot) -> tuple[GuiSnapshot, GuiSnapshot]:
    """Return ``(smaller, larger)`` by density-independent screen area."""
    if a.device is None or b.device is None:
        raise ContractError("both snapshots need a device to compare screen sizes")
    return (a, b) if dp_area(a.device) <= dp_area(b.device) else (b, a)


def template_match_baseline(clip: np.ndarray, target: np.ndarray) -> Bbox:
    """Best normalized cross-correlation placement of ``clip`` in ``target`` at native scale.

    ``target`` may be given already converted to grayscale (2-D uint8).
    """
    ch, cw = clip.shape[:2]
    th, tw = target.shape[:2]
    if ch > th or cw > tw:
        raise ContractError("template is larger than the target image")
    gray = target if target.ndim == 2 and target.dtype == np.uint8 else to_grayscale(target)
    scores = cv2.matchTemplate(gray.astype(np.float32),
                               to_grayscale(clip).astype(np.float32), cv2.TM_CCOEFF_NORMED)
    scores = np.nan_to_num(scores, nan=-2.0, posinf=-2.0, neginf=-2.0)
    r, c = np.unravel_index(int(np.argmax(scores)), scores.shape)
    return Bbox(int(r), int(c), int(r) + ch, int(c) + cw)
