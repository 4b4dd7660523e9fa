"""Widget detection: pluggable text lines, non-text regions, containers and merging."""

from __future__ import annotations

import json
import random
import subprocess
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import cv2
import numpy as np

from .errors import AmbiguousScreen, ConfigError, ContractError, ScreenNotFound, TextProviderError
from .extraction import GuiSnapshot, RawWidget, WidgetKind, build_profiles
from .imaging import (Bbox, Region, connected_components, crop, embed_clip, encode_png,
                      gradient_binarize, image_digest, min_area_for_dpi, to_grayscale,
                      validate_image)


@dataclass(frozen=True)
class DetectConfig:
    grad_threshold: int = 8
    min_area_base: int = 25
    dpi: float = 160.0
    rect_threshold: float = 0.9
    border_band: int = 4

    def __post_init__(self):
        if not 1 <= self.grad_threshold <= 255:
            raise ConfigError("grad_threshold must be in [1, 255]")
        if self.min_area_base < 1 or self.dpi <= 0:
            raise ConfigError("min_area_base and dpi must be positive")
        if not 0 < self.rect_threshold <= 1:
            raise ConfigError("rect_threshold must be in (0, 1]")
        if self.border_band < 1:
            raise ConfigError("border_band must be >= 1")

    @property
    def min_area(self) -> int:
        return min_area_for_dpi(self.dpi, self.min_area_base)

    def for_dpi(self, dpi: float) -> DetectConfig:
        return replace(self, dpi=float(dpi))


@dataclass(frozen=True)
class TextLine:
    bbox: Bbox
    content: str

    def __post_init__(self):
        if not self.content.strip():
            raise ContractError("text line content must be non-empty")

    def to_dict(self) -> dict:
        t, l, b, r = self.bbox.as_tuple()
        return {"top": t, "left": l, "bottom": b, "right": r, "content": self.content}

    @classmethod
    def from_dict(cls, d: dict) -> TextLine:
        return cls(Bbox(int(d["top"]), int(d["left"]), int(d["bottom"]), int(d["right"])),
                   str(d["content"]))


@dataclass(frozen=True)
class ScreenRegion:
    bbox: Bbox
    screen_image: np.ndarray


TextProvider = Callable[[np.ndarray], list[TextLine]]


# -- text providers ---------------------------------------------------------

class TextFixture:
    """Manifest mapping image digest to the text lines drawn on that image."""

    def __init__(self, entries: dict[str, list[TextLine]] | None = None):
        self.entries: dict[str, list[TextLine]] = dict(entries or {})

    def __contains__(self, digest: str) -> bool:
        return digest in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def register(self, digest: str, lines: Iterable[TextLine]) -> None:
        self.entries[digest] = list(lines)

    def to_json(self) -> str:
        doc = {k: [ln.to_dict() for ln in v] for k, v in sorted(self.entries.items())}
        return json.dumps(doc, sort_keys=True)

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(self.to_json(), encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: str | Path) -> TextFixture:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(doc, dict):
            raise ConfigError("text fixture must be a JSON object keyed by digest")
        return cls({k: [TextLine.from_dict(d) for d in v] for k, v in doc.items()})


@dataclass(frozen=True)
class TextNoise:
    """Seeded perturbation: box jitter of up to ``jitter`` px, character swaps at ``sub_rate``."""

    seed: int = 0
    jitter: int = 0
    sub_rate: float = 0.0


_SUB_ALPHABET = "abcdefghijklmnopqrstuvwxyz0123456789"


def _perturb(lines: list[TextLine], noise: TextNoise, digest: str, width: int,
             height: int) -> list[TextLine]:
    rng = random.Random(f"{noise.seed}:{digest}")
    out = []
    for ln in lines:
        t, l, b, r = ln.bbox.as_tuple()
        k = noise.jitter
        if k:
            t, l, b, r = (v + rng.randint(-k, k) for v in (t, l, b, r))
            t, l = max(0, t), max(0, l)
            b, r = min(height, max(b, t + 1)), min(width, max(r, l + 1))
            t, l = min(t, b - 1), min(l, r - 1)
        chars = list(ln.content)
        if noise.sub_rate > 0:
            for i, c in enumerate(chars):
                if not c.isspace() and rng.random() < noise.sub_rate:
                    chars[i] = rng.choice(_SUB_ALPHABET)
        out.append(TextLine(Bbox(t, l, b, r), "".join(chars)))
    return out


class FixtureTextProvider:
    def __init__(self, manifest: TextFixture, noise: TextNoise | None = None):
        self.manifest = manifest
        self.noise = noise

    def __call__(self, img: np.ndarray) -> list[TextLine]:
        digest = image_digest(img)
        try:
            lines = self.manifest.entries[digest]
        except KeyError:
            raise TextProviderError(f"no text fixture for image {digest[:12]}") from None
        if self.noise is None or (self.noise.jitter == 0 and self.noise.sub_rate == 0):
            return list(lines)
        return _perturb(lines, self.noise, digest, img.shape[1], img.shape[0])


def fixture_text_provider(manifest: TextFixture, noise: TextNoise | None = None) -> FixtureTextProvider:
    return FixtureTextProvider(manifest, noise)


class SubprocessTextProvider:
    """Runs an external OCR command per image: PNG on stdin, JSON lines on stdout."""

    def __init__(self, argv: Sequence[str], timeout: float = 30.0):
        self.argv = list(argv)
        self.timeout = timeout

    def __call__(self, img: np.ndarray) -> list[TextLine]:
        try:
            proc = subprocess.run(self.argv, input=encode_png(img), capture_output=True,
                                  timeout=self.timeout, check=False)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise TextProviderError(f"OCR command failed: {exc}") from exc
        if proc.returncode != 0:
            raise TextProviderError(f"OCR command exited with status {proc.returncode}: "
                                    f"{proc.stderr.decode(errors='replace').strip()}")
        try:
            return [TextLine.from_dict(d) for d in json.loads(proc.stdout)]
        except (ValueError, KeyError, TypeError, ContractError) as exc:
            raise TextProviderError(f"OCR command produced invalid output: {exc}") from exc


def _checked_lines(provider: TextProvider, img: np.ndarray) -> list[TextLine]:
    lines = provider(img)
    width, height = img.shape[1], img.shape[0]
    for ln in lines:
        if not ln.bbox.within(width, height):
            raise TextProviderError(f"text box {ln.bbox.as_tuple()} outside {width}x{height} image")
    return list(lines)


# -- non-text pipeline ------------------------------------------------------

SIDES = ("top", "bottom", "left", "right")


def _perimeter_coverage(mask: np.ndarray, band: int, open_sides=()) -> float:
    h, w = mask.shape
    b = min(band, h, w)
    strips = {
        "top": mask[:b, :].any(axis=0), "bottom": mask[-b:, :].any(axis=0),
        "left": mask[:, :b].any(axis=1), "right": mask[:, -b:].any(axis=1),
    }
    covered = sum(s.size if side in open_sides else int(s.sum()) for side, s in strips.items())
    return covered / float(2 * (w + h))


def _confined_to_border(mask: np.ndarray, band: int) -> bool:
    """True when every pixel is within ``band`` of its row's or column's outermost pixel."""
    h, w = mask.shape
    rows_any = mask.any(axis=1)
    cols_any = mask.any(axis=0)
    first_r = np.argmax(mask, axis=1)
    last_r = w - 1 - np.argmax(mask[:, ::-1], axis=1)
    first_c = np.argmax(mask, axis=0)
    last_c = h - 1 - np.argmax(mask[::-1, :], axis=0)
    rr, cc = np.nonzero(mask)
    near_row_end = ((cc - first_r[rr] <= band) | (last_r[rr] - cc <= band)) & rows_any[rr]
    near_col_end = ((rr - first_c[cc] <= band) | (last_c[cc] - rr <= band)) & cols_any[cc]
    return bool((near_row_end | near_col_end).all())


def _grown(candidate: Region) -> np.ndarray:
    """Candidate mask dilated by one pixel, padded by one pixel on every side."""
    cb = candidate.bbox
    pad = np.zeros((cb.height + 2, cb.width + 2), dtype=np.uint8)
    pad[1:-1, 1:-1] = candidate.mask
    return cv2.dilate(pad, np.ones((3, 3), np.uint8)).astype(bool)


def _touches(candidate: Region, other: Region, dil: np.ndarray | None = None) -> bool:
    """Whether any pixel of ``other`` is 8-adjacent to a pixel of ``candidate``."""
    cb = candidate.bbox
    grown = Bbox.clipped(cb.top - 1, cb.left - 1, cb.bottom + 1, cb.right + 1, 1 << 30, 1 << 30)
    inter = grown.intersection(other.bbox)
    if inter is None:
        return False
    if dil is None:
        dil = _grown(candidate)
    # dil[r, c] covers pixel (cb.left - 1 + c, cb.top - 1 + r)
    d = dil[inter.top - cb.top + 1:inter.bottom - cb.top + 1,
            inter.left - cb.left + 1:inter.right - cb.left + 1]
    ob = other.bbox
    o = other.mask[inter.top - ob.top:inter.bottom - ob.top, inter.left - ob.left:inter.right - ob.left]
    return bool((d & o).any())


def recognize_container(candidate: Region, inner: Sequence[Region],
                        cfg: DetectConfig | None = None, open_sides: Iterable[str] = ()) -> bool:
    """Rectangular outline whose enclosed regions stay clear of it.

    Rectangular means the outline covers at least ``rect_threshold`` of the
    bbox perimeter within ``border_band`` px of each side and has nothing
    reaching further inward. Sides listed in ``open_sides`` lie on the image
    border, where a cut-off container has no visible edge; they count as
    covered.
    """
    cfg = cfg or DetectConfig()
    if _perimeter_coverage(candidate.mask, cfg.border_band, set(open_sides)) < cfg.rect_threshold:
        return False
    if not _confined_to_border(candidate.mask, cfg.border_band):
        return False
    dil = _grown(candidate)
    return not any(_touches(candidate, r, dil) for r in inner)


def _widget_box(box: Bbox, width: int, height: int) -> Bbox:
    """Shrink an edge-band bbox by the 1 px that the two-sided gradient adds outside."""
    t, l, b, r = box.as_tuple()
    if t > 0:
        t += 1
    if l > 0:
        l += 1
    if b < height:
        b -= 1
    if r < width:
        r -= 1
    if t >= b or l >= r:
        return box
    return Bbox(t, l, b, r)


def _nontext_regions(img: np.ndarray, cfg: DetectConfig) -> list[tuple[Region, bool, int]]:
    validate_image(img)
    height, width = img.shape[:2]
    regions = connected_components(gradient_binarize(to_grayscale(img), cfg.grad_threshold),
                                   cfg.min_area)
    if not regions:
        return []
    boxes = np.array([r.bbox.as_tuple() for r in regions], dtype=np.int64)
    top, left, bottom, right = boxes.T
    out = []
    for i, reg in enumerate(regions):
        t, l, b, r = boxes[i]
        inside = (top >= t) & (left >= l) & (bottom <= b) & (right <= r)
        inside &= ~((top == t) & (left == l) & (bottom == b) & (right == r))
        idx = np.nonzero(inside)[0]
        open_sides = [side for side, hit in zip(SIDES, (t == 0, b == height, l == 0, r == width)) if hit]
        is_container = bool(idx.size) and recognize_container(reg, [regions[j] for j in idx], cfg,
                                                              open_sides)
        out.append((reg, is_container, int(idx.size)))
    return out


def detect_nontext(img: np.ndarray, cfg: DetectConfig | None = None) -> list[RawWidget]:
    """One non-text widget per accepted region, nested widgets retained."""
    cfg = cfg or DetectConfig()
    height, width = img.shape[:2]
    widgets = [RawWidget(_widget_box(reg.bbox, width, height), WidgetKind.NONTEXT, is_container)
               for reg, is_container, _ in _nontext_regions(img, cfg)]
    widgets.sort(key=lambda w: (w.bbox.top, w.bbox.left, -w.bbox.area))
    return widgets


def reading_order(lines: Sequence[TextLine]) -> list[TextLine]:
    """Top-to-bottom rows, left to right within a row.

    A line joins the current row when its vertical center falls inside the
    row's first line, so words with and without ascenders stay together.
    """
    rows: list[list[TextLine]] = []
    for ln in sorted(lines, key=lambda t: (t.bbox.top, t.bbox.left)):
        center = (ln.bbox.top + ln.bbox.bottom) / 2.0
        if rows and rows[-1][0].bbox.top <= center < rows[-1][0].bbox.bottom:
            rows[-1].append(ln)
        else:
            rows.append([ln])
    return [ln for row in rows for ln in sorted(row, key=lambda t: t.bbox.left)]


def merge_text_nontext(texts: Sequence[TextLine], nontexts: Sequence[RawWidget]) -> list[RawWidget]:
    """Combine text lines with non-text widgets.

    Non-text widgets overlapping text are dropped unless they are containers
    that fully enclose every text line they touch. A container takes as its
    text the lines directly inside it (not inside a nested container), read
    top to bottom.
    """
    kept = []
    for w in nontexts:
        hits = [t for t in texts if w.bbox.intersects(t.bbox)]
        if not hits or (w.is_container and all(w.bbox.contains(t.bbox) for t in hits)):
            kept.append(w)
    containers = [w for w in kept if w.is_container]
    out = [RawWidget(t.bbox, WidgetKind.TEXT, False, t.content) for t in texts]
    for w in kept:
        if w.is_container:
            inner = [c for c in containers if w.bbox.strictly_contains(c.bbox)]
            own = [t for t in texts if w.bbox.contains(t.bbox)
                   and not any(c.bbox.contains(t.bbox) for c in inner)]
            text = " ".join(t.content.strip() for t in reading_order(own)) or None
            w = RawWidget(w.bbox, w.kind, True, text)
        out.append(w)
    out.sort(key=lambda w: (w.bbox.top, w.bbox.left, -w.bbox.area, w.kind.value))
    return out


def extract_screen_region(photo: np.ndarray, cfg: DetectConfig | None = None) -> ScreenRegion:
    """Locate the device display inside a camera photo.

    The screen is the unique outermost widget taller than half the photo
    that strictly contains at least two other widgets.
    """
    cfg = cfg or DetectConfig()
    widgets = detect_nontext(photo, cfg)
    height = photo.shape[0]
    found = []
    for w in widgets:
        if w.bbox.height * 2 <= height:
            continue
        if any(o.bbox.strictly_contains(w.bbox) for o in widgets):
            continue
        if sum(1 for o in widgets if w.bbox.strictly_contains(o.bbox)) < 2:
            continue
        found.append(w)
    if not found:
        raise ScreenNotFound("no screen-sized region in photo")
    if len(found) > 1:
        raise AmbiguousScreen(f"{len(found)} screen candidates in photo")
    box = found[0].bbox
    return ScreenRegion(box, crop(photo, box))


def detect_gui(img: np.ndarray, provider: TextProvider, cfg: DetectConfig | None = None,
               device=None, page_offset: int = -1, encoder=embed_clip) -> GuiSnapshot:
    """Full pipeline from a screenshot to a profiled snapshot."""
    cfg = cfg or DetectConfig()
    validate_image(img)
    texts = _checked_lines(provider, img)
    raws = merge_text_nontext(texts, detect_nontext(img, cfg))
    return build_profiles(img, raws, device=device, page_offset=page_offset, encoder=encoder)


def detect_photo(photo: np.ndarray, provider: TextProvider, cfg: DetectConfig | None = None,
                 device=None, page_offset: int = -1,
                 encoder=embed_clip) -> tuple[ScreenRegion, GuiSnapshot]:
    """Detect on a camera photo: find the screen, then run on the cropped display.

    Text is read from the whole photo and mapped into screen coordinates.
    """
    cfg = cfg or DetectConfig()
    region = extract_screen_region(photo, cfg)
    box = region.bbox
    sw, sh = box.width, box.height
    texts = []
    for ln in _checked_lines(provider, photo):
        moved = Bbox.clipped(ln.bbox.top - box.top, ln.bbox.left - box.left,
                             ln.bbox.bottom - box.top, ln.bbox.right - box.left, sw, sh)
        if moved is not None:
            texts.append(TextLine(moved, ln.content))
    raws = merge_text_nontext(texts, detect_nontext(region.screen_image, cfg))
    snap = build_profiles(region.screen_image, raws, device=device, page_offset=page_offset,
                          encoder=encoder)
    return region, snap
