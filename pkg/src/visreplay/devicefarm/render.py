"""Pixel rendering of laid-out pages, ground truth and simulated camera photos."""

from __future__ import annotations

import hashlib
from collections import OrderedDict
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np
from PIL import Image, ImageDraw

from ..detection import TextLine
from ..errors import PageNotFound
from ..imaging import Bbox
from .layout import PageLayout, layout_page, stripe_style, surface, text_mask
from .pages import AbstractPage, App
from .profiles import DeviceKind

PHOTO_MARGIN = 0.06
PHOTO_SIGMA = 2.0

_CACHE_SIZE = 8
_layouts: OrderedDict = OrderedDict()
_canvases: OrderedDict = OrderedDict()


@dataclass(frozen=True)
class GtEntry:
    """Ground truth for one visible widget.

    ``bbox`` is clipped to the viewport; ``full`` is the unclipped box in
    viewport coordinates and may extend past the frame.
    """

    id: str
    owner: str
    wtype: str
    kind: str
    bbox: Bbox
    full: tuple[int, int, int, int]
    text: str | None
    is_container: bool

    @property
    def clipped(self) -> bool:
        return self.bbox.as_tuple() != self.full

    def to_dict(self) -> dict:
        return {"id": self.id, "owner": self.owner, "type": self.wtype, "kind": self.kind,
                "bbox": list(self.bbox.as_tuple()), "full": list(self.full),
                "text": self.text, "is_container": self.is_container}


@dataclass
class RenderOutput:
    frame: np.ndarray
    ground_truth: list[GtEntry]
    text_lines: list[TextLine]


def _remember(cache: OrderedDict, key, value):
    cache[key] = value
    cache.move_to_end(key)
    while len(cache) > _CACHE_SIZE:
        cache.popitem(last=False)
    return value


def resolve_page(source: App | AbstractPage, page_id: str) -> AbstractPage:
    if isinstance(source, App):
        return source.page(page_id)
    if source.id != page_id:
        raise PageNotFound(page_id)
    return source


def get_layout(page: AbstractPage, profile, inputs: tuple = ()) -> PageLayout:
    key = (id(page), profile, inputs)
    hit = _layouts.get(key)
    if hit is not None and hit[0] is page:
        _layouts.move_to_end(key)
        return hit[1]
    lay = layout_page(page, profile, dict(inputs))
    _remember(_layouts, key, (page, lay))
    return lay


def _stripes(h: int, w: int, seed: int) -> np.ndarray:
    orient, count, a, b = stripe_style(seed)
    yy, xx = np.mgrid[0:h, 0:w]
    if orient == 0:
        u = xx / w
    elif orient == 1:
        u = yy / h
    else:
        u = (xx / w + yy / h) / 2.0
    idx = (np.floor(u * count).astype(np.int64) % 2).astype(bool)
    out = np.empty((h, w, 3), dtype=np.uint8)
    out[~idx] = a
    out[idx] = b
    return out


def paint_page(lay: PageLayout, ad_phase: int = 0) -> np.ndarray:
    """Full-content canvas, at least one screen tall."""
    prof = lay.profile
    height = max(lay.height, prof.height)
    img = Image.new("RGB", (lay.width, height), surface(prof.platform_skin, 0))
    draw = ImageDraw.Draw(img)
    for n in lay.nodes:
        p = n.paint
        if not p:
            continue
        t, l, b, r = n.box
        if "fill" in p:
            draw.rounded_rectangle((l, t, r - 1, b - 1), radius=p["radius"], fill=p["fill"])
        elif "glyph" in p:
            ox, oy = p["origin"]
            c = p["cell"]
            for gr, gc in p["glyph"]:
                draw.rectangle((ox + gc * c, oy + gr * c, ox + (gc + 1) * c - 1, oy + (gr + 1) * c - 1),
                               fill=p["color"])
        elif "stripes" in p:
            seed = p["stripes"] + (ad_phase * 7919 if p.get("volatile") else 0)
            img.paste(Image.fromarray(_stripes(b - t, r - l, seed)), (l, t))
        elif "text" in p:
            mask, _ = text_mask(p["text"], p["size"])
            ox, oy = p["origin"]
            m = Image.fromarray(mask.astype(np.uint8) * 255, "L")
            img.paste(p["color"], (ox, oy, ox + m.width, oy + m.height), m)
    return np.asarray(img, dtype=np.uint8)


def get_canvas(page: AbstractPage, profile, inputs: tuple = (), ad_phase: int = 0) -> np.ndarray:
    key = (id(page), profile, inputs, ad_phase)
    hit = _canvases.get(key)
    if hit is not None and hit[0] is page:
        _canvases.move_to_end(key)
        return hit[1]
    canvas = paint_page(get_layout(page, profile, inputs), ad_phase)
    canvas.setflags(write=False)
    _remember(_canvases, key, (page, canvas))
    return canvas


def viewport_truth(lay: PageLayout, h_offset: int, offset: int) -> list[GtEntry]:
    W, H = lay.profile.width, lay.profile.height
    out = []
    for n in lay.nodes:
        if n.kind is None:
            continue
        t, l, b, r = n.box
        full = (t - offset, l - h_offset, b - offset, r - h_offset)
        box = Bbox.clipped(*full, W, H)
        if box is None:
            continue
        out.append(GtEntry(n.id, n.owner, n.wtype, n.kind, box, full, n.text, n.is_container))
    return out


def render(source: App | AbstractPage, state) -> RenderOutput:
    """Screen frame and ground truth for ``state``'s viewport (no photo effects)."""
    page = resolve_page(source, state.page)
    prof = state.profile
    lay = get_layout(page, prof, state.inputs)
    canvas = get_canvas(page, prof, state.inputs, state.ad_phase)
    frame = canvas[state.scroll_offset:state.scroll_offset + prof.height,
                   state.h_offset:state.h_offset + prof.width].copy()
    truth = viewport_truth(lay, state.h_offset, state.scroll_offset)
    lines = [TextLine(g.bbox, g.text) for g in truth if g.kind == "Text"]
    return RenderOutput(frame, truth, lines)


_NOISE_TABLE = np.array([round(PHOTO_SIGMA * NormalDist().inv_cdf((k + 0.5) / 256)) for k in range(256)],
                        dtype=np.int16)


def photo_margins(profile) -> tuple[int, int]:
    """``(x, y)`` pad around the screen in a simulated photo."""
    return int(round(PHOTO_MARGIN * profile.width)), int(round(PHOTO_MARGIN * profile.height))


def state_seed(state) -> int:
    key = (f"{state.rng_seed}|{state.profile.name}|{state.page}|{state.scroll_offset}|"
           f"{state.h_offset}|{state.inputs}|{state.ad_phase}")
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "little")


def make_photo(frame: np.ndarray, state) -> np.ndarray:
    """Paste the frame on a black pad and add seeded Gaussian pixel noise.

    The noise is drawn by inverse-CDF lookup of uniform bytes, quantized to
    whole intensity levels.
    """
    mx, my = photo_margins(state.profile)
    h, w = frame.shape[:2]
    photo = np.zeros((h + 2 * my, w + 2 * mx, 3), dtype=np.int16)
    photo[my:my + h, mx:mx + w] = frame
    rng = np.random.default_rng(state_seed(state))
    photo += _NOISE_TABLE[rng.integers(0, 256, size=photo.shape, dtype=np.uint8)]
    return np.clip(photo, 0, 255).astype(np.uint8)


def screenshot(source: App | AbstractPage, state) -> np.ndarray:
    out = render(source, state)
    if state.profile.kind is DeviceKind.PHOTO:
        return make_photo(out.frame, state)
    return out.frame
