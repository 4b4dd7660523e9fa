"""Responsive layout: places an abstract page on a device in content pixels.

All sizes are specified in dp (text in sp, treated the same) and converted
with the profile's density, so one page reflows across screen sizes: text
wraps at the usable width and grid rows hold ``floor(width / min_width)``
items.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from .pages import AbstractPage, AbstractWidget, WidgetType
from .profiles import DeviceProfile, Skin

PAGE_PAD = 16
PAGE_GAP = 12
CARD_PAD = 12
INNER_GAP = 8
BUTTON_H = 48
ICON_CELLS = 5
ICON_CELL = 8
TILE_PAD = 8
NAV_PAD = 8
NAV_TEXT = 12
FIELD_PAD = 12
LINE_SPACING = 1.4

TEXT_DARK = (32, 33, 36)
TEXT_LIGHT = (255, 255, 255)
TEXT_HINT = (118, 118, 118)

SURFACES = {
    Skin.A: ((218, 220, 224), (255, 255, 255), (197, 205, 219)),
    Skin.B: ((255, 255, 255), (214, 214, 222), (255, 255, 255)),
}
ACCENT = {Skin.A: (25, 118, 210), Skin.B: (0, 122, 255)}
RADIUS = {Skin.A: 2, Skin.B: 6}
ICON_COLORS = ((60, 64, 67), (26, 115, 232), (217, 48, 37), (24, 128, 56),
               (161, 66, 244), (0, 137, 123), (230, 81, 0))
STRIPE_COLORS = ((239, 83, 80), (66, 165, 245), (102, 187, 106), (245, 124, 0),
                 (126, 87, 194), (38, 50, 56), (0, 96, 100), (141, 110, 99))


def luminance(rgb: tuple[int, int, int]) -> float:
    r, g, b = rgb
    return 0.299 * r + 0.587 * g + 0.114 * b


def surface(skin: Skin, depth: int) -> tuple[int, int, int]:
    """Fill colour at nesting ``depth``; adjacent depths differ by >= 30 luminance."""
    s = SURFACES[skin]
    if depth <= 0:
        return s[0]
    return s[1] if depth % 2 == 1 else s[2]


@dataclass
class Node:
    """A placed element. ``box`` is ``(top, left, bottom, right)`` in content pixels.

    Nodes with a ``kind`` are visible widgets and appear in ground truth;
    nodes without one only take part in hit testing.
    """

    id: str
    owner: str
    wtype: str
    box: tuple[int, int, int, int]
    kind: str | None = None
    is_container: bool = False
    text: str | None = None
    editable: bool = False
    paint: dict = field(default_factory=dict)

    def shifted(self, dx: int, dy: int) -> Node:
        t, l, b, r = self.box
        paint = dict(self.paint)
        if "origin" in paint:
            ox, oy = paint["origin"]
            paint["origin"] = (ox + dx, oy + dy)
        return replace(self, box=(t + dy, l + dx, b + dy, r + dx), paint=paint)


@dataclass
class PageLayout:
    page_id: str
    profile: DeviceProfile
    width: int
    height: int
    pane_width: int
    panes: int
    nodes: list[Node]

    def max_offset(self) -> int:
        return max(0, self.height - self.profile.height)

    def max_h_offset(self) -> int:
        return max(0, self.width - self.profile.width)

    def find(self, node_id: str) -> Node | None:
        for n in self.nodes:
            if n.id == node_id:
                return n
        return None


# -- text -------------------------------------------------------------------

@lru_cache(maxsize=64)
def font(size_px: int) -> ImageFont.FreeTypeFont:
    return ImageFont.load_default(size=max(1, size_px))


@lru_cache(maxsize=4096)
def text_mask(text: str, size_px: int) -> tuple[np.ndarray, tuple[int, int, int, int]]:
    """Binary glyph mask drawn at origin (0, 0) and its ink box ``(top, left, bottom, right)``."""
    f = font(size_px)
    x0, y0, x1, y1 = f.getbbox(text)
    im = Image.new("L", (max(1, x1 + 2), max(1, y1 + 2)), 0)
    draw = ImageDraw.Draw(im)
    draw.fontmode = "1"
    draw.text((0, 0), text, font=f, fill=255)
    mask = np.asarray(im) > 127
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        return mask, (0, 0, 1, 1)
    return mask, (int(rows.min()), int(cols.min()), int(rows.max()) + 1, int(cols.max()) + 1)


def text_width(text: str, size_px: int) -> int:
    return int(np.ceil(font(size_px).getlength(text)))


def wrap_text(text: str, size_px: int, width: int) -> list[str]:
    words = text.split()
    lines: list[str] = []
    cur = ""
    for word in words:
        trial = f"{cur} {word}" if cur else word
        if cur and text_width(trial, size_px) > width:
            lines.append(cur)
            cur = word
        else:
            cur = trial
    if cur:
        lines.append(cur)
    return lines


# -- icon glyphs ------------------------------------------------------------

def _fill_holes(cells: set[tuple[int, int]], n: int) -> set[tuple[int, int]]:
    outside, stack = set(), [(r, c) for r in range(-1, n + 1) for c in (-1, n)]
    stack += [(r, c) for c in range(n) for r in (-1, n)]
    while stack:
        p = stack.pop()
        if p in outside or p in cells or not (-1 <= p[0] <= n and -1 <= p[1] <= n):
            continue
        outside.add(p)
        r, c = p
        stack += [(r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)]
    return {(r, c) for r in range(n) for c in range(n) if (r, c) not in outside}


@lru_cache(maxsize=1024)
def glyph_cells(seed: int, skin: Skin = Skin.A) -> frozenset[tuple[int, int]]:
    """A seeded 4-connected, hole-free polyomino on a 5x5 grid.

    The second skin adds one extra cell on the glyph's periphery, so the two
    variants are related but not identical.
    """
    n = ICON_CELLS
    rng = random.Random(seed * 7919 + 17)
    cells = {(n // 2, n // 2)}
    target = rng.randint(9, 15)
    while len(cells) < target:
        r, c = rng.choice(sorted(cells))
        dr, dc = rng.choice(((1, 0), (-1, 0), (0, 1), (0, -1)))
        if 0 <= r + dr < n and 0 <= c + dc < n:
            cells.add((r + dr, c + dc))
    cells = _fill_holes(cells, n)
    if skin is Skin.B:
        frontier = sorted({(r + dr, c + dc) for r, c in cells
                           for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1))
                           if 0 <= r + dr < n and 0 <= c + dc < n} - cells)
        rng.shuffle(frontier)
        for p in frontier:
            grown = cells | {p}
            if _fill_holes(grown, n) == grown:
                cells = grown
                break
    return frozenset(cells)


def icon_color(seed: int) -> tuple[int, int, int]:
    return ICON_COLORS[seed % len(ICON_COLORS)]


def stripe_style(seed: int) -> tuple[int, int, tuple[int, int, int], tuple[int, int, int]]:
    """``(orientation, count, colour_a, colour_b)`` for an image box."""
    pairs = [(a, b) for a in STRIPE_COLORS for b in STRIPE_COLORS
             if a != b and abs(luminance(a) - luminance(b)) >= 30]
    rng = random.Random(seed * 104729 + 3)
    a, b = pairs[rng.randrange(len(pairs))]
    return rng.randrange(3), rng.randint(3, 7), a, b


# -- layout -----------------------------------------------------------------

class _Ctx:
    def __init__(self, profile: DeviceProfile, inputs: dict[str, str]):
        self.p = profile
        self.skin = profile.platform_skin
        self.inputs = inputs

    def px(self, dp: float) -> int:
        return self.p.px(dp)


def _shift(nodes: list[Node], dx: int, dy: int) -> list[Node]:
    return [n.shifted(dx, dy) for n in nodes] if (dx or dy) else nodes


def _text_lines(ctx: _Ctx, owner: str, text: str, size_sp: float, x: int, y: int,
                width: int, align: str, color, first_index: int = 0) -> tuple[list[Node], int]:
    size_px = ctx.px(size_sp)
    line_h = int(round(size_px * LINE_SPACING))
    ascent, descent = font(size_px).getmetrics()
    nodes = []
    for k, line in enumerate(wrap_text(text, size_px, width)):
        top = y + k * line_h
        ox = x + (width - text_width(line, size_px)) // 2 if align == "center" else x
        oy = top + (line_h - ascent - descent) // 2
        _, (it, il, ib, ir) = text_mask(line, size_px)
        nodes.append(Node(f"{owner}#{first_index + k}", owner, "TextLine",
                          (oy + it, ox + il, oy + ib, ox + ir), "Text", text=line,
                          paint={"text": line, "size": size_px, "color": color, "origin": (ox, oy)}))
    return nodes, len(nodes) * line_h


def _intrinsic_width(ctx: _Ctx, w: AbstractWidget, avail: int) -> int | None:
    if w.kind is WidgetType.ICON:
        return ICON_CELLS * ctx.px(ICON_CELL)
    if w.kind is WidgetType.BUTTON and w.min_width > 0:
        label = text_width(w.text, ctx.px(16)) + 2 * ctx.px(16)
        return min(avail, max(ctx.px(w.min_width), label))
    if w.kind is WidgetType.IMAGE and w.min_width > 0:
        return min(avail, ctx.px(w.min_width))
    return None


def _layout(ctx: _Ctx, w: AbstractWidget, x: int, y: int, width: int, depth: int,
            align: str) -> tuple[list[Node], int]:
    k = w.kind
    if k is WidgetType.LABEL:
        lines, h = _text_lines(ctx, w.id, w.text, w.size, x, y, width, align, TEXT_DARK)
        hit = Node(w.id, w.id, "Label", _union([n.box for n in lines]))
        return [hit] + lines, h
    if k is WidgetType.BUTTON:
        return _button(ctx, w, x, y, width, depth)
    if k is WidgetType.ICON:
        cell = ctx.px(ICON_CELL)
        cells = glyph_cells(w.glyph_seed, ctx.skin)
        rs = [r for r, _ in cells]
        cs = [c for _, c in cells]
        box = (y + min(rs) * cell, x + min(cs) * cell, y + (max(rs) + 1) * cell, x + (max(cs) + 1) * cell)
        node = Node(w.id, w.id, "Icon", box, "NonText",
                    paint={"glyph": cells, "cell": cell, "origin": (x, y),
                           "color": icon_color(w.glyph_seed)})
        return [node], ICON_CELLS * cell
    if k is WidgetType.IMAGE:
        h = max(1, int(round(width * w.aspect)))
        node = Node(w.id, w.id, "ImageBox", (y, x, y + h, x + width), "NonText",
                    paint={"stripes": w.glyph_seed, "volatile": w.volatile})
        return [node], h
    if k is WidgetType.CONTAINER:
        if w.plain:
            inner, h = _children(ctx, w, x, y, width, depth, align)
            return [Node(w.id, w.id, "Container", (y, x, y + max(h, 1), x + width))] + inner, h
        pad = ctx.px(CARD_PAD)
        inner, h = _children(ctx, w, x + pad, y + pad, width - 2 * pad, depth + 1, align)
        h += 2 * pad
        card = Node(w.id, w.id, "Container", (y, x, y + h, x + width), "NonText", True,
                    paint={"fill": surface(ctx.skin, depth + 1), "radius": ctx.px(RADIUS[ctx.skin])})
        return [card] + inner, h
    if k is WidgetType.GRID_ITEM:
        pad = ctx.px(TILE_PAD)
        inner, h = _column(ctx, w.children, x + pad, y + pad, width - 2 * pad, depth + 1,
                           ctx.px(INNER_GAP), "center")
        h += 2 * pad
        tile = Node(w.id, w.id, "GridItem", (y, x, y + h, x + width), "NonText", True,
                    paint={"fill": surface(ctx.skin, depth + 1), "radius": ctx.px(RADIUS[ctx.skin])})
        return [tile] + inner, h
    raise ValueError(k)


def _button(ctx: _Ctx, w: AbstractWidget, x: int, y: int, width: int,
            depth: int) -> tuple[list[Node], int]:
    h = ctx.px(BUTTON_H)
    size_px = ctx.px(16)
    radius = ctx.px(RADIUS[ctx.skin])
    if w.editable:
        value = ctx.inputs.get(w.id)
        shown = value if value else w.text
        color = TEXT_DARK if value else TEXT_HINT
        fill = surface(ctx.skin, depth + 1)
        pad = ctx.px(FIELD_PAD)
        lines, lh = _text_lines(ctx, w.id, shown, 16, x + pad, y, width - 2 * pad, "left", color)
        lines = lines[:1]
        align_dy = (h - int(round(size_px * LINE_SPACING))) // 2
    else:
        shown = w.text
        fill = ACCENT[ctx.skin]
        lines, lh = _text_lines(ctx, w.id, shown, 16, x, y, width, "center", TEXT_LIGHT)
        lines = lines[:1]
        align_dy = (h - int(round(size_px * LINE_SPACING))) // 2
    lines = _shift(lines, 0, align_dy)
    node = Node(w.id, w.id, "Button", (y, x, y + h, x + width), "NonText", True, text=shown,
                editable=w.editable, paint={"fill": fill, "radius": radius})
    return [node] + lines, h


def _union(boxes):
    if not boxes:
        return (0, 0, 1, 1)
    return (min(b[0] for b in boxes), min(b[1] for b in boxes),
            max(b[2] for b in boxes), max(b[3] for b in boxes))


def _children(ctx, w, x, y, width, depth, align):
    gap = ctx.px(INNER_GAP)
    if w.direction == "row":
        return _row(ctx, w.children, x, y, width, depth, gap)
    return _column(ctx, w.children, x, y, width, depth, gap, align)


def _row(ctx, children, x, y, width, depth, gap):
    fixed = [_intrinsic_width(ctx, c, width) for c in children]
    n_flex = sum(1 for f in fixed if f is None)
    remaining = width - sum(f for f in fixed if f is not None) - gap * (len(children) - 1)
    flex_w = max(1, remaining // n_flex) if n_flex else 0
    placed, cx, height = [], x, 0
    for c, f in zip(children, fixed):
        cw = f if f is not None else flex_w
        nodes, h = _layout(ctx, c, cx, y, cw, depth, "left")
        placed.append((nodes, h))
        height = max(height, h)
        cx += cw + gap
    out = []
    for nodes, h in placed:
        out += _shift(nodes, 0, (height - h) // 2)
    return out, height


def _column(ctx, children, x, y, width, depth, gap, align):
    out: list[Node] = []
    cy = y
    i = 0
    first = True
    while i < len(children):
        if not first:
            cy += gap
        first = False
        c = children[i]
        if c.kind is WidgetType.GRID_ITEM:
            j = i
            while j < len(children) and children[j].kind is WidgetType.GRID_ITEM:
                j += 1
            nodes, h = _grid(ctx, children[i:j], x, cy, width, depth, gap)
            i = j
        elif _intrinsic_width(ctx, c, width) is not None:
            j = i
            while j < len(children) and _intrinsic_width(ctx, children[j], width) is not None:
                j += 1
            nodes, h = _flow(ctx, children[i:j], x, cy, width, depth, gap, align)
            i = j
        else:
            nodes, h = _layout(ctx, c, x, cy, width, depth, align)
            i += 1
        out += nodes
        cy += h
    return out, cy - y


def _flow(ctx, items, x, y, width, depth, gap, align):
    rows, cur, used = [], [], 0
    for it in items:
        w = _intrinsic_width(ctx, it, width)
        if cur and used + gap + w > width:
            rows.append(cur)
            cur, used = [], 0
        used = used + gap + w if cur else w
        cur.append((it, w))
    if cur:
        rows.append(cur)
    out, cy = [], y
    for k, row in enumerate(rows):
        if k:
            cy += gap
        total = sum(w for _, w in row) + gap * (len(row) - 1)
        cx = x + (width - total) // 2 if align == "center" else x
        placed, height = [], 0
        for it, w in row:
            nodes, h = _layout(ctx, it, cx, cy, w, depth, align)
            placed.append((nodes, h))
            height = max(height, h)
            cx += w + gap
        for nodes, h in placed:
            out += _shift(nodes, 0, (height - h) // 2)
        cy += height
    return out, cy - y


def grid_columns(avail_px: int, min_width_px: int) -> int:
    return max(1, avail_px // max(1, min_width_px))


def _grid(ctx, items, x, y, width, depth, gap):
    n = grid_columns(width, ctx.px(items[0].min_width or 96))
    out, cy = [], y
    for start in range(0, len(items), n):
        if start:
            cy += gap
        row = items[start:start + n]
        cells = []
        for k, it in enumerate(row):
            x0 = x + (k * (width + gap)) // n
            x1 = x + ((k + 1) * (width + gap)) // n - gap
            cells.append(_layout(ctx, it, x0, cy, x1 - x0, depth, "center"))
        height = max(h for _, h in cells)
        for nodes, _ in cells:
            tile = nodes[0]
            t, l, b, r = tile.box
            nodes[0] = replace(tile, box=(t, l, t + height, r))
            out += nodes
        cy += height
    return out, cy - y


def _nav(ctx, page: AbstractPage, x, y, width, depth):
    pad = ctx.px(NAV_PAD)
    inner_w = width - 2 * pad
    n = len(page.nav)
    gap = ctx.px(4)
    cells, height = [], 0
    for k, item in enumerate(page.nav):
        x0 = x + pad + (k * inner_w) // n
        x1 = x + pad + ((k + 1) * inner_w) // n
        icon = AbstractWidget(f"{item.id}~icon", WidgetType.ICON, glyph_seed=item.glyph_seed)
        label = AbstractWidget(f"{item.id}~label", WidgetType.LABEL, text=item.text, size=NAV_TEXT)
        if ctx.skin is Skin.A:
            nodes, h = _column(ctx, (icon, label), x0, y + pad, x1 - x0, depth + 1, gap, "center")
        else:
            iw = ICON_CELLS * ctx.px(ICON_CELL)
            lw = min(text_width(item.text, ctx.px(NAV_TEXT)), x1 - x0 - iw - gap)
            start = x0 + (x1 - x0 - iw - gap - lw) // 2
            group = AbstractWidget(f"{item.id}~row", WidgetType.CONTAINER, plain=True,
                                   direction="row", children=(icon, label))
            nodes, h = _row(ctx, group.children, start, y + pad, iw + gap + lw, depth + 1, gap)
        cell = Node(item.id, item.id, "NavCell", (y + pad, x0, y + pad + h, x1))
        cells.append([cell] + nodes)
        height = max(height, h)
    h = height + 2 * pad
    bar = Node(f"{page.id}~nav", f"{page.id}~nav", "NavBar", (y, x, y + h, x + width), "NonText", True,
               paint={"fill": surface(ctx.skin, depth + 1), "radius": ctx.px(RADIUS[ctx.skin])})
    out = [bar]
    for c in cells:
        t, l, _, r = c[0].box
        c[0] = replace(c[0], box=(t, l, t + height, r))
        out += c
    return out, h


def layout_page(page: AbstractPage, profile: DeviceProfile,
                inputs: dict[str, str] | None = None) -> PageLayout:
    ctx = _Ctx(profile, dict(inputs or {}))
    pad, gap = ctx.px(PAGE_PAD), ctx.px(PAGE_GAP)
    W = profile.width
    nodes: list[Node] = []
    if page.panes:
        height = 0
        for k, pane in enumerate(page.panes):
            pn, h = _column(ctx, pane, k * W + pad, pad, W - 2 * pad, 0, gap, "left")
            nodes += pn
            height = max(height, pad + h)
        width = W * len(page.panes)
        panes = len(page.panes)
    else:
        nodes, h = _column(ctx, page.widgets, pad, pad, W - 2 * pad, 0, gap, "left")
        height = pad + h
        if page.nav:
            nav, nh = _nav(ctx, page, pad, height + gap, W - 2 * pad, 0)
            nodes += nav
            height += gap + nh
        width, panes = W, 1
    return PageLayout(page.id, profile, width, height + pad, W, panes, nodes)
