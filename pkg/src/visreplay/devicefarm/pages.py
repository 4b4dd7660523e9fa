"""Abstract page model: widget trees with transition tables, loadable from JSON."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from ..errors import ConfigError, PageNotFound

PAGE_SCHEMA = "visreplay.page/1"
ACTION_TYPES = ("Click", "LongPress", "Input", "SwipeH", "ScrollV")


class WidgetType(str, enum.Enum):
    LABEL = "Label"
    BUTTON = "Button"
    ICON = "Icon"
    IMAGE = "ImageBox"
    CONTAINER = "Container"
    GRID_ITEM = "GridItem"


@dataclass(frozen=True)
class AbstractWidget:
    """One node of a page tree.

    ``min_width`` is in dp; 0 lets the widget stretch. Containers lay their
    children out as a column unless ``direction`` is ``"row"``; a ``plain``
    container groups children without drawing anything.
    """

    id: str
    kind: WidgetType
    text: str | None = None
    min_width: float = 0.0
    glyph_seed: int | None = None
    children: tuple[AbstractWidget, ...] = ()
    editable: bool = False
    size: float = 16.0
    aspect: float = 0.5625
    direction: str = "column"
    plain: bool = False
    volatile: bool = False

    def __post_init__(self):
        if not self.id:
            raise ConfigError("widget id must be non-empty")
        k = self.kind
        if k in (WidgetType.LABEL, WidgetType.BUTTON) and not (self.text and self.text.strip()):
            raise ConfigError(f"{k.value} {self.id!r} needs text")
        if k in (WidgetType.ICON, WidgetType.IMAGE) and self.glyph_seed is None:
            raise ConfigError(f"{k.value} {self.id!r} needs glyph_seed")
        if self.children and k not in (WidgetType.CONTAINER, WidgetType.GRID_ITEM):
            raise ConfigError(f"{k.value} {self.id!r} cannot have children")
        if k in (WidgetType.CONTAINER, WidgetType.GRID_ITEM) and not self.children:
            raise ConfigError(f"{k.value} {self.id!r} needs children")
        if self.direction not in ("column", "row"):
            raise ConfigError(f"bad direction {self.direction!r}")
        if self.editable and k is not WidgetType.BUTTON:
            raise ConfigError("only Button widgets can be editable fields")
        if self.min_width < 0 or self.size <= 0 or self.aspect <= 0:
            raise ConfigError(f"widget {self.id!r}: sizes must be positive")

    def walk(self) -> Iterator[AbstractWidget]:
        yield self
        for c in self.children:
            yield from c.walk()

    def to_dict(self) -> dict:
        d: dict = {"id": self.id, "kind": self.kind.value}
        defaults = AbstractWidget("x", WidgetType.ICON, glyph_seed=0)
        for name in ("text", "min_width", "glyph_seed", "editable", "size", "aspect",
                     "direction", "plain", "volatile"):
            v = getattr(self, name)
            if v != getattr(defaults, name) or (name == "glyph_seed" and v is not None):
                d[name] = v
        if self.children:
            d["children"] = [c.to_dict() for c in self.children]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> AbstractWidget:
        kw = {k: d[k] for k in ("text", "min_width", "glyph_seed", "editable", "size",
                                "aspect", "direction", "plain", "volatile") if k in d}
        return cls(id=d["id"], kind=WidgetType(d["kind"]),
                   children=tuple(cls.from_dict(c) for c in d.get("children", ())), **kw)


@dataclass(frozen=True)
class AbstractPage:
    """A page is either one vertical column of widgets or a row of swipeable panes."""

    id: str
    widgets: tuple[AbstractWidget, ...] = ()
    transitions: dict[tuple[str, str], str] = field(default_factory=dict)
    nav: tuple[AbstractWidget, ...] = ()
    panes: tuple[tuple[AbstractWidget, ...], ...] = ()
    family: str = ""

    def __post_init__(self):
        if bool(self.widgets) == bool(self.panes):
            raise ConfigError(f"page {self.id!r} needs exactly one of widgets or panes")
        ids = [w.id for w in self.walk()]
        dup = {i for i in ids if ids.count(i) > 1}
        if dup:
            raise ConfigError(f"page {self.id!r} has duplicate widget ids {sorted(dup)}")
        for item in self.nav:
            if item.kind is not WidgetType.ICON or not item.text:
                raise ConfigError(f"nav item {item.id!r} must be an Icon with text")
        if self.nav and self.panes:
            raise ConfigError(f"page {self.id!r}: paged layouts cannot have a nav bar")
        known = set(ids)
        for (wid, action), _ in self.transitions.items():
            if wid not in known:
                raise ConfigError(f"transition on unknown widget {wid!r} in page {self.id!r}")
            if action not in ACTION_TYPES:
                raise ConfigError(f"unknown action type {action!r}")

    def walk(self) -> Iterator[AbstractWidget]:
        for w in self.widgets:
            yield from w.walk()
        for pane in self.panes:
            for w in pane:
                yield from w.walk()
        for item in self.nav:
            yield item

    def to_dict(self) -> dict:
        d: dict = {"schema": PAGE_SCHEMA, "id": self.id}
        if self.family:
            d["family"] = self.family
        if self.widgets:
            d["widgets"] = [w.to_dict() for w in self.widgets]
        if self.panes:
            d["panes"] = [[w.to_dict() for w in pane] for pane in self.panes]
        if self.nav:
            d["nav"] = [w.to_dict() for w in self.nav]
        d["transitions"] = [{"widget": w, "action": a, "to": to}
                            for (w, a), to in sorted(self.transitions.items())]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> AbstractPage:
        validate_page_document(d)
        return cls(
            id=d["id"],
            widgets=tuple(AbstractWidget.from_dict(w) for w in d.get("widgets", ())),
            panes=tuple(tuple(AbstractWidget.from_dict(w) for w in p) for p in d.get("panes", ())),
            nav=tuple(AbstractWidget.from_dict(w) for w in d.get("nav", ())),
            transitions={(t["widget"], t["action"]): t["to"] for t in d.get("transitions", ())},
            family=d.get("family", ""),
        )


def validate_page_document(doc: dict) -> None:
    import jsonschema

    from ..schemas import load_schema
    try:
        jsonschema.validate(doc, load_schema("page"))
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid page document: {exc.message}") from exc


class App:
    """A set of pages closed under transitions."""

    def __init__(self, pages: list[AbstractPage], start: str | None = None):
        self.pages = {p.id: p for p in pages}
        if len(self.pages) != len(pages):
            raise ConfigError("duplicate page ids")
        for p in pages:
            for to in p.transitions.values():
                if to not in self.pages:
                    raise ConfigError(f"page {p.id!r} transitions to unknown page {to!r}")
        self.start = start or (pages[0].id if pages else None)

    def page(self, page_id: str) -> AbstractPage:
        try:
            return self.pages[page_id]
        except KeyError:
            raise PageNotFound(page_id) from None

    def __iter__(self):
        return iter(self.pages.values())

    def __len__(self) -> int:
        return len(self.pages)

    def save(self, directory: str | Path) -> list[Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        paths = []
        for p in self.pages.values():
            path = directory / f"{p.id}.json"
            path.write_text(json.dumps(p.to_dict(), indent=1, sort_keys=True), encoding="utf-8")
            paths.append(path)
        return paths

    @classmethod
    def load(cls, paths: list[str | Path]) -> App:
        pages = []
        for path in paths:
            try:
                doc = json.loads(Path(path).read_text(encoding="utf-8"))
            except (OSError, ValueError) as exc:
                raise ConfigError(f"cannot read page file {path}: {exc}") from exc
            pages.append(AbstractPage.from_dict(doc))
        return cls(pages)
