"""Per-widget multi-modal profiles: location, shape, clip, text and context."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np

from .errors import ContractError
from .imaging import Bbox, crop, embed_clip, image_digest, read_png, write_png

if TYPE_CHECKING:
    from .devicefarm.profiles import DeviceProfile

SNAPSHOT_SCHEMA = "visreplay.snapshot/1"
DIRECTIONS = ("up", "down", "left", "right")


class WidgetKind(str, enum.Enum):
    TEXT = "Text"
    NONTEXT = "NonText"


@dataclass(frozen=True)
class RawWidget:
    bbox: Bbox
    kind: WidgetKind
    is_container: bool = False
    text: str | None = None

    def __post_init__(self):
        if self.kind is WidgetKind.TEXT and not (self.text and self.text.strip()):
            raise ContractError("text widgets need non-empty content")
        if self.is_container and self.kind is not WidgetKind.NONTEXT:
            raise ContractError("only non-text widgets can be containers")

    @property
    def has_text(self) -> bool:
        return bool(self.text and self.text.strip())


@dataclass(frozen=True)
class ShapeTuple:
    width: int
    height: int
    area: int
    aspect_ratio: float


@dataclass(frozen=True)
class NeighborSet:
    """Indices into the owning snapshot's widget list."""

    up: int | None = None
    down: int | None = None
    left: int | None = None
    right: int | None = None
    parent: int | None = None

    def slots(self) -> tuple[int | None, ...]:
        return (self.parent, self.up, self.down, self.left, self.right)


@dataclass(frozen=True, eq=False)
class WidgetProfile:
    location: Bbox
    shape: ShapeTuple
    clip: np.ndarray = field(repr=False)
    clip_embedding: np.ndarray = field(repr=False)
    text: str | None
    neighbors: NeighborSet
    norm_center: tuple[float, float]


@dataclass(eq=False)
class GuiSnapshot:
    """One screen at one instant; ``raw`` and ``profiles`` are index-aligned."""

    image: np.ndarray = field(repr=False)
    raw: list[RawWidget]
    profiles: list[WidgetProfile]
    device: DeviceProfile | None = None
    page_offset: int = -1
    digest: str = ""

    def __post_init__(self):
        if len(self.raw) != len(self.profiles):
            raise ContractError("raw widgets and profiles must be index-aligned")
        if not self.digest:
            self.digest = image_digest(self.image)

    def __len__(self) -> int:
        return len(self.raw)

    @property
    def widgets(self) -> list[tuple[RawWidget, WidgetProfile]]:
        return list(zip(self.raw, self.profiles))

    @property
    def width(self) -> int:
        return self.image.shape[1]

    @property
    def height(self) -> int:
        return self.image.shape[0]

    def widget_at(self, x: float, y: float) -> int | None:
        """Index of the smallest-area widget whose bbox contains the point."""
        hits = [i for i, w in enumerate(self.raw) if w.bbox.contains_point(x, y)]
        if not hits:
            return None
        return min(hits, key=lambda i: (self.raw[i].bbox.area, i))

    def to_dict(self) -> dict:
        dev = self.device
        return {
            "schema": SNAPSHOT_SCHEMA,
            "image_digest": self.digest,
            "width": self.width,
            "height": self.height,
            "device": None if dev is None else dev.name,
            "page_offset": self.page_offset,
            "widgets": [
                {
                    "bbox": list(w.bbox.as_tuple()),
                    "kind": w.kind.value,
                    "is_container": w.is_container,
                    "text": w.text,
                    "embedding": [float(v) for v in p.clip_embedding],
                    "neighbors": {
                        "parent": p.neighbors.parent,
                        **{d: getattr(p.neighbors, d) for d in DIRECTIONS},
                    },
                    "norm_center": list(p.norm_center),
                }
                for w, p in self.widgets
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def compute_shape(box: Bbox) -> ShapeTuple:
    w, h = box.width, box.height
    return ShapeTuple(w, h, w * h, w / h)


def _box_arrays(raws: Sequence[RawWidget]) -> tuple[np.ndarray, ...]:
    arr = np.array([w.bbox.as_tuple() for w in raws], dtype=np.int64).reshape(-1, 4)
    return arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3]


def find_parent(index: int, raws: Sequence[RawWidget]) -> int | None:
    """Smallest-area container whose bbox strictly contains widget ``index``."""
    box = raws[index].bbox
    best = None
    for j, other in enumerate(raws):
        if j == index or not other.is_container or not other.bbox.strictly_contains(box):
            continue
        if best is None or other.bbox.area < raws[best].bbox.area:
            best = j
    return best


def _ancestors(index: int, raws: Sequence[RawWidget]) -> set[int]:
    box = raws[index].bbox
    return {j for j, o in enumerate(raws)
            if j != index and o.is_container and o.bbox.strictly_contains(box)}


def find_neighbors(index: int, raws: Sequence[RawWidget]) -> NeighborSet:
    """Closest widget in each direction by edge distance.

    A candidate must overlap the widget's projection on the perpendicular
    axis by at least one pixel. Containers enclosing the widget are skipped.
    Ties go to the larger overlap, then the lower index.
    """
    if not raws:
        raise ContractError("empty widget list")
    top, left, bottom, right = _box_arrays(raws)
    t, l, b, r = raws[index].bbox.as_tuple()
    h_overlap = np.minimum(right, r) - np.maximum(left, l)
    v_overlap = np.minimum(bottom, b) - np.maximum(top, t)
    eligible = np.ones(len(raws), dtype=bool)
    eligible[index] = False
    for j in _ancestors(index, raws):
        eligible[j] = False

    def pick(mask, dist, overlap):
        idx = np.nonzero(mask & eligible)[0]
        if idx.size == 0:
            return None
        order = np.lexsort((idx, -overlap[idx], dist[idx]))
        return int(idx[order[0]])

    return NeighborSet(
        up=pick((bottom <= t) & (h_overlap >= 1), t - bottom, h_overlap),
        down=pick((top >= b) & (h_overlap >= 1), top - b, h_overlap),
        left=pick((right <= l) & (v_overlap >= 1), l - right, v_overlap),
        right=pick((left >= r) & (v_overlap >= 1), left - r, v_overlap),
        parent=find_parent(index, raws),
    )


Encoder = Callable[[np.ndarray], np.ndarray]


def build_profiles(image: np.ndarray, raws: Sequence[RawWidget], device=None,
                   page_offset: int = -1, encoder: Encoder = embed_clip) -> GuiSnapshot:
    """Attach a complete profile to every detected widget."""
    height, width = image.shape[:2]
    # clips are read-only views into a private copy of the frame
    image = image.copy()
    image.setflags(write=False)
    profiles = []
    for i, w in enumerate(raws):
        clip = crop(image, w.bbox, view=True)
        cx = (w.bbox.left + w.bbox.right) / 2.0 / width
        cy = (w.bbox.top + w.bbox.bottom) / 2.0 / height
        profiles.append(WidgetProfile(
            location=w.bbox,
            shape=compute_shape(w.bbox),
            clip=clip,
            clip_embedding=encoder(clip),
            text=w.text if w.has_text else None,
            neighbors=find_neighbors(i, raws),
            norm_center=(cx, cy),
        ))
    return GuiSnapshot(image=image, raw=list(raws), profiles=profiles,
                       device=device, page_offset=page_offset)


def save_snapshot(snapshot: GuiSnapshot, directory: str | Path, stem: str | None = None) -> Path:
    """Write ``<stem>.json`` plus the ``<digest>.png`` sidecar it links to."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_png(snapshot.image, directory / f"{snapshot.digest}.png")
    path = directory / f"{stem or snapshot.digest}.json"
    path.write_text(snapshot.to_json(), encoding="utf-8")
    return path


def load_snapshot(path: str | Path, device=None) -> GuiSnapshot:
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    if doc.get("schema") != SNAPSHOT_SCHEMA:
        raise ContractError(f"unsupported snapshot schema {doc.get('schema')!r}")
    image = read_png(path.parent / f"{doc['image_digest']}.png")
    if image_digest(image) != doc["image_digest"]:
        raise ContractError("snapshot image sidecar does not match its digest")
    raws, profiles = [], []
    for w in doc["widgets"]:
        box = Bbox(*w["bbox"])
        raw = RawWidget(box, WidgetKind(w["kind"]), w["is_container"], w["text"])
        n = w["neighbors"]
        raws.append(raw)
        profiles.append(WidgetProfile(
            location=box,
            shape=compute_shape(box),
            clip=crop(image, box),
            clip_embedding=np.array(w["embedding"], dtype=np.float64),
            text=raw.text if raw.has_text else None,
            neighbors=NeighborSet(n["up"], n["down"], n["left"], n["right"], n["parent"]),
            norm_center=tuple(w["norm_center"]),
        ))
    return GuiSnapshot(image=image, raw=raws, profiles=profiles, device=device,
                       page_offset=doc["page_offset"], digest=doc["image_digest"])
