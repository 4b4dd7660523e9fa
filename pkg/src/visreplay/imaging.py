"""Pixel-level primitives.

Images are ``numpy`` arrays of shape ``(height, width, 3)`` and dtype
``uint8`` in row-major RGB order. Grayscale images are ``(height, width)``
``uint8`` arrays and binary maps are ``bool`` arrays of the same shape.
"""

from __future__ import annotations

import hashlib
import io
import weakref
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np
from PIL import Image

from .errors import BoundsError, ConfigError, ContractError

EMBED_SIZE = 64
EMBED_GRID = 8
EMBED_BINS = 16
EMBED_DIM = EMBED_GRID * EMBED_GRID + 3 * EMBED_BINS  # 112


@dataclass(frozen=True, order=True)
class Bbox:
    """Axis-aligned box; ``bottom`` and ``right`` are exclusive."""

    top: int
    left: int
    bottom: int
    right: int

    def __post_init__(self):
        if not (0 <= self.top < self.bottom and 0 <= self.left < self.right):
            raise ContractError(f"invalid bbox {self.as_tuple()}")

    @property
    def width(self) -> int:
        return self.right - self.left

    @property
    def height(self) -> int:
        return self.bottom - self.top

    @property
    def area(self) -> int:
        return self.width * self.height

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.top, self.left, self.bottom, self.right)

    def center(self) -> tuple[int, int]:
        """Integer center ``(x, y)``, rounded toward the top-left."""
        return ((self.left + self.right) // 2, (self.top + self.bottom) // 2)

    def contains_point(self, x: float, y: float) -> bool:
        return self.left <= x < self.right and self.top <= y < self.bottom

    def contains(self, other: Bbox) -> bool:
        return (self.top <= other.top and self.left <= other.left
                and other.bottom <= self.bottom and other.right <= self.right)

    def strictly_contains(self, other: Bbox) -> bool:
        return self.contains(other) and self != other

    def intersects(self, other: Bbox) -> bool:
        return (self.left < other.right and other.left < self.right
                and self.top < other.bottom and other.top < self.bottom)

    def intersection(self, other: Bbox) -> Bbox | None:
        top, left = max(self.top, other.top), max(self.left, other.left)
        bottom, right = min(self.bottom, other.bottom), min(self.right, other.right)
        if top >= bottom or left >= right:
            return None
        return Bbox(top, left, bottom, right)

    def iou(self, other: Bbox) -> float:
        inter = self.intersection(other)
        if inter is None:
            return 0.0
        return inter.area / (self.area + other.area - inter.area)

    def shifted(self, dx: int, dy: int) -> Bbox:
        return Bbox(self.top + dy, self.left + dx, self.bottom + dy, self.right + dx)

    def within(self, width: int, height: int) -> bool:
        return self.bottom <= height and self.right <= width

    @classmethod
    def clipped(cls, top, left, bottom, right, width, height) -> Bbox | None:
        top, left = max(0, top), max(0, left)
        bottom, right = min(height, bottom), min(width, right)
        if top >= bottom or left >= right:
            return None
        return cls(int(top), int(left), int(bottom), int(right))


@dataclass(frozen=True)
class Region:
    """A maximal 4-connected set of foreground pixels.

    ``mask`` covers exactly ``bbox``; ``mask[r, c]`` is pixel
    ``(bbox.left + c, bbox.top + r)``.
    """

    bbox: Bbox
    area: int
    mask: np.ndarray = field(repr=False, compare=False)

    def pixels(self) -> set[tuple[int, int]]:
        rows, cols = np.nonzero(self.mask)
        return {(int(c) + self.bbox.left, int(r) + self.bbox.top) for r, c in zip(rows, cols)}


def validate_image(img: np.ndarray) -> np.ndarray:
    if not isinstance(img, np.ndarray) or img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ContractError("expected an RGB uint8 array of shape (height, width, 3)")
    if img.shape[0] <= 0 or img.shape[1] <= 0:
        raise ContractError("image must be at least 1x1")
    return img


def image_size(img: np.ndarray) -> tuple[int, int]:
    """``(width, height)`` of an image."""
    return img.shape[1], img.shape[0]


_LUMA = np.array([[299, 587, 114]], dtype=np.float32)


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Luminance ``round(0.299 R + 0.587 G + 0.114 B)``, ties rounded up."""
    validate_image(img)
    # float32 holds the integer sums exactly and the division rounds correctly, so the floor is exact
    lum = cv2.transform(img.astype(np.float32), _LUMA)
    return np.floor((lum + np.float32(500)) / np.float32(1000)).astype(np.uint8)


def gradient_binarize(gray: np.ndarray, threshold: int) -> np.ndarray:
    """Mark pixels whose luminance differs from a 4-neighbour by more than ``threshold``.

    Each horizontal and vertical difference flags both pixels it straddles,
    so pixels on the image border only see their inward neighbours.
    """
    if not (1 <= int(threshold) <= 255):
        raise ConfigError(f"binarization threshold must be in [1, 255], got {threshold}")
    if gray.ndim != 2:
        raise ContractError("expected a 2-D grayscale image")
    g = gray.astype(np.int16)
    fg = np.zeros(g.shape, dtype=bool)
    dx = np.abs(g[:, 1:] - g[:, :-1]) > threshold
    fg[:, :-1] |= dx
    fg[:, 1:] |= dx
    dy = np.abs(g[1:, :] - g[:-1, :]) > threshold
    fg[:-1, :] |= dy
    fg[1:, :] |= dy
    return fg


def connected_components(binary: np.ndarray, min_area: int) -> list[Region]:
    """4-connected foreground regions with at least ``min_area`` pixels.

    Ordered by bbox top, then left, then area descending.
    """
    if min_area < 1:
        raise ConfigError("min_area must be >= 1")
    if not binary.any():
        return []
    count, labels, stats, _ = cv2.connectedComponentsWithStats(
        binary.astype(np.uint8), connectivity=4, ltype=cv2.CV_32S)
    regions = []
    for lab in range(1, count):
        left, top, width, height, area = (int(v) for v in stats[lab])
        if area < min_area:
            continue
        box = Bbox(top, left, top + height, left + width)
        mask = labels[top:top + height, left:left + width] == lab
        regions.append(Region(box, area, mask))
    regions.sort(key=lambda r: (r.bbox.top, r.bbox.left, -r.area))
    return regions


def min_area_for_dpi(dpi: float, base: int = 25) -> int:
    """Speckle floor: ``base`` px² at 160 dpi, scaled by ``(dpi / 160)²``."""
    return max(1, int(round(base * (dpi / 160.0) ** 2)))


def crop(img: np.ndarray, box: Bbox, view: bool = False) -> np.ndarray:
    height, width = img.shape[:2]
    if not box.within(width, height):
        raise BoundsError(f"box {box.as_tuple()} exceeds image {width}x{height}")
    out = img[box.top:box.bottom, box.left:box.right]
    return out if view else out.copy()


def _raw_features(clip: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h, w = clip.shape[:2]
    rows = (np.arange(EMBED_SIZE) * h) // EMBED_SIZE
    cols = (np.arange(EMBED_SIZE) * w) // EMBED_SIZE
    small = clip[rows][:, cols]
    lum = to_grayscale(small).astype(np.float64) / 255.0
    cell = EMBED_SIZE // EMBED_GRID
    grid = lum.reshape(EMBED_GRID, cell, EMBED_GRID, cell).mean(axis=(1, 3)).ravel()
    shift = 8 - int(np.log2(EMBED_BINS))
    hist = np.concatenate([
        np.bincount((small[..., ch] >> shift).ravel(), minlength=EMBED_BINS)
        for ch in range(3)
    ]).astype(np.float64) / (EMBED_SIZE * EMBED_SIZE)
    return grid, hist


def embed_clip(clip: np.ndarray) -> np.ndarray:
    """Deterministic 112-d appearance vector for a widget clip.

    The clip is resized to 64x64 by nearest neighbour; the vector is an
    8x8 grid of mean luminance followed by 16-bin histograms of R, G and B.
    Each part is mean-centred and the whole vector unit-normalised. Clips of
    a single colour keep the un-centred vector so hue still separates them.
    """
    validate_image(clip)
    grid, hist = _raw_features(clip)
    if (clip == clip[0, 0]).all():
        vec = np.concatenate([grid, hist])
    else:
        vec = np.concatenate([grid - grid.mean(), hist - hist.mean()])
    return vec / np.linalg.norm(vec)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ContractError(f"vector length mismatch: {a.shape} vs {b.shape}")
    denom = float(np.linalg.norm(a)) * float(np.linalg.norm(b))
    if denom == 0.0:
        return 0.0
    return float(min(1.0, max(-1.0, float(np.dot(a, b)) / denom)))


# id -> (weakref, digest) for read-only arrays that own their pixels and so cannot change
_frozen_digests: dict[int, tuple[weakref.ref, str]] = {}


def image_digest(img: np.ndarray) -> str:
    """SHA-256 over ``"{width}x{height}:"`` followed by the raw RGB bytes.

    Digests of read-only arrays owning their data are remembered for the life of the array.
    """
    validate_image(img)
    frozen = not img.flags.writeable and img.base is None
    if frozen:
        hit = _frozen_digests.get(id(img))
        if hit is not None and hit[0]() is img:
            return hit[1]
    h = hashlib.sha256(f"{img.shape[1]}x{img.shape[0]}:".encode())
    h.update(np.ascontiguousarray(img).tobytes())
    digest = h.hexdigest()
    if frozen:
        key = id(img)
        _frozen_digests[key] = (weakref.ref(img, lambda _, k=key: _frozen_digests.pop(k, None)), digest)
    return digest


def encode_png(img: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(validate_image(img), "RGB").save(buf, format="PNG", compress_level=6)
    return buf.getvalue()


def decode_png(data: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(data)) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def read_png(path: str | Path) -> np.ndarray:
    return decode_png(Path(path).read_bytes())


def write_png(img: np.ndarray, path: str | Path) -> Path:
    path = Path(path)
    path.write_bytes(encode_png(img))
    return path
