import hashlib

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from visreplay.errors import BoundsError, ConfigError, ContractError
from visreplay.imaging import (EMBED_DIM, Bbox, connected_components, cosine_similarity, crop,
                               decode_png, embed_clip, encode_png, gradient_binarize, image_digest,
                               min_area_for_dpi, to_grayscale)


def solid(h, w, rgb):
    img = np.zeros((h, w, 3), dtype=np.uint8)
    img[:] = rgb
    return img


def gradient_image(h=32, w=32):
    y, x = np.mgrid[0:h, 0:w]
    return np.stack([(x * 7) % 256, (y * 11) % 256, ((x + y) * 3) % 256], axis=-1).astype(np.uint8)


def union_find_regions(mask):
    """Reference labelling: union-find over 4-neighbour foreground pairs."""
    h, w = mask.shape
    parent = list(range(h * w))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for r in range(h):
        for c in range(w):
            if not mask[r, c]:
                continue
            for rr, cc in ((r + 1, c), (r, c + 1)):
                if rr < h and cc < w and mask[rr, cc]:
                    parent[find(rr * w + cc)] = find(r * w + c)
    groups = {}
    for r in range(h):
        for c in range(w):
            if mask[r, c]:
                groups.setdefault(find(r * w + c), set()).add((c, r))
    return list(groups.values())


# -- grayscale and binarization ---------------------------------------------------

def test_grayscale_extremes_and_red():
    assert (to_grayscale(solid(3, 4, (255, 255, 255))) == 255).all()
    assert (to_grayscale(solid(3, 4, (0, 0, 0))) == 0).all()
    assert to_grayscale(solid(1, 1, (255, 0, 0)))[0, 0] == 76


def test_grayscale_is_exact_for_every_color():
    v = np.arange(256, dtype=np.int64)
    r, g, b = np.meshgrid(v, v, v, indexing="ij")
    img = np.stack([r, g, b], -1).reshape(4096, 4096, 3).astype(np.uint8)
    # integer rounding with ties up, computed independently
    want = (r * 299 + g * 587 + b * 114 + 500) // 1000
    assert (to_grayscale(img) == want.reshape(4096, 4096)).all()


def test_grayscale_rejects_non_rgb():
    with pytest.raises(ContractError):
        to_grayscale(np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(ContractError):
        to_grayscale(np.zeros((4, 4, 3), dtype=np.float32))


def test_uniform_image_has_no_foreground():
    gray = np.full((6, 7), 128, dtype=np.uint8)
    for t in (1, 8, 255):
        assert not gradient_binarize(gray, t).any()


def test_step_edge_marks_both_sides_of_the_edge():
    gray = np.array([[0, 0, 255, 255]] * 4, dtype=np.uint8)
    expected = np.array([[0, 1, 1, 0]] * 4, dtype=bool)
    assert (gradient_binarize(gray, 10) == expected).all()


def test_checkerboard_is_all_foreground():
    gray = ((np.indices((8, 8)).sum(axis=0) % 2) * 255).astype(np.uint8)
    assert gradient_binarize(gray, 10).all()


@pytest.mark.parametrize("t", [0, 256, -3])
def test_threshold_out_of_range(t):
    with pytest.raises(ConfigError):
        gradient_binarize(np.zeros((3, 3), dtype=np.uint8), t)


def test_difference_equal_to_threshold_is_background():
    gray = np.array([[100, 110]], dtype=np.uint8)
    assert not gradient_binarize(gray, 10).any()
    assert gradient_binarize(gray, 9).all()


# -- connected components -----------------------------------------------------------

def test_components_examples():
    assert connected_components(np.zeros((5, 5), dtype=bool), 1) == []
    m = np.zeros((8, 8), dtype=bool)
    m[0:3, 0:3] = True
    m[5:8, 4:7] = True
    regions = connected_components(m, 1)
    assert [r.area for r in regions] == [9, 9]
    assert regions[0].bbox == Bbox(0, 0, 3, 3)
    small = np.zeros((4, 4), dtype=bool)
    small[1:3, 1:3] = True
    assert connected_components(small, 5) == []


def test_components_are_four_connected():
    m = np.array([[1, 0], [0, 1]], dtype=bool)
    assert len(connected_components(m, 1)) == 2


def test_components_order():
    m = np.zeros((10, 10), dtype=bool)
    m[4, 6] = True
    m[4, 1:3] = True
    m[0, 8] = True
    regions = connected_components(m, 1)
    assert [(r.bbox.top, r.bbox.left) for r in regions] == [(0, 8), (4, 1), (4, 6)]


def test_min_area_config():
    with pytest.raises(ConfigError):
        connected_components(np.ones((2, 2), dtype=bool), 0)
    assert min_area_for_dpi(160) == 25
    assert min_area_for_dpi(320) == 100
    assert min_area_for_dpi(1) == 1


@settings(max_examples=60, deadline=None)
@given(arrays(bool, (32, 32)), st.integers(1, 6))
def test_components_match_union_find(mask, min_area):
    ours = connected_components(mask, min_area)
    ref = [g for g in union_find_regions(mask) if len(g) >= min_area]
    assert len(ours) == len(ref)
    assert sorted(map(frozenset, (r.pixels() for r in ours)), key=sorted) == \
        sorted(map(frozenset, ref), key=sorted)
    for r in ours:
        assert r.area == len(r.pixels())
        xs = [p[0] for p in r.pixels()]
        ys = [p[1] for p in r.pixels()]
        assert r.bbox == Bbox(min(ys), min(xs), max(ys) + 1, max(xs) + 1)


@settings(max_examples=40, deadline=None)
@given(arrays(bool, (20, 20)), st.integers(1, 5))
def test_components_partition_foreground(mask, min_area):
    regions = connected_components(mask, min_area)
    kept = [r.pixels() for r in regions]
    union = set().union(*kept) if kept else set()
    assert sum(len(k) for k in kept) == len(union)
    dropped = {(int(c), int(r)) for r, c in zip(*np.nonzero(mask))} - union
    for g in union_find_regions(mask):
        assert g <= dropped or g <= union


# -- crop ---------------------------------------------------------------------------

def test_crop_identity_and_pixel():
    img = gradient_image()
    assert (crop(img, Bbox(0, 0, 32, 32)) == img).all()
    assert (crop(img, Bbox(0, 0, 1, 1))[0, 0] == img[0, 0]).all()


def test_crop_interior_matches_frozen_raster():
    clip = crop(gradient_image(), Bbox(5, 9, 15, 19))
    assert clip.shape == (10, 10, 3)
    # digest of the same raster built with plain loops in a separate script
    assert hashlib.sha256(clip.tobytes()).hexdigest() == \
        "e69692c96d14368016dc4fd89568427c2b994d2b4c50ea4a9575c9a1a236adfb"


def test_crop_out_of_bounds():
    with pytest.raises(BoundsError):
        crop(gradient_image(), Bbox(0, 0, 33, 10))


def test_crop_copies_unless_view_requested():
    img = gradient_image()
    c = crop(img, Bbox(0, 0, 4, 4))
    c[:] = 0
    assert img[0, 1].any()
    v = crop(img, Bbox(0, 0, 4, 4), view=True)
    assert np.shares_memory(v, img)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_crop_composes(data):
    img = gradient_image()
    t = data.draw(st.integers(0, 30))
    l = data.draw(st.integers(0, 30))
    b = data.draw(st.integers(t + 1, 32))
    r = data.draw(st.integers(l + 1, 32))
    t2 = data.draw(st.integers(0, b - t - 1))
    l2 = data.draw(st.integers(0, r - l - 1))
    b2 = data.draw(st.integers(t2 + 1, b - t))
    r2 = data.draw(st.integers(l2 + 1, r - l))
    inner = crop(crop(img, Bbox(t, l, b, r)), Bbox(t2, l2, b2, r2))
    assert (inner == crop(img, Bbox(t + t2, l + l2, t + b2, l + r2))).all()


def test_bbox_invariants():
    with pytest.raises(ContractError):
        Bbox(5, 0, 5, 3)
    with pytest.raises(ContractError):
        Bbox(-1, 0, 2, 3)
    a, b = Bbox(0, 0, 10, 10), Bbox(5, 5, 15, 15)
    assert a.iou(b) == pytest.approx(25 / 175)
    assert a.intersection(Bbox(10, 10, 12, 12)) is None


# -- embedding and cosine ---------------------------------------------------------

def test_embedding_is_deterministic_and_unit():
    clip = gradient_image(17, 23)
    a, b = embed_clip(clip), embed_clip(clip)
    assert a.tobytes() == b.tobytes()
    assert a.shape == (EMBED_DIM,)
    assert abs(np.linalg.norm(a) - 1) < 1e-6


def test_red_vs_blue_matches_hand_computation():
    red, blue = embed_clip(solid(9, 9, (255, 0, 0))), embed_clip(solid(9, 9, (0, 0, 255)))
    # constant clips keep the raw vector: 64 luminance cells plus three one-hot histograms
    r, b = 76 / 255, 29 / 255
    expected = (64 * r * b + 1) / np.sqrt((64 * r * r + 3) * (64 * b * b + 3))
    assert cosine_similarity(red, blue) == pytest.approx(expected, abs=1e-12)
    assert cosine_similarity(red, blue) < 0.8


def test_upscaled_renderer_clips_stay_similar(snap_of):
    clips = []
    for page in ("shop_home", "settings_main", "mail_inbox"):
        _, snap = snap_of("D5", page)
        clips += [p.clip for p in snap.profiles if min(p.clip.shape[:2]) >= 4]
    clips = clips[:50]
    assert len(clips) == 50
    for c in clips:
        up = np.repeat(np.repeat(c, 2, axis=0), 2, axis=1)
        assert cosine_similarity(embed_clip(c), embed_clip(up)) >= 0.95


@settings(max_examples=30, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(2, 12), st.integers(2, 12), st.just(3))),
       st.integers(0, 8), st.integers(0, 8))
def test_embedding_ignores_surroundings(clip, dy, dx):
    h, w = clip.shape[:2]
    canvas = np.random.default_rng(dy * 9 + dx).integers(0, 256, (h + 16, w + 16, 3), dtype=np.uint8)
    canvas[dy:dy + h, dx:dx + w] = clip
    again = crop(canvas, Bbox(dy, dx, dy + h, dx + w))
    assert embed_clip(again).tobytes() == embed_clip(clip).tobytes()


def test_cosine_examples():
    v = np.arange(1, 6, dtype=float)
    assert cosine_similarity(v, v) == pytest.approx(1.0)
    e0, e1 = np.eye(5)[0], np.eye(5)[1]
    assert cosine_similarity(e0, e1) == 0.0
    assert cosine_similarity(e0, -e0) == -1.0
    with pytest.raises(ContractError):
        cosine_similarity(np.ones(3), np.ones(4))


@settings(max_examples=50)
@given(arrays(float, 8, elements=st.floats(-1e3, 1e3)), arrays(float, 8, elements=st.floats(-1e3, 1e3)))
def test_cosine_symmetric_and_bounded(a, b):
    s = cosine_similarity(a, b)
    assert s == cosine_similarity(b, a)
    assert -1.0 <= s <= 1.0


def test_png_round_trip_and_digest():
    img = gradient_image(5, 7)
    back = decode_png(encode_png(img))
    assert (back == img).all()
    assert image_digest(back) == image_digest(img)
    assert image_digest(img) != image_digest(img[:, :6].copy())


def test_digest_of_read_only_image_is_remembered_safely():
    img = gradient_image(5, 7)
    plain = hashlib.sha256(b"7x5:" + img.tobytes()).hexdigest()
    assert image_digest(img) == plain
    img[0, 0] = 1
    changed = image_digest(img)
    assert changed != plain
    img.flags.writeable = False
    assert image_digest(img) == image_digest(img) == changed
    # a read-only view of a writable buffer is never remembered
    buf = gradient_image(5, 7)
    view = buf[:]
    view.flags.writeable = False
    before = image_digest(view)
    buf[0, 0] = 1
    assert image_digest(view) != before
