import json
import socket
import sys
import threading
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from visreplay.devicefarm.adapter import (AdapterEndpoint, RemoteDevice, SocketTransport,
                                          external_device_session, handle_request, loopback_session,
                                          pack_frame)
from visreplay.devicefarm.device import ConcreteAction, DeviceState, SimulatedDevice, apply_action, clamp_state
from visreplay.devicefarm.pages import AbstractPage, AbstractWidget, App, WidgetType
from visreplay.devicefarm.profiles import DeviceKind, Skin, get_profile, list_profiles, parse_profiles
from visreplay.devicefarm.render import get_layout, photo_margins, render, screenshot
from visreplay.errors import ConfigError, ContractError, DeviceIOError, PageNotFound
from visreplay.imaging import encode_png
from visreplay.replay import script_point


def state(name, page, **kw):
    return DeviceState(get_profile(name), page, **kw)


def scroll_by(prof, dy):
    """Finger drag that moves content up by ``dy`` pixels."""
    y0 = prof.height // 2 + dy // 2
    return ConcreteAction("ScrollV", prof.width // 2, y0, prof.width // 2, y0 - dy)


# -- profiles -----------------------------------------------------------------------

def test_builtin_profiles():
    profs = list_profiles()
    assert len(profs) == 8
    assert (get_profile("D5").width, get_profile("D5").height) == (480, 800)
    assert (get_profile("D1").width, get_profile("D1").height) == (2200, 2480)
    assert [p.platform_skin for p in profs] == [Skin.A] * 5 + [Skin.B] * 3
    assert [p.name for p in parse_profiles("D1, D5")] == ["D1", "D5"]
    with pytest.raises(ConfigError):
        get_profile("D9")
    with pytest.raises(ConfigError):
        replace(get_profile("D1"), width=0)


# -- render -------------------------------------------------------------------------

def first_row(app, profile):
    items = [n for n in get_layout(app.page("shop_category"), get_profile(profile)).nodes
             if n.wtype == "GridItem"]
    return sum(1 for n in items if n.box[0] == items[0].box[0])


def test_items_per_row_follow_floor_rule(app):
    # usable width = screen - 2 * 16 dp page pad - 2 * 12 dp card pad; tiles ask for 96 dp
    # D5 at 1.5 px/dp: (480 - 48 - 36) // 144 = 2
    # D4 at 2.625 px/dp: (1080 - 84 - 64) // 252 = 3
    # D1 at 2.625 px/dp: (2200 - 84 - 64) // 252 = 8
    assert [first_row(app, p) for p in ("D5", "D4", "D1")] == [2, 3, 8]


def test_short_content_clamps_offset(app):
    s = state("D4", "shop_category")
    assert get_layout(app.page("shop_category"), s.profile).max_offset() == 0
    far = clamp_state(app, replace(s, scroll_offset=900))
    assert far.scroll_offset == 0
    assert render(app, far).frame.tobytes() == render(app, s).frame.tobytes()
    assert apply_action(app, s, scroll_by(s.profile, 400)) == s


def test_render_is_deterministic(app):
    for name in ("D5", "D7"):
        s = state(name, "mail_inbox", scroll_offset=120, rng_seed=3)
        assert render(app, s).frame.tobytes() == render(app, s).frame.tobytes()
        assert screenshot(app, s).tobytes() == screenshot(app, s).tobytes()
    a = screenshot(app, state("D7", "mail_inbox", rng_seed=1))
    b = screenshot(app, state("D7", "mail_inbox", rng_seed=2))
    assert a.tobytes() != b.tobytes()


def test_unknown_page(app):
    with pytest.raises(PageNotFound):
        render(app, state("D5", "no_such_page"))
    with pytest.raises(PageNotFound):
        SimulatedDevice(app, get_profile("D5"), "no_such_page")


def test_ground_truth_inside_frame(app):
    page = app.page("travel_hotel")
    ids = {w.id for w in page.walk()}
    out = render(app, state("D3", "travel_hotel", scroll_offset=300))
    h, w = out.frame.shape[:2]
    assert out.ground_truth
    for g in out.ground_truth:
        assert 0 <= g.bbox.top < g.bbox.bottom <= h and 0 <= g.bbox.left < g.bbox.right <= w
        assert g.owner in ids or g.owner.startswith(page.id)


def test_volatile_region_changes_only_with_ad_phase(app):
    s = state("D4", "shop_home")
    a, b = render(app, s).frame, render(app, replace(s, ad_phase=1)).frame
    diff = np.argwhere((a != b).any(axis=-1))
    banner = get_layout(app.page("shop_home"), s.profile).find("sh_banner").box
    assert len(diff)
    assert diff[:, 0].min() >= banner[0] and diff[:, 0].max() < banner[2]


# -- actions --------------------------------------------------------------------------

def test_click_transition_resets_offset(app):
    dev = SimulatedDevice(app, get_profile("D5"), "shop_product")
    dev.state = replace(dev.state, scroll_offset=200)
    x, y = script_point(dev, "sp_add")
    dev.execute(ConcreteAction("Click", x, y))
    assert (dev.state.page, dev.state.scroll_offset, dev.state.h_offset) == ("shop_cart", 0, 0)


def test_scroll_is_clamped_at_overflow(app):
    s = state("D5", "shop_category")
    overflow = get_layout(app.page("shop_category"), s.profile).max_offset()
    assert overflow == 357
    after = apply_action(app, s, scroll_by(s.profile, 400))
    assert after.scroll_offset == overflow
    # at the margin another scroll is a fixed point
    again = apply_action(app, after, scroll_by(s.profile, 400))
    assert again == after
    assert render(app, again).frame.tobytes() == render(app, after).frame.tobytes()
    back = apply_action(app, after, scroll_by(s.profile, -700))
    assert back.scroll_offset == 0


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["shop_home", "mail_inbox", "settings_account", "news_article"]),
       st.lists(st.integers(-700, 700), max_size=6))
def test_scroll_offset_stays_in_range(app, page, moves):
    s = state("D5", page)
    top = get_layout(app.page(page), s.profile).max_offset()
    for dy in moves:
        s = apply_action(app, s, scroll_by(s.profile, dy))
        assert 0 <= s.scroll_offset <= top


def test_input_reaches_focused_field(app):
    dev = SimulatedDevice(app, get_profile("D4"), "mail_compose")
    x, y = script_point(dev, "mc_subject")
    dev.execute(ConcreteAction("Click", x, y))
    assert dev.state.focus == "mc_subject"
    dev.execute(ConcreteAction("Input", x, y, text="Lunch"))
    assert dev.state.input_value("mc_subject") == "Lunch"


def test_dead_space_and_off_screen_points(app):
    s = state("D4", "settings_about")
    assert apply_action(app, s, ConcreteAction("Click", 2, 2)) == s
    with pytest.raises(ContractError):
        apply_action(app, s, ConcreteAction("Click", 1080, 5))
    with pytest.raises(ContractError):
        ConcreteAction("ScrollV", 1, 1)
    with pytest.raises(ContractError):
        ConcreteAction("Pinch", 1, 1)


def test_pager_swipe_turns_one_pane(app):
    s = state("D5", "travel_gallery")
    w = s.profile.width
    turned = apply_action(app, s, ConcreteAction("SwipeH", w - 10, 400, 10, 400))
    assert turned.h_offset == w
    # a flick under an eighth of the pane leaves the pager in place
    assert apply_action(app, turned, ConcreteAction("SwipeH", 200, 400, 200 - w // 8 + 1, 400)) == turned
    assert apply_action(app, turned, ConcreteAction("SwipeH", 10, 400, w - 10, 400)).h_offset == 0


# -- screenshot -------------------------------------------------------------------------

def test_screenshot_sizes(app):
    virt = SimulatedDevice(app, get_profile("D5"))
    assert virt.screenshot().shape == (800, 480, 3)
    photo = SimulatedDevice(app, get_profile("D2"))
    assert photo.profile.kind is DeviceKind.PHOTO
    img = photo.screenshot()
    mx, my = photo_margins(photo.profile)
    assert img.shape == (1600 + 2 * my, 720 + 2 * mx, 3) and mx > 0 and my > 0
    assert photo.screenshot().tobytes() == img.tobytes()


# -- page documents -----------------------------------------------------------------------

def tiny_app():
    a = AbstractPage("a", widgets=(AbstractWidget("go", WidgetType.BUTTON, text="Go"),),
                     transitions={("go", "Click"): "b"})
    b = AbstractPage("b", widgets=(AbstractWidget("ok", WidgetType.LABEL, text="Done"),))
    return App([a, b])


def test_page_documents_round_trip(tmp_path, app):
    paths = app.save(tmp_path)
    back = App.load(paths)
    assert sorted(p.id for p in back) == sorted(p.id for p in app)
    for p in app:
        assert back.page(p.id).to_dict() == p.to_dict()
    s = state("D4", "shop_home")
    assert render(back, s).frame.tobytes() == render(app, s).frame.tobytes()


def test_page_validation(tmp_path):
    with pytest.raises(ConfigError):
        AbstractWidget("t", WidgetType.LABEL)
    with pytest.raises(ConfigError):
        AbstractWidget("i", WidgetType.ICON)
    with pytest.raises(ConfigError):
        AbstractPage("p", widgets=(AbstractWidget("x", WidgetType.LABEL, text="a"),
                                   AbstractWidget("x", WidgetType.LABEL, text="b")))
    a = tiny_app().page("a")
    with pytest.raises(ConfigError):
        App([a])
    doc = a.to_dict()
    del doc["id"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    with pytest.raises(ConfigError):
        App.load([bad])
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        App.load([bad])


# -- adapter --------------------------------------------------------------------------

class Canned:
    """Transport that answers every request with the same bytes."""

    def __init__(self, reply):
        self.reply = reply

    def send(self, payload):
        self.sent = payload

    def recv(self):
        return self.reply

    def close(self):
        pass


def test_loopback_matches_direct(app):
    direct = SimulatedDevice(app, get_profile("D5"), "shop_home")
    served = SimulatedDevice(app, get_profile("D5"), "shop_home")
    remote = loopback_session(served)
    try:
        assert remote.screenshot().tobytes() == direct.screenshot().tobytes()
        x, y = script_point(direct, "sh_c_fruit")
        for dev in (direct, remote):
            dev.execute(ConcreteAction("Click", x, y))
        assert served.state == direct.state
        assert remote.screenshot().tobytes() == direct.screenshot().tobytes()
    finally:
        remote.close()


def test_malformed_replies_raise_device_io_error():
    prof = get_profile("D5")
    for reply in (b"garbage", b"\x89PNG\r\n\x1a\nbroken", b'{"ok": false, "error": "boom"}'):
        with pytest.raises(DeviceIOError):
            RemoteDevice(prof, Canned(reply)).screenshot()
    for reply in (b"nope", b'{"ok": false, "error": "boom"}', b"[1]"):
        with pytest.raises(DeviceIOError):
            RemoteDevice(prof, Canned(reply)).execute(ConcreteAction("Click", 1, 1))
    assert RemoteDevice(prof, Canned(encode_png(np.zeros((4, 4, 3), np.uint8)))).screenshot().shape == (4, 4, 3)


def test_socket_timeout_and_oversized_frame():
    a, b = socket.socketpair()
    try:
        client = RemoteDevice(get_profile("D5"), SocketTransport(a, timeout=0.2))
        with pytest.raises(DeviceIOError):
            client.screenshot()
        b.sendall(b"\xff\xff\xff\x7f")
        with pytest.raises(DeviceIOError):
            SocketTransport(a, timeout=0.2).recv()
    finally:
        a.close()
        b.close()


def test_peer_closing_mid_frame():
    a, b = socket.socketpair()
    b.sendall(pack_frame(b"0123456789")[:7])
    b.close()
    with pytest.raises(DeviceIOError):
        SocketTransport(a, timeout=1).recv()
    a.close()


def test_server_rejects_bad_requests(app):
    dev = SimulatedDevice(app, get_profile("D5"))
    for payload in (b"\xff", b'{"op": "dance"}', b'{"op": "execute", "action": {"type": "Click"}}', b"[]"):
        reply, keep = handle_request(dev, payload)
        assert keep and json.loads(reply)["ok"] is False
    assert handle_request(dev, b'{"op": "close"}') == (b'{"ok":true}', False)


def test_child_process_session(tmp_path, app):
    app.save(tmp_path / "pages")
    argv = [sys.executable, "-m", "visreplay.devicefarm.adapter", "--pages", str(tmp_path / "pages"),
            "--profile", "D5", "--page", "shop_cart"]
    remote = external_device_session(AdapterEndpoint(argv=argv, timeout=30), get_profile("D5"))
    local = SimulatedDevice(app, get_profile("D5"), "shop_cart")
    try:
        assert remote.screenshot().tobytes() == local.screenshot().tobytes()
        x, y = script_point(local, "ct_checkout")
        remote.execute(ConcreteAction("Click", x, y))
        local.execute(ConcreteAction("Click", x, y))
        assert remote.screenshot().tobytes() == local.screenshot().tobytes()
    finally:
        remote.close()


def test_child_process_timeout():
    argv = [sys.executable, "-c", "import time; time.sleep(30)"]
    remote = external_device_session(AdapterEndpoint(argv=argv, timeout=0.3), get_profile("D5"))
    try:
        with pytest.raises(DeviceIOError):
            remote.screenshot()
    finally:
        remote.transport.proc.kill()
        remote.transport.close()


def test_endpoint_errors():
    with pytest.raises(ContractError):
        AdapterEndpoint()
    with pytest.raises(ContractError):
        AdapterEndpoint(argv=["x"], address=("127.0.0.1", 1))
    with pytest.raises(DeviceIOError):
        external_device_session(AdapterEndpoint(argv=["/nonexistent/device-binary"]), get_profile("D5"))
    srv = socket.socket()
    srv.bind(("127.0.0.1", 0))
    port = srv.getsockname()[1]
    srv.close()
    with pytest.raises(DeviceIOError):
        external_device_session(AdapterEndpoint(address=("127.0.0.1", port), timeout=1), get_profile("D5"))


def test_tcp_endpoint(app):
    from visreplay.devicefarm.adapter import serve

    dev = SimulatedDevice(app, get_profile("D5"), "settings_about")
    srv = socket.socket()
    srv.bind(("127.0.0.1", 0))
    srv.listen(1)

    def accept():
        conn, _ = srv.accept()
        t = SocketTransport(conn, None)
        serve(dev, t.recv, t.send)
        t.close()

    th = threading.Thread(target=accept, daemon=True)
    th.start()
    remote = external_device_session(AdapterEndpoint(address=srv.getsockname(), timeout=10), dev.profile)
    try:
        assert remote.screenshot().tobytes() == SimulatedDevice(app, dev.profile, "settings_about").screenshot().tobytes()
    finally:
        remote.close()
        th.join(5)
        srv.close()
