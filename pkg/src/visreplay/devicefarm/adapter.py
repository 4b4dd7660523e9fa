"""Wire protocol for driving a device through its external interface only.

Every message is a frame: a 4-byte little-endian length followed by that
many bytes. Requests are UTF-8 JSON objects:

* ``{"op": "screenshot"}`` answers with the PNG bytes of the current screen;
* ``{"op": "execute", "action": {...}}`` answers ``{"ok": true}``;
* ``{"op": "close"}`` ends the session.

Failures are answered with ``{"ok": false, "error": "..."}``. The same
server loop runs on a socket (in-process loopback) or on the stdin/stdout
pipes of a child process started with ``python -m visreplay.devicefarm.adapter``.
"""

from __future__ import annotations

import argparse
import json
import os
import select
import socket
import struct
import subprocess
import sys
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ContractError, DeviceIOError, VisReplayError
from ..imaging import decode_png, encode_png
from .device import ConcreteAction
from .profiles import DeviceProfile

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
MAX_FRAME = 1 << 28
_HEADER = struct.Struct("<I")


def pack_frame(payload: bytes) -> bytes:
    if len(payload) > MAX_FRAME:
        raise DeviceIOError(f"frame of {len(payload)} bytes exceeds limit")
    return _HEADER.pack(len(payload)) + payload


class SocketTransport:
    def __init__(self, sock: socket.socket, timeout: float | None = 10.0):
        self.sock = sock
        self.sock.settimeout(timeout)

    def send(self, payload: bytes) -> None:
        try:
            self.sock.sendall(pack_frame(payload))
        except OSError as exc:
            raise DeviceIOError(f"send failed: {exc}") from exc

    def _read_exact(self, n: int) -> bytes:
        buf = bytearray()
        while len(buf) < n:
            try:
                chunk = self.sock.recv(min(n - len(buf), 1 << 20))
            except socket.timeout as exc:
                raise DeviceIOError("device did not answer before the deadline") from exc
            except OSError as exc:
                raise DeviceIOError(f"receive failed: {exc}") from exc
            if not chunk:
                raise DeviceIOError("connection closed mid-frame" if buf else "connection closed")
            buf += chunk
        return bytes(buf)

    def recv(self) -> bytes:
        (n,) = _HEADER.unpack(self._read_exact(4))
        if n > MAX_FRAME:
            raise DeviceIOError(f"announced frame of {n} bytes exceeds limit")
        return self._read_exact(n)

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass


class PipeTransport:
    """Client side of a child process speaking the protocol on stdin/stdout."""

    def __init__(self, proc: subprocess.Popen, timeout: float | None = 10.0):
        self.proc = proc
        self.timeout = timeout
        self._out = proc.stdout.fileno()

    def send(self, payload: bytes) -> None:
        try:
            self.proc.stdin.write(pack_frame(payload))
            self.proc.stdin.flush()
        except (OSError, ValueError) as exc:
            raise DeviceIOError(f"send failed: {exc}") from exc

    def _read_exact(self, n: int, deadline: float | None) -> bytes:
        buf = bytearray()
        while len(buf) < n:
            wait = None if deadline is None else max(0.0, deadline - time.monotonic())
            ready, _, _ = select.select([self._out], [], [], wait)
            if not ready:
                raise DeviceIOError("device did not answer before the deadline")
            chunk = os.read(self._out, min(n - len(buf), 1 << 20))
            if not chunk:
                raise DeviceIOError("device process closed its output")
            buf += chunk
        return bytes(buf)

    def recv(self) -> bytes:
        deadline = None if self.timeout is None else time.monotonic() + self.timeout
        (n,) = _HEADER.unpack(self._read_exact(4, deadline))
        if n > MAX_FRAME:
            raise DeviceIOError(f"announced frame of {n} bytes exceeds limit")
        return self._read_exact(n, deadline)

    def close(self) -> None:
        try:
            self.proc.stdin.close()
        except OSError:
            pass
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            self.proc.wait()


def handle_request(device, payload: bytes) -> tuple[bytes, bool]:
    """Server-side dispatch; returns ``(response, keep_going)``."""
    try:
        req = json.loads(payload.decode("utf-8"))
        op = req.get("op") if isinstance(req, dict) else None
        if op == "screenshot":
            return encode_png(device.screenshot()), True
        if op == "execute":
            device.execute(ConcreteAction.from_dict(req.get("action") or {}))
            return b'{"ok":true}', True
        if op == "close":
            return b'{"ok":true}', False
        raise ContractError(f"unknown op {op!r}")
    except (ValueError, VisReplayError) as exc:
        return json.dumps({"ok": False, "error": str(exc)}).encode("utf-8"), True


def serve(device, recv, send) -> None:
    """Answer requests until the peer closes or sends ``close``."""
    while True:
        try:
            payload = recv()
        except DeviceIOError:
            return
        response, keep = handle_request(device, payload)
        try:
            send(response)
        except DeviceIOError:
            return
        if not keep:
            return


class RemoteDevice:
    """Device handle that forwards screenshot/execute over the wire protocol."""

    def __init__(self, profile: DeviceProfile, transport, on_close=None):
        self.profile = profile
        self.transport = transport
        self._on_close = on_close

    @property
    def name(self) -> str:
        return self.profile.name

    def _call(self, req: dict) -> bytes:
        self.transport.send(json.dumps(req, sort_keys=True).encode("utf-8"))
        return self.transport.recv()

    def screenshot(self) -> np.ndarray:
        data = self._call({"op": "screenshot"})
        if not data.startswith(PNG_MAGIC):
            raise DeviceIOError(f"screenshot failed: {_error_text(data)}")
        try:
            return decode_png(data)
        except Exception as exc:  # PIL raises several unrelated types on bad data
            raise DeviceIOError(f"malformed PNG frame: {exc}") from exc

    def execute(self, action: ConcreteAction) -> None:
        data = self._call({"op": "execute", "action": action.to_dict()})
        try:
            reply = json.loads(data.decode("utf-8"))
        except ValueError as exc:
            raise DeviceIOError("malformed reply to execute") from exc
        if not (isinstance(reply, dict) and reply.get("ok") is True):
            raise DeviceIOError(f"execute failed: {_error_text(data)}")

    def close(self) -> None:
        try:
            self._call({"op": "close"})
        except DeviceIOError:
            pass
        self.transport.close()
        if self._on_close:
            self._on_close()


def _error_text(data: bytes) -> str:
    try:
        return str(json.loads(data.decode("utf-8")).get("error"))
    except (ValueError, AttributeError):
        return f"unexpected {len(data)}-byte reply"


@dataclass
class AdapterEndpoint:
    """Where an external device listens: a child-process command or a TCP address."""

    argv: list[str] | None = None
    address: tuple[str, int] | None = None
    timeout: float | None = 10.0
    env: dict[str, str] | None = field(default=None, repr=False)

    def __post_init__(self):
        if (self.argv is None) == (self.address is None):
            raise ContractError("endpoint needs exactly one of argv or address")


def external_device_session(endpoint: AdapterEndpoint, profile: DeviceProfile) -> RemoteDevice:
    if endpoint.argv is not None:
        try:
            proc = subprocess.Popen(endpoint.argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                    env=endpoint.env)
        except OSError as exc:
            raise DeviceIOError(f"cannot start device process: {exc}") from exc
        return RemoteDevice(profile, PipeTransport(proc, endpoint.timeout))
    try:
        sock = socket.create_connection(endpoint.address, timeout=endpoint.timeout)
    except OSError as exc:
        raise DeviceIOError(f"cannot reach device at {endpoint.address}: {exc}") from exc
    return RemoteDevice(profile, SocketTransport(sock, endpoint.timeout))


def loopback_session(device, timeout: float | None = 10.0) -> RemoteDevice:
    """Serve ``device`` on one end of a socket pair from a thread; return the client end."""
    server_sock, client_sock = socket.socketpair()
    server = SocketTransport(server_sock, None)
    thread = threading.Thread(target=serve, args=(device, server.recv, server.send), daemon=True)
    thread.start()

    def finish():
        thread.join(timeout=5)
        server.close()

    return RemoteDevice(device.profile, SocketTransport(client_sock, timeout), on_close=finish)


def _stdio_serve(device) -> None:
    inp, out = sys.stdin.buffer, sys.stdout.buffer

    def recv() -> bytes:
        head = inp.read(4)
        if len(head) < 4:
            raise DeviceIOError("closed")
        (n,) = _HEADER.unpack(head)
        body = inp.read(n)
        if len(body) < n:
            raise DeviceIOError("closed")
        return body

    def send(payload: bytes) -> None:
        out.write(pack_frame(payload))
        out.flush()

    serve(device, recv, send)


def main(argv: list[str] | None = None) -> int:
    from .device import SimulatedDevice
    from .pages import App
    from .profiles import get_profile

    ap = argparse.ArgumentParser(prog="python -m visreplay.devicefarm.adapter",
                                 description="Serve a simulated device on stdin/stdout.")
    ap.add_argument("--pages", required=True, help="directory of page JSON files")
    ap.add_argument("--profile", required=True)
    ap.add_argument("--page", default=None, help="start page id")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--fixture", default=None, help="write the text fixture here after each screenshot")
    args = ap.parse_args(argv)
    app = App.load(sorted(Path(args.pages).glob("*.json")))
    device = SimulatedDevice(app, get_profile(args.profile), args.page, rng_seed=args.seed)
    if args.fixture:
        shoot = device.screenshot

        def screenshot_and_dump():
            img = shoot()
            device.fixture.save(args.fixture)
            return img

        device.screenshot = screenshot_and_dump
    _stdio_serve(device)
    return 0


if __name__ == "__main__":
    sys.exit(main())
