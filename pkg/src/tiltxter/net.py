"""Transport plumbing for the two-node deployment.

Each node runs one fixed-rate tick loop plus an independent message I/O
context.  The two sides communicate only through length-prefixed frames
over a byte stream; inside a node, the reader thread and the tick loop
share nothing but latest-value mailboxes (overwrite semantics), so a slow
tick never queues messages unboundedly -- stale data is simply replaced
and an overrun counter ticks up.

The local node can additionally open a JSON mirror: a WebSocket endpoint
that re-emits every wire message as a one-line JSON object and accepts
Command objects in the same shape.  That endpoint is the operator
console's whole interface.
"""

from __future__ import annotations

import json
import logging
import socket
import threading
import time
from dataclasses import dataclass, replace
from typing import Callable, Optional

from . import wire
from .core import FeedbackMode
from .nodes import (
    LocalNode,
    RemoteConfig,
    RemoteNode,
    TICK_HZ,
)
from .simulate import ContactParams

log = logging.getLogger(__name__)

TICK_NS = round(1_000_000_000 / TICK_HZ)
HEARTBEAT_TICKS = TICK_HZ  # one per second


class Mailbox:
    """Single-slot, thread-safe, latest-wins message cell."""

    def __init__(self):
        self._lock = threading.Lock()
        self._value = None
        self.overwritten = 0

    def put(self, value) -> None:
        with self._lock:
            if self._value is not None:
                self.overwritten += 1
            self._value = value

    def take(self):
        with self._lock:
            value, self._value = self._value, None
            return value


class FrameStream:
    """Socket wrapper speaking the length-prefixed frame protocol."""

    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._send_lock = threading.Lock()
        self._guard = wire.SequenceGuard()
        self.closed = threading.Event()

    def send(self, msg: wire.WireMessage) -> None:
        frame = wire.encode_msg(msg)
        try:
            with self._send_lock:
                self._sock.sendall(frame)
        except OSError:
            self.closed.set()

    def reader_loop(self, on_message: Callable[[wire.WireMessage], None]) -> None:
        """Blocking read loop; exits on close or protocol violation."""
        buffer = b""
        try:
            while not self.closed.is_set():
                chunk = self._sock.recv(65536)
                if not chunk:
                    break
                buffer += chunk
                while True:
                    try:
                        msg, used = wire.decode_prefix(buffer)
                    except wire.ProtocolError as exc:
                        if "truncated" in str(exc):
                            break  # wait for more bytes
                        raise
                    buffer = buffer[used:]
                    on_message(self._guard.check(msg))
        except wire.ProtocolError as exc:
            log.error("protocol error, closing link: %s", exc)
        except OSError:
            pass
        finally:
            self.closed.set()

    def close(self) -> None:
        self.closed.set()
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


class TickLoop:
    """Deadline-based fixed-rate scheduler with overrun accounting."""

    def __init__(self, hz: int = TICK_HZ):
        self.period_ns = round(1_000_000_000 / hz)
        self.overruns = 0

    def run(self, body: Callable[[int], None], stop: threading.Event,
            max_ticks: Optional[int] = None) -> int:
        tick = 0
        deadline = time.monotonic_ns() + self.period_ns
        while not stop.is_set() and (max_ticks is None or tick < max_ticks):
            body(tick)
            tick += 1
            now = time.monotonic_ns()
            if now > deadline:
                self.overruns += 1
                deadline = now + self.period_ns  # skip lost slots, never queue
            else:
                time.sleep((deadline - now) / 1e9)
                deadline += self.period_ns
        return tick


def _parse_addr(addr: str) -> tuple[str, int]:
    host, _, port = addr.rpartition(":")
    return host or "127.0.0.1", int(port)


class MirrorServer:
    """WebSocket JSON mirror: broadcasts node traffic, accepts commands."""

    def __init__(self, addr: str, on_command: Callable[[wire.Command], None]):
        from websockets.sync.server import serve

        self._clients: set = set()
        self._lock = threading.Lock()
        self._on_command = on_command
        host, port = _parse_addr(addr)
        self._server = serve(self._handle, host, port)
        self._thread = threading.Thread(target=self._server.serve_forever,
                                        name="mirror", daemon=True)
        self._thread.start()
        self.address = self._server.socket.getsockname()

    def _handle(self, connection) -> None:
        with self._lock:
            self._clients.add(connection)
        try:
            for text in connection:
                try:
                    self._on_command(wire.command_from_json(text))
                except wire.ProtocolError as exc:
                    connection.send(json.dumps({"type": "error", "message": str(exc)}))
        except Exception:
            pass
        finally:
            with self._lock:
                self._clients.discard(connection)

    def broadcast(self, line: str) -> None:
        with self._lock:
            clients = list(self._clients)
        for client in clients:
            try:
                client.send(line)
            except Exception:
                with self._lock:
                    self._clients.discard(client)

    def broadcast_msg(self, msg: wire.WireMessage) -> None:
        self.broadcast(wire.to_json(msg))

    def close(self) -> None:
        self._server.shutdown()


class Readiness:
    """Lets a caller wait for a server thread to bind and learn its port."""

    def __init__(self):
        self._event = threading.Event()
        self.port: Optional[int] = None

    def set(self, port: int) -> None:
        self.port = port
        self._event.set()

    def wait(self, timeout: float = 10.0) -> int:
        if not self._event.wait(timeout):
            raise TimeoutError("server did not become ready")
        assert self.port is not None
        return self.port


@dataclass
class RemoteServerConfig:
    listen: str = "127.0.0.1:7340"
    seed: int = 0
    holder_tilt_deg: int = 0
    noise_sigma: Optional[float] = None


def serve_remote(cfg: RemoteServerConfig, stop: Optional[threading.Event] = None,
                 max_ticks: Optional[int] = None,
                 ready: Optional[Readiness] = None) -> None:
    """Run the remote node: accept one local-node link, stream sensor pairs."""
    stop = stop or threading.Event()
    host, port = _parse_addr(cfg.listen)
    listener = socket.create_server((host, port))
    listener.settimeout(1.0)
    log.info("remote node listening on %s:%d", *listener.getsockname()[:2])
    if ready is not None:
        ready.set(listener.getsockname()[1])
    try:
        while not stop.is_set():
            try:
                sock, peer = listener.accept()
            except socket.timeout:
                continue
            log.info("local node connected from %s", peer)
            _run_remote_session(sock, cfg, stop, max_ticks)
            if max_ticks is not None:
                break
    finally:
        listener.close()


def _run_remote_session(sock: socket.socket, cfg: RemoteServerConfig,
                        stop: threading.Event, max_ticks: Optional[int]) -> None:
    params = ContactParams()
    if cfg.noise_sigma is not None:
        params = replace(params, noise_sigma=cfg.noise_sigma)
    node = RemoteNode(RemoteConfig(holder_tilt_deg=cfg.holder_tilt_deg,
                                   seed=cfg.seed, params=params))
    stream = FrameStream(sock)
    commands = Mailbox()
    grasps = Mailbox()

    def on_message(msg: wire.WireMessage) -> None:
        if isinstance(msg, wire.Command):
            if msg.grasp:
                grasps.put(msg)
            else:
                commands.put(msg)

    reader = threading.Thread(target=stream.reader_loop, args=(on_message,),
                              name="remote-reader", daemon=True)
    reader.start()
    loop = TickLoop()

    def body(tick: int) -> None:
        t_us = time.monotonic_ns() // 1000
        grasp = grasps.take()
        if grasp is not None:
            node.apply_command(grasp)
            ack = node.judge_grasp(grasp, t_us)
            log.info("grasp judged: success=%s rel=%.2f deg", ack.success,
                     ack.relative_centideg / 100)
            stream.send(ack)
        pair = node.tick(commands.take(), t_us)
        stream.send(pair)
        if tick % HEARTBEAT_TICKS == 0:
            node.seq += 1
            stream.send(wire.Heartbeat(seq=node.seq, t_us=t_us))
        if stream.closed.is_set():
            stop.set()

    try:
        loop.run(body, stop, max_ticks)
    finally:
        stream.close()


@dataclass
class LocalServerConfig:
    connect: str = "127.0.0.1:7340"
    mode: FeedbackMode = FeedbackMode.DOWNSIZED
    checkpoint: Optional[str] = None
    mirror: Optional[str] = None


def serve_local(cfg: LocalServerConfig, stop: Optional[threading.Event] = None,
                max_ticks: Optional[int] = None,
                ready: Optional[Readiness] = None) -> LocalNode:
    """Run the local node: consume sensor pairs, publish electrode frames.

    Returns the node (with its latency statistics) once the loop ends.
    """
    stop = stop or threading.Event()
    model = None
    if cfg.checkpoint is not None:
        from .tiltnet.checkpoint import load_model

        model = load_model(cfg.checkpoint)
    node = LocalNode(cfg.mode, model)
    sock = socket.create_connection(_parse_addr(cfg.connect), timeout=10.0)
    sock.settimeout(None)
    stream = FrameStream(sock)
    sensors = Mailbox()
    mirror: Optional[MirrorServer] = None
    outbound_cmds = Mailbox()

    def on_message(msg: wire.WireMessage) -> None:
        if isinstance(msg, wire.SensorPair):
            sensors.put(msg)
        if mirror is not None:
            mirror.broadcast_msg(msg)

    if cfg.mirror is not None:
        mirror = MirrorServer(cfg.mirror, outbound_cmds.put)
        log.info("mirror listening on %s:%d", *mirror.address[:2])

    reader = threading.Thread(target=stream.reader_loop, args=(on_message,),
                              name="local-reader", daemon=True)
    reader.start()
    if ready is not None:
        ready.set(mirror.address[1] if mirror is not None else 0)
    loop = TickLoop()
    heartbeat_seq = 0

    def body(tick: int) -> None:
        nonlocal heartbeat_seq
        t_us = time.monotonic_ns() // 1000
        cmd = outbound_cmds.take()
        if cmd is not None:
            if cmd.mode != int(node.mode):
                node.mode = FeedbackMode(cmd.mode)
                log.info("feedback mode switched to %s", node.mode.name)
            stream.send(cmd)
        pair = sensors.take()
        if pair is not None:
            out = node.tick(pair, t_us)
            if mirror is not None:
                mirror.broadcast_msg(out)
        if tick % HEARTBEAT_TICKS == 0:
            heartbeat_seq += 1
            hb = wire.Heartbeat(seq=heartbeat_seq, t_us=t_us)
            stream.send(hb)
            if mirror is not None:
                mirror.broadcast_msg(hb)
                mirror.broadcast(json.dumps({
                    "type": "status",
                    "tick": tick,
                    "mode": int(node.mode),
                    "overruns": loop.overruns,
                    "dropped_pairs": sensors.overwritten,
                    "latency_ms": node.stats.summary().get("total", {}),
                }))
        if stream.closed.is_set():
            stop.set()

    try:
        loop.run(body, stop, max_ticks)
    finally:
        stream.close()
        if mirror is not None:
            mirror.close()
    return node
