"""In-process scriptable MQTT broker for desk-scale runs and tests.

Speaks real MQTT 3.1.1 over TCP: CONNECT/CONNACK, PUBLISH QoS 0/1 with
PUBACK, SUBSCRIBE/SUBACK with + and # filters, retained messages, PING.
Fault scripting covers the outage shapes the device must survive:
going offline (listener closed, connections dropped), dropping a
connection after N accepted publishes, and swallowing acks so a client
sees a mid-flight failure for a message the broker actually logged.
"""

from __future__ import annotations

import socket
import struct
import threading
import time
from dataclasses import dataclass
from typing import Optional

from . import codec


@dataclass(frozen=True)
class PublishedMessage:
    topic: str
    payload: bytes
    client_id: str
    qos: int
    retain: bool


class _ClientConn:
    def __init__(self, sock: socket.socket, conn_id: int):
        self.sock = sock
        self.conn_id = conn_id
        self.client_id = ""
        self.filters: list[str] = []
        self.send_lock = threading.Lock()

    def send(self, packet: codec.Packet) -> None:
        with self.send_lock:
            self.sock.sendall(codec.encode(packet))

    def close(self, force: bool = False) -> None:
        if force:
            # RST instead of FIN so the port frees immediately for rebinding.
            try:
                self.sock.setsockopt(
                    socket.SOL_SOCKET, socket.SO_LINGER, struct.pack("ii", 1, 0)
                )
            except OSError:
                pass
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass


class StubBroker:
    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        self.host = host
        self.port = port
        self._listener: Optional[socket.socket] = None
        self._accept_thread: Optional[threading.Thread] = None
        self._conns: dict[int, _ClientConn] = {}
        self._next_conn_id = 0
        self._lock = threading.RLock()
        self._log_cond = threading.Condition(self._lock)
        self.published: list[PublishedMessage] = []
        self.retained: dict[str, bytes] = {}
        self._online = False
        # Fault script state, all guarded by _lock.
        self._drop_after: Optional[int] = None  # publishes still accepted before a drop
        self._swallow_acks: int = 0  # log but drop connection before the ack

    # -- lifecycle ---------------------------------------------------------

    @property
    def address(self) -> str:
        return f"{self.host}:{self.port}"

    def start(self) -> "StubBroker":
        self._bind()
        return self

    def _bind(self) -> None:
        listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        deadline = time.monotonic() + 2.0
        while True:
            try:
                listener.bind((self.host, self.port))
                break
            except OSError:
                # Dropped connections can hold the port for a moment.
                if time.monotonic() >= deadline:
                    raise
                time.sleep(0.02)
        listener.listen(16)
        self.port = listener.getsockname()[1]
        self._listener = listener
        self._online = True
        self._accept_thread = threading.Thread(
            target=self._accept_loop, args=(listener,), name="stub-broker-accept", daemon=True
        )
        self._accept_thread.start()

    def stop(self) -> None:
        self.go_offline()

    def go_offline(self) -> None:
        """Simulate an outage: refuse new connections, drop existing ones."""
        with self._lock:
            self._online = False
            listener, self._listener = self._listener, None
            accept_thread, self._accept_thread = self._accept_thread, None
            conns = list(self._conns.values())
            self._conns.clear()
        if listener is not None:
            try:
                # shutdown wakes a blocked accept() so close() frees the port
                listener.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            if accept_thread is not None and accept_thread is not threading.current_thread():
                accept_thread.join(timeout=1.0)
            try:
                listener.close()
            except OSError:
                pass
        for conn in conns:
            conn.close(force=True)

    def go_online(self) -> None:
        """End the outage, listening again on the same port."""
        with self._lock:
            if self._online:
                return
        self._bind()

    @property
    def online(self) -> bool:
        return self._online

    # -- fault scripting ----------------------------------------------------

    def drop_connection_after(self, publishes: int) -> None:
        """Accept this many more publishes, then drop the connection on the next."""
        with self._lock:
            self._drop_after = publishes

    def swallow_acks(self, count: int) -> None:
        """Log the next `count` publishes but drop before acking them."""
        with self._lock:
            self._swallow_acks = count

    # -- observation ---------------------------------------------------------

    def messages_on(self, topic: str) -> list[bytes]:
        with self._lock:
            return [m.payload for m in self.published if m.topic == topic]

    def wait_for_published(self, count: int, timeout: float = 5.0) -> bool:
        with self._log_cond:
            return self._log_cond.wait_for(lambda: len(self.published) >= count, timeout)

    def connection_count(self) -> int:
        with self._lock:
            return len(self._conns)

    # -- connection handling ---------------------------------------------------

    def _accept_loop(self, listener: socket.socket) -> None:
        while True:
            try:
                sock, _ = listener.accept()
            except OSError:
                return  # listener closed: outage or shutdown
            with self._lock:
                if not self._online:
                    sock.close()
                    continue
                conn = _ClientConn(sock, self._next_conn_id)
                self._next_conn_id += 1
                self._conns[conn.conn_id] = conn
            threading.Thread(
                target=self._serve, args=(conn,), name=f"stub-broker-conn-{conn.conn_id}", daemon=True
            ).start()

    def _drop(self, conn: _ClientConn) -> None:
        with self._lock:
            self._conns.pop(conn.conn_id, None)
        conn.close()

    def _serve(self, conn: _ClientConn) -> None:
        stream = conn.sock.makefile("rb")
        try:
            packet = codec.read_packet(stream)
            if not isinstance(packet, codec.Connect):
                return
            conn.client_id = packet.client_id
            conn.send(codec.ConnAck(session_present=False, return_code=0))
            while True:
                packet = codec.read_packet(stream)
                if isinstance(packet, codec.Publish):
                    if not self._handle_publish(conn, packet):
                        return
                elif isinstance(packet, codec.Subscribe):
                    self._handle_subscribe(conn, packet)
                elif isinstance(packet, codec.PingReq):
                    conn.send(codec.PingResp())
                elif isinstance(packet, codec.Disconnect):
                    return
        except (OSError, EOFError, codec.ProtocolError):
            return
        finally:
            self._drop(conn)

    def _handle_publish(self, conn: _ClientConn, packet: codec.Publish) -> bool:
        """Returns False when a scripted fault drops the connection."""
        with self._lock:
            if self._drop_after is not None:
                if self._drop_after <= 0:
                    self._drop_after = None
                    return False
                self._drop_after -= 1
            swallow = False
            if self._swallow_acks > 0:
                self._swallow_acks -= 1
                swallow = True
            self.published.append(
                PublishedMessage(
                    topic=packet.topic,
                    payload=packet.payload,
                    client_id=conn.client_id,
                    qos=packet.qos,
                    retain=packet.retain,
                )
            )
            if packet.retain:
                self.retained[packet.topic] = packet.payload
            self._log_cond.notify_all()
            subscribers = [
                c
                for c in self._conns.values()
                if c is not conn and any(codec.topic_matches(f, packet.topic) for f in c.filters)
            ]
        if swallow:
            return False
        for sub in subscribers:
            try:
                sub.send(codec.Publish(topic=packet.topic, payload=packet.payload, qos=0))
            except OSError:
                pass
        if packet.qos == 1:
            conn.send(codec.PubAck(packet_id=packet.packet_id))
        return True

    def _handle_subscribe(self, conn: _ClientConn, packet: codec.Subscribe) -> None:
        with self._lock:
            for topic_filter, _ in packet.topics:
                conn.filters.append(topic_filter)
            retained = [
                (topic, payload)
                for topic, payload in self.retained.items()
                if any(codec.topic_matches(f, topic) for f, _ in packet.topics)
            ]
        conn.send(
            codec.SubAck(
                packet_id=packet.packet_id,
                return_codes=tuple(min(q, 1) for _, q in packet.topics),
            )
        )
        for topic, payload in retained:
            try:
                conn.send(codec.Publish(topic=topic, payload=payload, qos=0, retain=True))
            except OSError:
                pass
