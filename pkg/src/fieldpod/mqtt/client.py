"""Blocking MQTT 3.1.1 client with QoS-1 publish.

One background reader thread dispatches inbound packets: PUBACK completes
the pending publish, PUBLISH goes to the message callback (acked when
QoS 1), PINGRESP refreshes liveness.  Any transport failure marks the
session dead; the owner reconnects by constructing a fresh session.
"""

from __future__ import annotations

import socket
import threading
from typing import Callable, Optional

from ..errors import TransportError
from . import codec


def parse_address(address: str) -> tuple[str, int]:
    host, _, port = address.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"broker address must be host:port, got {address!r}")
    return host, int(port)


class MqttClient:
    """One TCP session to a broker; not reusable after failure."""

    def __init__(
        self,
        address: str,
        client_id: str,
        keepalive_s: int = 60,
        connect_timeout_s: float = 2.0,
        ack_timeout_s: float = 2.0,
        on_message: Optional[Callable[[str, bytes], None]] = None,
    ):
        self.address = address
        self.client_id = client_id
        self.keepalive_s = keepalive_s
        self.connect_timeout_s = connect_timeout_s
        self.ack_timeout_s = ack_timeout_s
        self.on_message = on_message
        self._sock: Optional[socket.socket] = None
        self._stream = None
        self._send_lock = threading.Lock()
        self._packet_id = 0
        self._pending: dict[int, threading.Event] = {}
        self._pending_lock = threading.Lock()
        self._connected = False
        self._reader: Optional[threading.Thread] = None

    @property
    def connected(self) -> bool:
        return self._connected

    def connect(self) -> None:
        host, port = parse_address(self.address)
        try:
            sock = socket.create_connection((host, port), timeout=self.connect_timeout_s)
        except OSError as exc:
            raise TransportError(f"cannot connect to broker {self.address}: {exc}") from exc
        sock.settimeout(self.connect_timeout_s)
        stream = sock.makefile("rb")
        try:
            sock.sendall(
                codec.encode(codec.Connect(client_id=self.client_id, keepalive_s=self.keepalive_s))
            )
            ack = codec.read_packet(stream)
        except (OSError, EOFError, codec.ProtocolError) as exc:
            sock.close()
            raise TransportError(f"broker handshake failed: {exc}") from exc
        if not isinstance(ack, codec.ConnAck) or ack.return_code != 0:
            sock.close()
            raise TransportError(f"broker refused connection: {ack!r}")
        sock.settimeout(None)
        self._sock = sock
        self._stream = stream
        self._connected = True
        self._reader = threading.Thread(
            target=self._read_loop, name=f"mqtt-reader-{self.client_id}", daemon=True
        )
        self._reader.start()

    def _read_loop(self) -> None:
        try:
            while True:
                packet = codec.read_packet(self._stream)
                if isinstance(packet, codec.PubAck):
                    with self._pending_lock:
                        event = self._pending.pop(packet.packet_id, None)
                    if event:
                        event.set()
                elif isinstance(packet, codec.Publish):
                    if packet.qos == 1:
                        self._send(codec.PubAck(packet_id=packet.packet_id))
                    if self.on_message:
                        try:
                            self.on_message(packet.topic, packet.payload)
                        except Exception:  # noqa: BLE001 - callback must not kill the reader
                            pass
                # SubAck/PingResp need no action; waits are event-free here.
        except (OSError, EOFError, codec.ProtocolError, ValueError):
            pass
        finally:
            self._fail_pending()
            self._connected = False

    def _fail_pending(self) -> None:
        with self._pending_lock:
            pending = list(self._pending.values())
            self._pending.clear()
        for event in pending:
            event.set()  # waiters wake and see the session is dead

    def _send(self, packet: codec.Packet) -> None:
        if not self._connected or self._sock is None:
            raise TransportError("not connected")
        data = codec.encode(packet)
        try:
            with self._send_lock:
                self._sock.sendall(data)
        except OSError as exc:
            self._connected = False
            raise TransportError(f"send failed: {exc}") from exc

    def _next_packet_id(self) -> int:
        self._packet_id = self._packet_id % 0xFFFF + 1
        return self._packet_id

    def publish(self, topic: str, payload: bytes, qos: int = 1, retain: bool = False) -> None:
        """Publish and, for QoS 1, block until the broker acks.

        Raises TransportError if the session drops or the ack times out;
        the caller must treat the message as undelivered (it may still
        have reached the broker - at-least-once allows the duplicate).
        """
        if qos == 0:
            self._send(codec.Publish(topic=topic, payload=payload, qos=0, retain=retain))
            return
        packet_id = self._next_packet_id()
        event = threading.Event()
        with self._pending_lock:
            self._pending[packet_id] = event
        try:
            self._send(
                codec.Publish(
                    topic=topic, payload=payload, qos=1, retain=retain, packet_id=packet_id
                )
            )
        except TransportError:
            with self._pending_lock:
                self._pending.pop(packet_id, None)
            raise
        if not event.wait(self.ack_timeout_s) or not self._connected:
            with self._pending_lock:
                self._pending.pop(packet_id, None)
            raise TransportError(f"no ack for publish to {topic} (seq id {packet_id})")

    def subscribe(self, topic_filter: str, qos: int = 1) -> None:
        self._send(
            codec.Subscribe(packet_id=self._next_packet_id(), topics=((topic_filter, qos),))
        )

    def ping(self) -> None:
        self._send(codec.PingReq())

    def close(self) -> None:
        if self._sock is not None:
            try:
                if self._connected:
                    self._send(codec.Disconnect())
            except TransportError:
                pass
            self._connected = False
            try:
                self._sock.close()
            except OSError:
                pass
