"""MQTT 3.1.1 packet encoding and decoding.

Implements the fixed header (type + flags + variable-length remaining
length) and the packet subset used here.  Reference: the OASIS MQTT
3.1.1 wire format.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Optional, Union


class ProtocolError(Exception):
    pass


CONNECT = 1
CONNACK = 2
PUBLISH = 3
PUBACK = 4
SUBSCRIBE = 8
SUBACK = 9
UNSUBSCRIBE = 10
UNSUBACK = 11
PINGREQ = 12
PINGRESP = 13
DISCONNECT = 14

PROTOCOL_NAME = b"MQTT"
PROTOCOL_LEVEL = 4  # 3.1.1


@dataclass(frozen=True)
class Connect:
    client_id: str
    keepalive_s: int = 60
    clean_session: bool = True


@dataclass(frozen=True)
class ConnAck:
    session_present: bool = False
    return_code: int = 0  # 0 = accepted


@dataclass(frozen=True)
class Publish:
    topic: str
    payload: bytes
    qos: int = 0
    retain: bool = False
    dup: bool = False
    packet_id: Optional[int] = None  # required when qos > 0

    def __post_init__(self):
        if self.qos not in (0, 1):
            raise ProtocolError(f"unsupported qos {self.qos}")
        if self.qos > 0 and self.packet_id is None:
            raise ProtocolError("qos>0 publish requires a packet id")


@dataclass(frozen=True)
class PubAck:
    packet_id: int


@dataclass(frozen=True)
class Subscribe:
    packet_id: int
    topics: tuple[tuple[str, int], ...]  # (filter, requested qos)


@dataclass(frozen=True)
class SubAck:
    packet_id: int
    return_codes: tuple[int, ...] = field(default=(1,))


@dataclass(frozen=True)
class PingReq:
    pass


@dataclass(frozen=True)
class PingResp:
    pass


@dataclass(frozen=True)
class Disconnect:
    pass


Packet = Union[Connect, ConnAck, Publish, PubAck, Subscribe, SubAck, PingReq, PingResp, Disconnect]


def _utf8(text: str) -> bytes:
    raw = text.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ProtocolError("string too long")
    return struct.pack(">H", len(raw)) + raw


def _remaining_length(n: int) -> bytes:
    if n > 268_435_455:
        raise ProtocolError("packet too large")
    out = bytearray()
    while True:
        n, digit = divmod(n, 128)
        out.append(digit | (0x80 if n else 0))
        if not n:
            return bytes(out)


def encode(packet: Packet) -> bytes:
    if isinstance(packet, Connect):
        flags = 0x02 if packet.clean_session else 0x00
        body = (
            _utf8("MQTT")
            + bytes([PROTOCOL_LEVEL, flags])
            + struct.pack(">H", packet.keepalive_s)
            + _utf8(packet.client_id)
        )
        head = CONNECT << 4
    elif isinstance(packet, ConnAck):
        body = bytes([1 if packet.session_present else 0, packet.return_code])
        head = CONNACK << 4
    elif isinstance(packet, Publish):
        body = _utf8(packet.topic)
        if packet.qos > 0:
            body += struct.pack(">H", packet.packet_id)
        body += packet.payload
        head = (
            (PUBLISH << 4)
            | (0x08 if packet.dup else 0)
            | (packet.qos << 1)
            | (0x01 if packet.retain else 0)
        )
    elif isinstance(packet, PubAck):
        body = struct.pack(">H", packet.packet_id)
        head = PUBACK << 4
    elif isinstance(packet, Subscribe):
        body = struct.pack(">H", packet.packet_id)
        for topic, qos in packet.topics:
            body += _utf8(topic) + bytes([qos])
        head = (SUBSCRIBE << 4) | 0x02  # reserved flags per spec
    elif isinstance(packet, SubAck):
        body = struct.pack(">H", packet.packet_id) + bytes(packet.return_codes)
        head = SUBACK << 4
    elif isinstance(packet, PingReq):
        body = b""
        head = PINGREQ << 4
    elif isinstance(packet, PingResp):
        body = b""
        head = PINGRESP << 4
    elif isinstance(packet, Disconnect):
        body = b""
        head = DISCONNECT << 4
    else:
        raise ProtocolError(f"cannot encode {packet!r}")
    return bytes([head]) + _remaining_length(len(body)) + body


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ProtocolError("truncated packet body")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u16(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def utf8(self) -> str:
        return self.take(self.u16()).decode("utf-8")

    def rest(self) -> bytes:
        chunk = self.data[self.pos :]
        self.pos = len(self.data)
        return chunk

    @property
    def exhausted(self) -> bool:
        return self.pos >= len(self.data)


def _read_exact(stream: BinaryIO, n: int) -> bytes:
    chunks = b""
    while len(chunks) < n:
        chunk = stream.read(n - len(chunks))
        if not chunk:
            raise EOFError("connection closed")
        chunks += chunk
    return chunks


def read_packet(stream: BinaryIO) -> Packet:
    """Read one packet from a blocking byte stream.

    Raises EOFError on a cleanly closed connection and ProtocolError on
    malformed bytes.
    """
    head = _read_exact(stream, 1)[0]
    ptype = head >> 4
    flags = head & 0x0F

    remaining = 0
    for shift in range(0, 28, 7):
        digit = _read_exact(stream, 1)[0]
        remaining |= (digit & 0x7F) << shift
        if not digit & 0x80:
            break
    else:
        raise ProtocolError("remaining length overflow")

    cur = _Cursor(_read_exact(stream, remaining) if remaining else b"")

    if ptype == CONNECT:
        name = cur.utf8()
        level = cur.take(1)[0]
        if name != "MQTT" or level != PROTOCOL_LEVEL:
            raise ProtocolError(f"unsupported protocol {name!r} level {level}")
        connect_flags = cur.take(1)[0]
        keepalive = cur.u16()
        client_id = cur.utf8()
        return Connect(
            client_id=client_id,
            keepalive_s=keepalive,
            clean_session=bool(connect_flags & 0x02),
        )
    if ptype == CONNACK:
        session_present = bool(cur.take(1)[0] & 0x01)
        return ConnAck(session_present=session_present, return_code=cur.take(1)[0])
    if ptype == PUBLISH:
        qos = (flags >> 1) & 0x03
        if qos not in (0, 1):
            raise ProtocolError(f"unsupported publish qos {qos}")
        topic = cur.utf8()
        packet_id = cur.u16() if qos > 0 else None
        return Publish(
            topic=topic,
            payload=cur.rest(),
            qos=qos,
            retain=bool(flags & 0x01),
            dup=bool(flags & 0x08),
            packet_id=packet_id,
        )
    if ptype == PUBACK:
        return PubAck(packet_id=cur.u16())
    if ptype == SUBSCRIBE:
        packet_id = cur.u16()
        topics = []
        while not cur.exhausted:
            topics.append((cur.utf8(), cur.take(1)[0]))
        if not topics:
            raise ProtocolError("subscribe without topics")
        return Subscribe(packet_id=packet_id, topics=tuple(topics))
    if ptype == SUBACK:
        packet_id = cur.u16()
        return SubAck(packet_id=packet_id, return_codes=tuple(cur.rest()))
    if ptype == PINGREQ:
        return PingReq()
    if ptype == PINGRESP:
        return PingResp()
    if ptype == DISCONNECT:
        return Disconnect()
    raise ProtocolError(f"unsupported packet type {ptype}")


def topic_matches(pattern: str, topic: str) -> bool:
    """Topic-filter matching with + (one level) and # (rest) wildcards."""
    if pattern == topic:
        return True
    p_parts = pattern.split("/")
    t_parts = topic.split("/")
    for i, part in enumerate(p_parts):
        if part == "#":
            return True
        if i >= len(t_parts):
            return False
        if part != "+" and part != t_parts[i]:
            return False
    return len(p_parts) == len(t_parts)
