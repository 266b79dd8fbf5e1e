"""Store-and-forward telemetry publishing.

Readings become sequenced records and go to the broker at QoS 1; any
transport failure routes the record into the durable backlog instead.
On reconnect the backlog drains oldest-first, and a drain must complete
before new live readings are published, which keeps per-topic order for
everything that ever touched the backlog.
"""

from __future__ import annotations

import logging
from typing import Callable, Optional

from .backlog import BacklogStore
from .errors import TransportError
from .mqtt.client import MqttClient
from .sensing import SensorReading
from .telemetry import TelemetryRecord, command_topic, record_for, status_topic

log = logging.getLogger(__name__)


def publish_record(client: MqttClient, record: TelemetryRecord) -> None:
    """At-least-once publish; raises TransportError when undelivered."""
    client.publish(record.topic, record.payload, qos=1)


def drain_backlog(
    store: BacklogStore,
    client: MqttClient,
    on_delivered: Optional[Callable[[TelemetryRecord], None]] = None,
) -> int:
    """Publish backlogged records oldest-first, stopping at the first
    transport error.  Delivered records are acked durably; the rest stay
    queued.  Returns the delivered count."""
    delivered = 0
    last_seq = None
    try:
        for record in store.pending():
            publish_record(client, record)
            delivered += 1
            last_seq = record.seq
            if on_delivered:
                on_delivered(record)
    except TransportError:
        pass
    if last_seq is not None:
        store.ack(last_seq)
    return delivered


class TelemetryPublisher:
    """Owns the broker session, the seq counter, and the backlog routing."""

    def __init__(
        self,
        broker_address: str,
        device_id: str,
        topic_prefix: str,
        store: BacklogStore,
        on_message: Optional[Callable[[str, bytes], None]] = None,
        connect_timeout_s: float = 2.0,
        ack_timeout_s: float = 2.0,
    ):
        self.broker_address = broker_address
        self.device_id = device_id
        self.topic_prefix = topic_prefix
        self.store = store
        self.on_message = on_message
        self.connect_timeout_s = connect_timeout_s
        self.ack_timeout_s = ack_timeout_s
        self._client: Optional[MqttClient] = None
        self._seq = store.last_seq
        self.generated = 0
        self.delivered_seqs: set[int] = set()
        self.on_record: Optional[Callable[[TelemetryRecord], None]] = None
        self._last_status: Optional[bytes] = None

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    @property
    def connected(self) -> bool:
        return self._client is not None and self._client.connected

    def ensure_connected(self) -> bool:
        """Connect (or reconnect) if needed; resubscribes the command topic
        and refreshes the retained status on every fresh session."""
        if self.connected:
            return True
        if self._client is not None:
            self._client.close()
            self._client = None
        client = MqttClient(
            self.broker_address,
            client_id=self.device_id,
            connect_timeout_s=self.connect_timeout_s,
            ack_timeout_s=self.ack_timeout_s,
            on_message=self.on_message,
        )
        try:
            client.connect()
            client.subscribe(command_topic(self.topic_prefix), qos=1)
        except TransportError:
            client.close()
            return False
        self._client = client
        if self._last_status is not None:
            self._publish_status_now(self._last_status)
        return True

    def submit(self, reading: SensorReading) -> TelemetryRecord:
        """Sequence a validated reading and deliver or backlog it."""
        record = record_for(reading, seq=self._next_seq(), prefix=self.topic_prefix)
        self.generated += 1
        if self.on_record:
            self.on_record(record)
        if not self.ensure_connected():
            self.store.append(record)
            return record
        if self.store.pending_count():
            drained = drain_backlog(self.store, self._client, self._on_drained)
            if self.store.pending_count():
                # Drain aborted mid-way: keep order by queueing behind it.
                log.debug("drain stalled after %d records; backlogging seq %d", drained, record.seq)
                self.store.append(record)
                return record
        try:
            publish_record(self._client, record)
            self.delivered_seqs.add(record.seq)
        except TransportError:
            self.store.append(record)
        return record

    def _on_drained(self, record: TelemetryRecord) -> None:
        self.delivered_seqs.add(record.seq)

    def drain(self) -> int:
        if not self.ensure_connected():
            return 0
        return drain_backlog(self.store, self._client, self._on_drained)

    def publish_status(self, pump_on: bool) -> None:
        """Retained actuator status; best effort, refreshed on reconnect."""
        payload = b"on" if pump_on else b"off"
        self._last_status = payload
        if self.ensure_connected():
            self._publish_status_now(payload)

    def _publish_status_now(self, payload: bytes) -> None:
        try:
            self._client.publish(status_topic(self.topic_prefix), payload, qos=1, retain=True)
        except TransportError:
            pass

    def close(self) -> None:
        if self._client is not None:
            self._client.close()
            self._client = None
