"""Store-and-forward routing: live publish, backlog, drain ordering."""

from datetime import datetime, timedelta, timezone

import pytest

from fieldpod.backlog import BacklogStore
from fieldpod.mqtt import StubBroker
from fieldpod.publisher import TelemetryPublisher, drain_backlog
from fieldpod.mqtt.client import MqttClient
from fieldpod.sensing import SensorKind, SensorReading
from fieldpod.telemetry import TelemetryRecord

TS = datetime(2021, 3, 1, tzinfo=timezone.utc)


def _reading(value, kind=SensorKind.TEMPERATURE, offset_s=0):
    return SensorReading(
        kind=kind, value=value, timestamp=TS + timedelta(seconds=offset_s), device_id="dev-1"
    )


def _record(seq, payload):
    return TelemetryRecord(seq=seq, topic="/usp/temp", payload=payload, timestamp=TS)


@pytest.fixture
def broker():
    b = StubBroker().start()
    yield b
    b.stop()


@pytest.fixture
def publisher_for(tmp_path):
    created = []

    def factory(broker):
        pub = TelemetryPublisher(
            broker_address=broker.address,
            device_id="dev-1",
            topic_prefix="/usp",
            store=BacklogStore(tmp_path),
            connect_timeout_s=0.5,
            ack_timeout_s=0.5,
        )
        created.append(pub)
        return pub

    yield factory
    for pub in created:
        pub.close()
        pub.store.close()


def test_live_publish_happy_path(broker, publisher_for):
    pub = publisher_for(broker)
    record = pub.submit(_reading(24.5))
    assert record.seq == 1
    assert broker.messages_on("/usp/temp") == [b"24.5"]
    assert pub.store.pending_count() == 0
    assert pub.delivered_seqs == {1}


def test_broker_down_routes_to_backlog(broker, publisher_for):
    broker.go_offline()
    pub = publisher_for(broker)
    pub.submit(_reading(24.5))
    pub.submit(_reading(25.0))
    assert pub.store.pending_count() == 2
    assert pub.delivered_seqs == set()


def test_drain_delivers_oldest_first_then_live(broker, publisher_for):
    broker.go_offline()
    pub = publisher_for(broker)
    pub.submit(_reading(1.0))
    pub.submit(_reading(2.0))
    broker.go_online()
    pub.submit(_reading(3.0))
    assert broker.messages_on("/usp/temp") == [b"1.0", b"2.0", b"3.0"]
    assert pub.store.pending_count() == 0
    assert pub.delivered_seqs == {1, 2, 3}


def test_drain_stops_at_first_transport_error(broker, publisher_for, tmp_path):
    store = BacklogStore(tmp_path / "drainer")
    for i in range(1, 6):
        store.append(_record(i, f"{i}.0".encode()))
    broker.drop_connection_after(2)
    client = MqttClient(broker.address, client_id="dev-1", ack_timeout_s=0.5)
    client.connect()
    delivered = drain_backlog(store, client)
    assert delivered == 2
    assert [r.seq for r in store.pending()] == [3, 4, 5]
    assert broker.messages_on("/usp/temp") == [b"1.0", b"2.0"]
    client.close()
    store.close()


def test_failed_drain_keeps_live_record_behind_backlog(broker, publisher_for):
    broker.go_offline()
    pub = publisher_for(broker)
    pub.submit(_reading(1.0))
    pub.submit(_reading(2.0))
    broker.go_online()
    broker.drop_connection_after(1)  # drain will stall after the first record
    pub.submit(_reading(3.0))
    # Order preserved: the new reading queued behind the unsent backlog.
    assert [r.payload for r in pub.store.pending()] == [b"2.0", b"3.0"]
    pub.submit(_reading(4.0))
    assert broker.messages_on("/usp/temp") == [b"1.0", b"2.0", b"3.0", b"4.0"]


def test_swallowed_ack_causes_duplicate_not_loss(broker, publisher_for):
    pub = publisher_for(broker)
    broker.swallow_acks(1)
    pub.submit(_reading(7.0))
    assert pub.store.pending_count() == 1  # treated as undelivered
    pub.submit(_reading(8.0))
    # At-least-once: 7.0 appears twice, nothing is missing.
    assert broker.messages_on("/usp/temp") == [b"7.0", b"7.0", b"8.0"]
    assert pub.store.pending_count() == 0


def test_seq_resumes_above_backlog_after_restart(broker, publisher_for, tmp_path):
    broker.go_offline()
    pub = publisher_for(broker)
    pub.submit(_reading(1.0))
    pub.submit(_reading(2.0))
    pub.close()
    pub.store.close()

    restarted = TelemetryPublisher(
        broker_address=broker.address,
        device_id="dev-1",
        topic_prefix="/usp",
        store=BacklogStore(tmp_path),
        connect_timeout_s=0.5,
        ack_timeout_s=0.5,
    )
    broker.go_online()
    record = restarted.submit(_reading(3.0))
    assert record.seq == 3
    assert broker.messages_on("/usp/temp") == [b"1.0", b"2.0", b"3.0"]
    restarted.close()
    restarted.store.close()


def test_status_published_retained_and_refreshed_on_reconnect(broker, publisher_for):
    pub = publisher_for(broker)
    pub.publish_status(True)
    assert broker.retained.get("/usp/status/pump") == b"on"
    broker.go_offline()
    pub.publish_status(False)  # broker down: remembered, not sent
    broker.go_online()
    assert pub.ensure_connected()
    assert broker.retained.get("/usp/status/pump") == b"off"
