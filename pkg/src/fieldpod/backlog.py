"""Compressed offline telemetry backlog with crash-safe recovery.

File format (`telemetry.backlog`): a sequence of framed batches, each

    4 bytes big-endian  uncompressed length
    4 bytes big-endian  compressed length
    raw-DEFLATE payload of newline-separated records
                        `seq,iso8601,topic,payload`

Appends are flushed and fsynced before returning, so a record whose
append returned survives any crash.  A truncated or undecodable final
frame is a torn tail: it is discarded with a warning and the file is
trimmed back to the last good frame.  The delivery watermark lives in a
sidecar (`telemetry.backlog.ack`) holding the highest acked seq.
"""

from __future__ import annotations

import logging
import os
import struct
import threading
import zlib
from datetime import datetime
from pathlib import Path

from .errors import StorageError
from .telemetry import TelemetryRecord

log = logging.getLogger(__name__)

_HEADER = struct.Struct(">II")


def encode_frame(records: list[TelemetryRecord]) -> bytes:
    lines = []
    for r in records:
        lines.append(f"{r.seq},{r.timestamp.isoformat()},{r.topic},{r.payload.decode('latin-1')}")
    raw = "\n".join(lines).encode("utf-8")
    compressor = zlib.compressobj(wbits=-zlib.MAX_WBITS)
    deflated = compressor.compress(raw) + compressor.flush()
    return _HEADER.pack(len(raw), len(deflated)) + deflated


def _parse_line(line: str) -> TelemetryRecord:
    seq_s, iso, topic, payload = line.split(",", 3)
    return TelemetryRecord(
        seq=int(seq_s),
        topic=topic,
        payload=payload.encode("latin-1"),
        timestamp=datetime.fromisoformat(iso),
    )


def decode_frames(data: bytes) -> tuple[list[TelemetryRecord], int, bool]:
    """Decode every whole frame; returns (records, good_length, torn).

    `good_length` is the byte offset after the last intact frame; `torn`
    reports whether trailing bytes had to be discarded.
    """
    records: list[TelemetryRecord] = []
    pos = 0
    while pos < len(data):
        if pos + _HEADER.size > len(data):
            return records, pos, True
        raw_len, comp_len = _HEADER.unpack_from(data, pos)
        end = pos + _HEADER.size + comp_len
        if end > len(data):
            return records, pos, True
        try:
            decompressor = zlib.decompressobj(wbits=-zlib.MAX_WBITS)
            raw = decompressor.decompress(data[pos + _HEADER.size : end])
            raw += decompressor.flush()
            if len(raw) != raw_len:
                raise ValueError(f"frame length mismatch: {len(raw)} != {raw_len}")
            frame_records = [_parse_line(line) for line in raw.decode("utf-8").split("\n")]
        except (zlib.error, ValueError, UnicodeDecodeError):
            return records, pos, True
        records.extend(frame_records)
        pos = end
    return records, pos, False


class BacklogStore:
    """Append-only store of undelivered telemetry records.

    Thread-safe for one appender and one drainer running concurrently.
    """

    FILENAME = "telemetry.backlog"
    ACK_FILENAME = "telemetry.backlog.ack"

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.path = self.data_dir / self.FILENAME
        self.ack_path = self.data_dir / self.ACK_FILENAME
        self._lock = threading.Lock()
        try:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            self._acked_seq = self._read_ack()
            records = self._recover()
        except OSError as exc:
            raise StorageError(f"cannot open backlog: {exc}") from exc
        self._records: list[TelemetryRecord] = [r for r in records if r.seq > self._acked_seq]
        self._last_seq = max(
            [self._acked_seq] + [r.seq for r in records], default=self._acked_seq
        )
        try:
            self._fh = open(self.path, "ab")
        except OSError as exc:
            raise StorageError(f"cannot open backlog for append: {exc}") from exc

    def _read_ack(self) -> int:
        if not self.ack_path.exists():
            return 0
        text = self.ack_path.read_text(encoding="ascii").strip()
        return int(text) if text else 0

    def _recover(self) -> list[TelemetryRecord]:
        if not self.path.exists():
            return []
        data = self.path.read_bytes()
        records, good_length, torn = decode_frames(data)
        if torn:
            log.warning(
                "backlog %s: discarding torn tail (%d bytes after offset %d)",
                self.path,
                len(data) - good_length,
                good_length,
            )
            with open(self.path, "r+b") as fh:
                fh.truncate(good_length)
                fh.flush()
                os.fsync(fh.fileno())
        return records

    @property
    def last_seq(self) -> int:
        """Highest seq this store has ever seen (appended or acked)."""
        with self._lock:
            return self._last_seq

    def pending_count(self) -> int:
        with self._lock:
            return len(self._records)

    def pending(self) -> list[TelemetryRecord]:
        """Unacked records, oldest first."""
        with self._lock:
            return list(self._records)

    def append(self, record: TelemetryRecord) -> None:
        """Durably append one record; returns only after fsync."""
        with self._lock:
            if record.seq <= self._last_seq:
                raise ValueError(
                    f"seq {record.seq} not greater than last stored seq {self._last_seq}"
                )
            frame = encode_frame([record])
            try:
                self._fh.write(frame)
                self._fh.flush()
                os.fsync(self._fh.fileno())
            except OSError as exc:
                raise StorageError(f"backlog append failed: {exc}") from exc
            self._records.append(record)
            self._last_seq = record.seq

    def ack(self, seq: int) -> None:
        """Durably mark every record with seq <= `seq` as delivered."""
        with self._lock:
            if seq <= self._acked_seq:
                return
            tmp = self.ack_path.with_suffix(".tmp")
            try:
                with open(tmp, "w", encoding="ascii") as fh:
                    fh.write(str(seq))
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(tmp, self.ack_path)
            except OSError as exc:
                raise StorageError(f"backlog ack failed: {exc}") from exc
            self._acked_seq = seq
            self._records = [r for r in self._records if r.seq > seq]
            if not self._records:
                self._compact()

    def _compact(self) -> None:
        # Everything on disk is acked; drop the file so it cannot regrow
        # without bound.  The watermark in the sidecar keeps seq monotone.
        try:
            self._fh.close()
            with open(self.path, "wb") as fh:
                fh.flush()
                os.fsync(fh.fileno())
            self._fh = open(self.path, "ab")
        except OSError as exc:
            raise StorageError(f"backlog compaction failed: {exc}") from exc

    def close(self) -> None:
        with self._lock:
            try:
                self._fh.close()
            except OSError:
                pass
