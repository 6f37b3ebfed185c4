"""Append-only event log: the single source of truth for everything that
happened in a deployment.

One record per line:

    <sequence>\t<timestamp>\t<event-kind>\t<payload>

Sequence numbers are gapless from 1; records are immutable once written. The
payload column is the canonical encoding of ``{"actor": ..., "data": ...}``,
so the four-column line carries the full five-field record.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, Optional

from .codec import canonical_dumps, canonical_loads
from .errors import ParseError


@dataclass(frozen=True)
class EventRecord:
    sequence: int
    timestamp: int
    actor: str
    kind: str
    payload: dict

    def to_line(self) -> str:
        body = canonical_dumps({"actor": self.actor, "data": self.payload})
        return f"{self.sequence}\t{self.timestamp}\t{self.kind}\t{body}"

    @classmethod
    def from_line(cls, line: str, line_number: Optional[int] = None) -> "EventRecord":
        parts = line.rstrip("\n").split("\t", 3)
        if len(parts) != 4:
            raise ParseError(f"expected 4 tab-separated fields, got {len(parts)}", line_number)
        try:
            sequence = int(parts[0])
            timestamp = int(parts[1])
            body = canonical_loads(parts[3])
            return cls(
                sequence=sequence,
                timestamp=timestamp,
                actor=body["actor"],
                kind=parts[2],
                payload=body["data"],
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise ParseError(f"malformed event record: {exc}", line_number) from exc


class EventLog:
    """Thread-safe appender; optionally mirrors every record to a file."""

    def __init__(self, path: Optional[Path] = None):
        self._records: list[EventRecord] = []
        self._lock = threading.Lock()
        self._path = Path(path) if path else None
        self._file = self._path.open("a", encoding="utf-8") if self._path else None

    def append(self, timestamp: int, actor: str, kind: str, payload: dict) -> EventRecord:
        with self._lock:
            record = EventRecord(
                sequence=len(self._records) + 1,
                timestamp=timestamp,
                actor=actor,
                kind=kind,
                payload=payload,
            )
            self._records.append(record)
            if self._file:
                self._file.write(record.to_line() + "\n")
                self._file.flush()
            return record

    def records(self, since_sequence: int = 0) -> list[EventRecord]:
        with self._lock:
            return self._records[since_sequence:]

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    def close(self) -> None:
        if self._file:
            self._file.close()
            self._file = None


def read_log(lines: Iterable[str]) -> Iterator[EventRecord]:
    """Parse log lines, reporting the 1-based line number on any defect."""
    expected = 1
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        record = EventRecord.from_line(line, number)
        if record.sequence != expected:
            raise ParseError(
                f"sequence gap: expected {expected}, found {record.sequence}", number
            )
        expected += 1
        yield record


def read_log_file(path: Path) -> list[EventRecord]:
    with Path(path).open("r", encoding="utf-8") as handle:
        return list(read_log(handle))
