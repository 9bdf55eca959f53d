"""Edits log: incremental namespace modifications, replayable over a checkpoint.

One operation per line, UTF-8, LF, space-separated:

    CREATE <path> <length> <tick>
    ACCESS <path> <tick>
    DELETE <path> <tick>

Ticks are strictly increasing within a log. Workload trace files use the
same line format, so trace replay and edits replay share this parser.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .errors import CorruptLogError, OutOfOrderEditError
from .namespace import HotStore

OP_CREATE = "CREATE"
OP_ACCESS = "ACCESS"
OP_DELETE = "DELETE"


@dataclass(frozen=True, slots=True)
class OpEvent:
    """One logged operation; ``length`` is meaningful for CREATE only."""

    op: str
    path: str
    tick: int
    length: int = 0

    def encode(self) -> str:
        if self.op == OP_CREATE:
            return f"{OP_CREATE} {self.path} {self.length} {self.tick}"
        return f"{self.op} {self.path} {self.tick}"


def parse_op_line(line: str) -> OpEvent:
    """Parse one log/trace line; raises ValueError with the reason."""
    tokens = line.split(" ")
    op = tokens[0]
    if op == OP_CREATE:
        if len(tokens) != 4:
            raise ValueError(f"CREATE takes path, length, tick: {line!r}")
        length = _parse_int(tokens[2], "length")
        tick = _parse_int(tokens[3], "tick")
        return OpEvent(OP_CREATE, tokens[1], tick, length)
    if op in (OP_ACCESS, OP_DELETE):
        if len(tokens) != 3:
            raise ValueError(f"{op} takes path, tick: {line!r}")
        tick = _parse_int(tokens[2], "tick")
        return OpEvent(op, tokens[1], tick)
    raise ValueError(f"unknown operation {op!r}")


def _parse_int(text: str, what: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ValueError(f"{what} is not an integer: {text!r}") from None
    if value < 0:
        raise ValueError(f"{what} is negative: {value}")
    return value


class EditsLog:
    """Append-only operation log backed by one file.

    Opening an existing log scans it once to recover the last tick, so the
    strictly-increasing append precondition survives process restarts.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.last_tick = -1
        self._writer = None
        if self.path.exists():
            for event in self.entries():
                self.last_tick = event.tick

    def append(self, event: OpEvent) -> None:
        if event.tick <= self.last_tick:
            raise OutOfOrderEditError(
                f"tick {event.tick} does not advance the log (last was {self.last_tick})"
            )
        if self._writer is None:
            self._writer = open(self.path, "a", encoding="utf-8", newline="\n")
        self._writer.write(event.encode() + "\n")
        self._writer.flush()
        self.last_tick = event.tick

    def entries(self) -> Iterator[OpEvent]:
        """Yield all logged events in order, validating as it goes."""
        if not self.path.exists():
            return
        last = -1
        with open(self.path, "r", encoding="utf-8", newline="\n") as f:
            for lineno, line in enumerate(f, start=1):
                try:
                    event = parse_op_line(line.rstrip("\n"))
                except ValueError as exc:
                    raise CorruptLogError(f"{self.path}: line {lineno}: {exc}") from None
                if event.tick <= last:
                    raise CorruptLogError(
                        f"{self.path}: line {lineno}: tick {event.tick} not increasing"
                    )
                last = event.tick
                yield event

    def reset(self) -> None:
        """Drop all entries, e.g. after a checkpoint made them redundant."""
        self.close()
        open(self.path, "w").close()
        self.last_tick = -1

    def close(self) -> None:
        if self._writer is not None:
            self._writer.close()
            self._writer = None


def replay_edits(base: HotStore, events: Iterable[OpEvent]) -> HotStore:
    """Apply logged events to ``base`` in place and return it.

    Replay is strict: an event that cannot apply (create of an existing
    path, access or delete of a missing one) means the log does not belong
    to this base image.
    """
    last = -1
    for i, event in enumerate(events, start=1):
        if event.tick <= last:
            raise CorruptLogError(f"entry {i}: tick {event.tick} not increasing")
        last = event.tick
        try:
            if event.op == OP_CREATE:
                base.create(event.path, event.length, event.tick)
            elif event.op == OP_ACCESS:
                base.access(event.path, event.tick)
            elif event.op == OP_DELETE:
                base.remove(event.path)
            else:
                raise CorruptLogError(f"entry {i}: unknown operation {event.op!r}")
        except CorruptLogError:
            raise
        except Exception as exc:
            raise CorruptLogError(f"entry {i}: {event.op} {event.path}: {exc}") from exc
    return base
