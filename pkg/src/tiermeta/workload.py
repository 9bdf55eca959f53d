"""Synthetic workload traces and their replay against a tiered store.

A trace is a plain text file of CREATE/ACCESS lines (the edits-log line
format): first every file is created, ticks 0..n_files-1, then access_ops
ACCESS lines follow. A configured fraction of the files is never accessed
again after creation; every remaining file is accessed at least once, with
the extra accesses drawn from a Zipf-like rank distribution so a few files
soak up most of the traffic.

Everything is driven by one ``random.Random(seed)``, so a spec maps to
exactly one trace, byte for byte.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass
from pathlib import Path

from .coldstore import ColdStore
from .editlog import OP_ACCESS, OP_CREATE, OP_DELETE, OpEvent, parse_op_line
from .errors import InvalidSpecError, MalformedTraceError, NotFoundError
from .metrics import ExperimentReport, build_report
from .tiering import TieredStore, TieringConfig

logger = logging.getLogger(__name__)

PATH_TEMPLATE = "/w/f{:07d}"
_PROGRESS_EVERY = 500_000


@dataclass(frozen=True, slots=True)
class WorkloadSpec:
    n_files: int
    access_ops: int
    untouched_fraction: float = 0.3
    access_skew: float = 1.0
    mean_file_length: int = 64 * 1024
    seed: int = 7

    def __post_init__(self) -> None:
        if self.n_files < 1:
            raise InvalidSpecError("n_files must be at least 1")
        if self.access_ops < 0:
            raise InvalidSpecError("access_ops must be non-negative")
        if not 0.0 <= self.untouched_fraction <= 1.0:
            raise InvalidSpecError("untouched_fraction must lie in [0, 1]")
        if self.access_skew < 0.0:
            raise InvalidSpecError("access_skew must be non-negative")
        if self.mean_file_length < 1:
            raise InvalidSpecError("mean_file_length must be positive")
        touched = self.n_files - self.untouched_count
        if self.access_ops > 0 and touched == 0:
            raise InvalidSpecError("access_ops > 0 but every file is untouched")
        if 0 < self.access_ops < touched:
            raise InvalidSpecError(
                f"access_ops={self.access_ops} cannot touch all "
                f"{touched} non-untouched files at least once"
            )

    @property
    def untouched_count(self) -> int:
        return round(self.n_files * self.untouched_fraction)


@dataclass(frozen=True, slots=True)
class TraceSummary:
    n_files: int
    access_ops: int
    untouched_count: int
    touched_count: int


def generate_trace(spec: WorkloadSpec, dest: str | Path) -> TraceSummary:
    """Write the trace for ``spec`` to ``dest``."""
    rng = random.Random(spec.seed)
    rate = 1.0 / spec.mean_file_length

    # Untouched files are an arbitrary subset, not the oldest ones, so the
    # access pattern is uncorrelated with creation order.
    indices = list(range(spec.n_files))
    rng.shuffle(indices)
    touched = indices[spec.untouched_count:]

    targets: list[int] = []
    if spec.access_ops > 0:
        # Rank weight (r+1)^-skew over the shuffled touched list, after one
        # guaranteed access per touched file.
        targets.extend(touched)
        extra = spec.access_ops - len(touched)
        if extra > 0:
            cum = list(itertools.accumulate(
                (r + 1) ** -spec.access_skew for r in range(len(touched))
            ))
            targets.extend(rng.choices(touched, cum_weights=cum, k=extra))
        rng.shuffle(targets)

    tick = 0
    with open(dest, "w", encoding="utf-8", newline="\n") as f:
        for i in range(spec.n_files):
            length = max(1, int(rng.expovariate(rate)))
            f.write(f"{OP_CREATE} {PATH_TEMPLATE.format(i)} {length} {tick}\n")
            tick += 1
        for i in targets:
            f.write(f"{OP_ACCESS} {PATH_TEMPLATE.format(i)} {tick}\n")
            tick += 1
    return TraceSummary(
        n_files=spec.n_files,
        access_ops=len(targets),
        untouched_count=spec.untouched_count,
        touched_count=len(touched),
    )


def replay(
    trace_path: str | Path,
    config: TieringConfig,
    cold_path: str | Path,
    config_echo: dict[str, object] | None = None,
) -> ExperimentReport:
    """Run a trace against a fresh tiered store and report what happened.

    The store lives only for the duration of the call; what remains is the
    cold file at ``cold_path`` (truncated first: a replay never inherits
    state) and the returned report. A separation check runs after every
    CREATE and DELETE, mirroring the live service. An ACCESS to a path in
    neither tier is counted as a miss and skipped.
    """
    open(cold_path, "wb").close()
    cold = ColdStore(cold_path)
    store = TieredStore(cold, config)
    applied = 0
    try:
        with open(trace_path, "r", encoding="utf-8", newline="\n") as f:
            for lineno, line in enumerate(f, start=1):
                try:
                    event = parse_op_line(line.rstrip("\n"))
                except ValueError as exc:
                    raise MalformedTraceError(
                        f"{trace_path}: line {lineno}: {exc}"
                    ) from None
                try:
                    store.apply_event(event)
                except NotFoundError:
                    logger.warning("%s: line %d: %s of unknown path %s",
                                   trace_path, lineno, event.op, event.path)
                if event.op in (OP_CREATE, OP_DELETE):
                    store.maybe_separate()
                applied += 1
                if applied % _PROGRESS_EVERY == 0:
                    logger.info("replayed %d events (hot %d, cold %d)",
                                applied, len(store.hot), len(store.cold))
        echo = dict(config_echo) if config_echo else {}
        echo.update(config.as_dict())
        echo["trace"] = str(trace_path)
        return build_report(
            store.metrics,
            config=echo,
            bytes_per_record=config.bytes_per_record,
            final_hot_records=len(store.hot),
            final_cold_records=len(store.cold),
        )
    finally:
        store.close()
