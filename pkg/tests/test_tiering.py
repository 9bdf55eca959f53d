"""Separation policy and the two-tier store facade.

The separation predicate is checked against an independent brute-force
oracle that evaluates keep <=> recent or (count > mean) with exact rational
arithmetic, so the integer cross-multiplication in the implementation is
never trusted with verifying itself.
"""

import random
from fractions import Fraction

import pytest

from tiermeta.coldstore import ColdStore
from tiermeta.errors import (
    ColdStoreWriteFailureError,
    EmptyStoreError,
    NotFoundError,
    PathExistsError,
)
from tiermeta.namespace import HotStore, MetadataRecord
from tiermeta.tiering import TieredStore, TieringConfig, partition_records


def oracle_partition(records, now, window):
    """Reference implementation: exact mean via Fraction, no shortcuts."""
    records = list(records)
    mean = Fraction(sum(r.count for r in records), len(records))
    kept, evicted = [], []
    for r in records:
        recent = (now - r.last_access) <= window
        above_mean = Fraction(r.count) > mean
        (kept if recent or above_mean else evicted).append(r)
    return kept, evicted


def plain_record(path, count, last_access):
    return MetadataRecord(
        path=path, length=0, block_size=1, replication=1, blocks=(),
        last_access=last_access, count=count,
    )


# Six-record worked example: now=100, W=20, counts sum 24 so mean is 4.0.
# r1 and r5 and r3 are recent; r6 is over the mean; r2 is neither; r4 sits
# exactly on the mean and the tie goes to eviction.
EXAMPLE = [
    plain_record("/r1", count=10, last_access=95),
    plain_record("/r2", count=1, last_access=10),
    plain_record("/r3", count=1, last_access=90),
    plain_record("/r4", count=4, last_access=50),
    plain_record("/r5", count=2, last_access=99),
    plain_record("/r6", count=6, last_access=30),
]


def test_worked_example():
    kept, evicted = partition_records(EXAMPLE, now=100, window=20)
    assert sorted(r.path for r in evicted) == ["/r2", "/r4"]
    assert sorted(r.path for r in kept) == ["/r1", "/r3", "/r5", "/r6"]


def test_worked_example_against_oracle():
    kept, evicted = oracle_partition(EXAMPLE, now=100, window=20)
    assert sorted(r.path for r in evicted) == ["/r2", "/r4"]
    assert sorted(r.path for r in kept) == ["/r1", "/r3", "/r5", "/r6"]


def test_tie_with_mean_is_evicted():
    # both records sit exactly on the mean and neither is recent
    records = [plain_record("/a", 4, 0), plain_record("/b", 4, 1)]
    kept, evicted = partition_records(records, now=100, window=10)
    assert kept == []
    assert len(evicted) == 2


def test_singleton_is_its_own_mean():
    record = plain_record("/only", 7, 0)
    kept, evicted = partition_records([record], now=100, window=10)
    assert (kept, evicted) == ([], [record])
    kept, evicted = partition_records([record], now=5, window=10)
    assert (kept, evicted) == ([record], [])


def test_all_recent_keeps_everything():
    records = [plain_record(f"/r{i}", 1, 90 + i) for i in range(5)]
    kept, evicted = partition_records(records, now=100, window=50)
    assert len(kept) == 5 and evicted == []


def test_empty_tier_has_no_mean():
    with pytest.raises(EmptyStoreError):
        partition_records([], now=0, window=0)


def test_partition_matches_oracle_on_random_instances():
    rng = random.Random(17)
    for case in range(200):
        n = rng.randrange(1, 400)
        now = rng.randrange(1, 10**6)
        window = rng.randrange(0, now)
        records = [
            plain_record(
                f"/p/{i}",
                count=rng.choice((1, 1, 1, rng.randrange(1, 50))),
                last_access=rng.randrange(0, now),
            )
            for i in range(n)
        ]
        kept, evicted = partition_records(records, now, window)
        oracle_kept, oracle_evicted = oracle_partition(records, now, window)
        assert [r.path for r in kept] == [r.path for r in oracle_kept]
        assert [r.path for r in evicted] == [r.path for r in oracle_evicted]
        # partition, not a copy or a filter
        assert len(kept) + len(evicted) == n
        assert {id(r) for r in kept} | {id(r) for r in evicted} == {id(r) for r in records}


def test_mean_uses_state_before_eviction():
    # counts 1 and 100: mean 50.5 keeps only the busy record; had the mean
    # been recomputed after evicting /idle it would still hold, so pin the
    # other direction too: three records where eviction shifts the mean.
    records = [plain_record("/idle", 1, 0), plain_record("/busy", 100, 0)]
    kept, evicted = partition_records(records, now=1000, window=10)
    assert [r.path for r in kept] == ["/busy"]
    assert [r.path for r in evicted] == ["/idle"]


# -- facade ------------------------------------------------------------------


def make_store(tmp_path, threshold=8, window=None, **kwargs):
    config = TieringConfig(threshold_records=threshold, recency_window=window, **kwargs)
    return TieredStore(ColdStore(tmp_path / "fsimage2"), config)


def test_window_defaults_to_three_quarters_of_threshold():
    config = TieringConfig(threshold_records=1_200_000)
    assert config.recency_window == 900_000
    assert TieringConfig(threshold_records=8, recency_window=2).recency_window == 2


def test_maybe_separate_fires_exactly_at_threshold(tmp_path):
    store = make_store(tmp_path, threshold=8, window=6)
    for i in range(7):
        store.create(f"/f{i}", 1)
    assert store.maybe_separate() is None
    store.create("/f7", 1)
    outcome = store.maybe_separate()
    assert outcome is not None
    assert outcome.hot_size_before == 8
    # window 6 of 8: creates at ticks 0..7, now=8, keep last_access >= 2
    assert outcome.evicted_count == 2
    assert sorted(outcome.evicted_paths) == ["/f0", "/f1"]
    assert len(store.hot) == 6
    assert sorted(store.cold.paths()) == ["/f0", "/f1"]
    assert outcome.freed_bytes_estimate == 2 * store.config.bytes_per_record
    store.close()


def test_promotion_round_trip(tmp_path):
    store = make_store(tmp_path, threshold=4, window=3)
    for i in range(4):
        store.create(f"/f{i}", 10)
    store.separate()
    assert "/f0" in store.cold and "/f0" not in store.hot
    before = store.stat("/f0")[0]
    record = store.open("/f0")  # promotes
    assert record.path == "/f0"
    assert record.count == before.count + 1  # the promoting access counts
    assert record.last_access == store.clock.now - 1
    assert "/f0" in store.hot and "/f0" not in store.cold
    assert store.metrics.cold_hits == 1
    assert store.metrics.promotions == 1
    store.close()


def test_stat_is_read_only(tmp_path):
    store = make_store(tmp_path, threshold=4, window=3)
    for i in range(4):
        store.create(f"/f{i}", 10)
    store.separate()
    clock_before = store.clock.now
    record, tier = store.stat("/f0")
    assert tier == "cold"
    assert record.count == 1
    assert "/f0" in store.cold  # no promotion
    record, tier = store.stat("/f3")
    assert tier == "hot"
    assert record.count == 1  # no bump
    assert store.clock.now == clock_before  # no tick
    with pytest.raises(NotFoundError):
        store.stat("/nope")
    store.close()


def test_create_collides_with_cold_records(tmp_path):
    store = make_store(tmp_path, threshold=4, window=3)
    for i in range(4):
        store.create(f"/f{i}", 10)
    store.separate()
    with pytest.raises(PathExistsError):
        store.create("/f0", 1)  # cold
    with pytest.raises(PathExistsError):
        store.create("/f3", 1)  # hot
    store.close()


def test_delete_reaches_both_tiers(tmp_path):
    store = make_store(tmp_path, threshold=4, window=3)
    for i in range(4):
        store.create(f"/f{i}", 10)
    store.separate()
    store.delete("/f0")  # cold
    store.delete("/f3")  # hot
    with pytest.raises(NotFoundError):
        store.delete("/f0")
    for path in ("/f0", "/f3"):
        with pytest.raises(NotFoundError):
            store.open(path)
    # deleted paths can be created again
    store.create("/f0", 1)
    store.close()


def test_separation_with_nothing_to_evict_warns(tmp_path, caplog):
    store = make_store(tmp_path, threshold=4, window=100)
    for i in range(4):
        store.create(f"/f{i}", 1)
    with caplog.at_level("WARNING"):
        outcome = store.separate()
    assert outcome.evicted_count == 0
    assert outcome.kept_count == 4
    assert len(store.hot) == 4
    assert any("evicted nothing" in m for m in caplog.messages)
    store.close()


def test_failed_spill_leaves_hot_tier_unchanged(tmp_path):
    store = make_store(tmp_path, threshold=4, window=3)
    for i in range(4):
        store.create(f"/f{i}", 10)

    def refuse(records):
        raise ColdStoreWriteFailureError("disk full")

    store.cold.append_records = refuse
    with pytest.raises(ColdStoreWriteFailureError):
        store.separate()
    assert len(store.hot) == 4
    assert len(store.cold) == 0
    assert store.metrics.events == []
    store.close()


def test_separate_on_empty_store_fails(tmp_path):
    store = make_store(tmp_path)
    with pytest.raises(EmptyStoreError):
        store.separate()
    with pytest.raises(EmptyStoreError):
        store.mean_count()
    store.close()


def test_mean_count(tmp_path):
    store = make_store(tmp_path, threshold=100)
    store.create("/a", 1)
    store.create("/b", 1)
    store.open("/a")
    store.open("/a")
    assert store.mean_count() == 2.0  # counts 3 and 1
    store.close()


class FlatReference:
    """Single-tier model: what the store would do with no separation at all."""

    def __init__(self):
        self.records: dict[str, list[int]] = {}  # path -> [count]

    def create(self, path):
        if path in self.records:
            return "exists"
        self.records[path] = [1]
        return "ok"

    def open(self, path):
        if path not in self.records:
            return "notfound"
        self.records[path][0] += 1
        return "ok"

    def delete(self, path):
        if path not in self.records:
            return "notfound"
        del self.records[path]
        return "ok"


def test_fuzz_against_flat_reference(tmp_path):
    """Random traces with forced separations behave like a flat namespace."""
    for seed in range(10):
        rng = random.Random(seed)
        store = TieredStore(
            ColdStore(tmp_path / f"c{seed}"),
            TieringConfig(threshold_records=30, recency_window=20),
        )
        ref = FlatReference()
        for _ in range(1000):
            path = f"/z/{rng.randrange(80):02d}"
            roll = rng.random()
            if roll < 0.45:
                expected = ref.create(path)
                try:
                    store.create(path, rng.randrange(1000))
                    got = "ok"
                except PathExistsError:
                    got = "exists"
                store.maybe_separate()
            elif roll < 0.85:
                expected = ref.open(path)
                try:
                    store.open(path)
                    got = "ok"
                except NotFoundError:
                    got = "notfound"
            else:
                expected = ref.delete(path)
                try:
                    store.delete(path)
                    got = "ok"
                except NotFoundError:
                    got = "notfound"
                store.maybe_separate()
            assert got == expected
            # tier disjointness and conservation after every step
            hot = set(store.hot.paths())
            cold = set(store.cold.paths())
            assert not hot & cold
            assert hot | cold == set(ref.records)
        assert store.metrics.events, "threshold 30 must force separations"
        # final per-record agreement, promotions included
        for path, (count,) in ref.records.items():
            record, _ = store.stat(path)
            assert record.count == count
        store.close()
