import os
import threading

import pytest

from proxgm_engine.sweep import HashableDict, SweepJournal, geom, igeom, sweep

def test_geom():
    assert geom(1, 1000, 4) == pytest.approx([1.0, 10.0, 100.0, 1000.0])
    assert igeom(1, 50, 4) == [1, 4, 14, 50]
    assert geom(2, 8, 1) == [2.0]
    assert geom(2, 8, 0) == []
    assert igeom(1, 1, 3) == [1]

def test_sweep_order():
    combs = sweep({"value": [0.5, 0.0], "seed": [3, 1, 2]})
    assert [(c["value"], c["seed"]) for c in combs] == [
        (0.5, 3), (0.5, 1), (0.5, 2), (0.0, 3), (0.0, 1), (0.0, 2)]
    assert sweep({"value": [], "seed": [1]}) == [{"seed": 1}]

def test_hashable_dict():
    a = HashableDict(value = 0.25, seed = 4)
    b = HashableDict(seed = 4, value = 0.25)
    assert hash(a) == hash(b)
    assert {a: 1}[b] == 1

def test_journal_resumes(tmp_path):
    d = str(tmp_path / "journal")
    journal = SweepJournal(d)
    assert len(journal) == 0
    key = HashableDict(value = 0.5, seed = 1)
    journal.done(key, [{"method": "dpgm", "accuracy": 1.0}])
    assert key in journal
    reopened = SweepJournal(d)
    assert len(reopened) == 1
    assert reopened.get(HashableDict(seed = 1, value = 0.5)) == [{"method": "dpgm", "accuracy": 1.0}]
    assert reopened.get(HashableDict(value = 0.5, seed = 2)) is None

def test_journal_drops_truncated_entry(tmp_path):
    d = str(tmp_path / "journal")
    journal = SweepJournal(d)
    journal.done(HashableDict(seed = 0), "first")
    journal.done(HashableDict(seed = 1), "second")
    path = os.path.join(d, "done")
    size = os.path.getsize(path)
    with open(path, "r+b") as f:
        f.truncate(size - 3)
    reopened = SweepJournal(d)
    assert len(reopened) == 1
    assert reopened.get(HashableDict(seed = 0)) == "first"
    reopened.done(HashableDict(seed = 1), "again")
    assert SweepJournal(d).get(HashableDict(seed = 1)) == "again"

def test_journal_threads(tmp_path):
    journal = SweepJournal(str(tmp_path / "journal"))

    def worker(k):
        for s in range(10):
            journal.done(HashableDict(worker = k, seed = s), s)
    threads = [threading.Thread(target = worker, args = (k,)) for k in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(SweepJournal(str(tmp_path / "journal"))) == 40
