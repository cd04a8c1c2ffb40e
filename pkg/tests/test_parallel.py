import threading
from concurrent.futures import CancelledError

import pytest

from core.parallel import PairBatchRunner


def test_blocks_are_cut_from_item_order():
    runner = PairBatchRunner(jobs=3, block_size=4)
    assert runner.blocks(list(range(10))) == [[0, 1, 2, 3], [4, 5, 6, 7], [8, 9]]


@pytest.mark.parametrize("jobs", [1, 2, 5])
def test_results_come_back_in_block_order(jobs):
    runner = PairBatchRunner(jobs=jobs, block_size=3)
    out = runner.map_blocks(list(range(11)), lambda block: [x * x for x in block])
    assert [x for chunk in out for x in chunk] == [x * x for x in range(11)]
    assert runner.blocks_done == 4


def test_progress_callback_reports_every_block():
    seen = []
    runner = PairBatchRunner(jobs=2, block_size=2)
    runner.map_blocks(list(range(6)), len, on_progress=lambda done, total: seen.append(total))
    assert seen == [3, 3, 3]


def test_failing_progress_callback_does_not_stop_the_batch():
    def boom(done, total):
        raise RuntimeError("callback")

    runner = PairBatchRunner(jobs=1, block_size=1)
    assert runner.map_blocks([1, 2], sum, on_progress=boom) == [1, 2]


def test_worker_error_propagates():
    def fn(block):
        if 3 in block:
            raise ValueError("bad block")
        return block

    with pytest.raises(ValueError):
        PairBatchRunner(jobs=2, block_size=2).map_blocks(list(range(8)), fn)


def test_cancel_stops_remaining_blocks():
    runner = PairBatchRunner(jobs=1, block_size=1)
    started = threading.Event()

    def fn(block):
        started.set()
        runner.cancel()
        return block

    with pytest.raises(CancelledError):
        runner.map_blocks([1, 2, 3], fn)
    assert started.is_set()
    assert runner.blocks_done == 1


def test_empty_input_and_bad_arguments():
    assert PairBatchRunner().map_blocks([], len) == []
    with pytest.raises(ValueError):
        PairBatchRunner(jobs=0)
    with pytest.raises(ValueError):
        PairBatchRunner(block_size=0)
