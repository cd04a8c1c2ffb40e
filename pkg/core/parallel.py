"""Runs pair blocks concurrently: fixed block composition, merge by block index."""
import threading
from concurrent.futures import CancelledError, ThreadPoolExecutor
from typing import Callable, Optional, Sequence

from utils.config import PAIR_BLOCK, PAIR_WORKERS
from utils.logger import get_logger

log = get_logger("kemenytool.parallel")


class PairBatchRunner:
    """Fan fixed-size blocks of work items out over a thread pool.

    Blocks are cut from the item order alone, never from the worker count,
    and results are reassembled by block index. Any per-block function that
    is deterministic therefore gives identical output for every *jobs*.
    """

    def __init__(self, jobs: int = PAIR_WORKERS, block_size: int = PAIR_BLOCK):
        if jobs < 1:
            raise ValueError("jobs must be >= 1")
        if block_size < 1:
            raise ValueError("block_size must be >= 1")
        self.jobs = jobs
        self.block_size = block_size
        self._cancel_event = threading.Event()
        self._lock = threading.Lock()
        self._done = 0

    def cancel(self) -> None:
        self._cancel_event.set()
        log.info("Cancel requested.")

    @property
    def blocks_done(self) -> int:
        with self._lock:
            return self._done

    def blocks(self, items: Sequence) -> list:
        return [items[i:i + self.block_size] for i in range(0, len(items), self.block_size)]

    def map_blocks(
        self,
        items: Sequence,
        fn: Callable,
        on_progress: Optional[Callable[[int, int], None]] = None,
    ) -> list:
        """Apply fn to each block of items; returns the per-block results in order."""
        self._cancel_event.clear()
        with self._lock:
            self._done = 0
        blocks = self.blocks(items)
        if not blocks:
            return []
        total = len(blocks)
        workers = min(self.jobs, total)
        log.debug("Processing %d items in %d blocks on %d worker(s)", len(items), total, workers)

        if workers == 1:
            return [self._run_block(block, fn, total, on_progress) for block in blocks]

        results: list = [None] * total
        with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="pairs") as executor:
            futures = [
                executor.submit(self._run_block, block, fn, total, on_progress)
                for block in blocks
            ]
            try:
                for index, future in enumerate(futures):
                    results[index] = future.result()
            except BaseException:
                self._cancel_event.set()
                for future in futures:
                    future.cancel()
                raise
        return results

    def _run_block(self, block, fn, total, on_progress):
        if self._cancel_event.is_set():
            raise CancelledError("pair batch cancelled")
        result = fn(block)
        with self._lock:
            self._done += 1
            done = self._done
        if on_progress:
            try:
                on_progress(done, total)
            except Exception:
                log.exception("Error in progress callback")
        return result
