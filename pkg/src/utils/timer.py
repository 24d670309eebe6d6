"""
Timer Utilities - Wall-clock timing of runs.

The runner wraps each mode in ``timed`` so the log shows how long the
theory integration or a simulation sweep took.
"""

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator, Optional

logger = logging.getLogger(__name__)


@dataclass
class Stopwatch:
    """
    A restartable stopwatch.

    Usage:
        watch = Stopwatch()
        watch.start()
        ...
        seconds = watch.stop()
    """
    label: str = ""

    # Internal state
    _started_at: Optional[float] = field(default=None, init=False)
    _elapsed: float = field(default=0.0, init=False)

    def start(self) -> None:
        """Start (or restart) timing."""
        self._started_at = time.perf_counter()
        self._elapsed = 0.0

    def stop(self) -> float:
        """
        Stop timing.

        Returns:
            Elapsed seconds since start
        """
        if self._started_at is not None:
            self._elapsed = time.perf_counter() - self._started_at
            self._started_at = None
        return self._elapsed

    @property
    def is_running(self) -> bool:
        return self._started_at is not None

    @property
    def elapsed(self) -> float:
        """Seconds so far (live while running)."""
        if self._started_at is not None:
            return time.perf_counter() - self._started_at
        return self._elapsed


@contextmanager
def timed(label: str) -> Iterator[Stopwatch]:
    """Time a block and log its duration at info level."""
    watch = Stopwatch(label)
    watch.start()
    try:
        yield watch
    finally:
        seconds = watch.stop()
        logger.info(f"{label} finished in {seconds:.2f}s")
