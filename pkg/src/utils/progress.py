"""
Progress tracking for batch jobs (encoding, training).
"""
import logging
import threading
import time
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)


class ProgressTracker:
    """
    Thread-safe progress counter for one job.

    Worker threads call ``advance`` as items finish; a log line is emitted
    each time progress crosses another ``log_every`` percent.
    """

    def __init__(self, job_id: str, total: int, log_every: int = 10):
        """
        Initialize a progress tracker for a specific job.

        Args:
            job_id: Name shown in log lines
            total: Number of items the job will process
            log_every: Percentage step between progress log lines
        """
        self.job_id = job_id
        self._lock = threading.RLock()
        self._data: Dict[str, Any] = {
            "job_id": job_id,
            "status": "running",
            "total": max(0, int(total)),
            "done": 0,
            "failed": 0,
            "start_time": time.time(),
            "end_time": None,
        }
        self._log_every = max(1, log_every)
        self._last_logged = 0

    @property
    def progress(self) -> int:
        """Completed percentage, 0-100."""
        with self._lock:
            total = self._data["total"]
            if total == 0:
                return 100
            return int(100 * (self._data["done"] + self._data["failed"]) / total)

    def advance(self, failed: bool = False, message: Optional[str] = None) -> Dict[str, Any]:
        """
        Record one finished item.

        Returns:
            Snapshot of the job information
        """
        with self._lock:
            self._data["failed" if failed else "done"] += 1
            if message:
                self._data["message"] = message
            percent = self.progress
            if percent >= self._last_logged + self._log_every or percent == 100:
                self._last_logged = percent - percent % self._log_every
                logger.info(
                    f"Job {self.job_id} progress: {percent}% "
                    f"({self._data['done']} ok, {self._data['failed']} failed of {self._data['total']})"
                )
            return dict(self._data)

    def finish(self) -> Dict[str, Any]:
        """Mark the job finished; the status reflects whether items failed."""
        with self._lock:
            if self._data["failed"] == 0:
                status = "complete"
            elif self._data["done"] > 0:
                status = "partial"
            else:
                status = "error"
            self._data["status"] = status
            self._data["end_time"] = time.time()
            elapsed = self._data["end_time"] - self._data["start_time"]
            logger.info(f"Job {self.job_id} {status} in {elapsed:.2f}s")
            return dict(self._data)
