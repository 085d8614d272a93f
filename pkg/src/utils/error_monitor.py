"""
Per-item failure ledger for batch commands.

Batch commands keep going when a single video fails; every failure is
tracked here and written to an errors.json report beside the command's
output so the caller can see which ids need attention.
"""
import logging
import threading
import traceback
from dataclasses import asdict, dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Union

from src.core.errors import TbenError
from src.utils.file_utils import write_json

logger = logging.getLogger(__name__)


class ErrorSeverity(Enum):
    """Error severity levels."""
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


@dataclass
class TrackedError:
    """One failed item."""

    item_id: str
    context: str
    type: str
    message: str
    severity: str
    timestamp: str
    traceback: str = ""


class ErrorMonitor:
    """
    Error tracking for one batch command run.
    """

    def __init__(self, context: str):
        """
        Initialize the error monitor.

        Args:
            context: Name of the command or stage being monitored
        """
        self.context = context
        self._errors: List[TrackedError] = []
        self._error_counts: Dict[str, int] = {}
        self._lock = threading.Lock()

    def track_error(
        self,
        item_id: str,
        error: Exception,
        severity: ErrorSeverity = ErrorSeverity.MEDIUM,
    ) -> None:
        """
        Track a failed item.

        Args:
            item_id: Id of the item that failed (a video id)
            error: The exception
            severity: Severity of the error
        """
        error_type = type(error).__name__
        # Library errors carry their own context; anything else gets a traceback.
        trace = "" if isinstance(error, TbenError) else traceback.format_exc()
        entry = TrackedError(
            item_id=item_id,
            context=self.context,
            type=error_type,
            message=str(error),
            severity=severity.value,
            timestamp=datetime.now().isoformat(),
            traceback=trace,
        )
        with self._lock:
            self._errors.append(entry)
            self._error_counts[error_type] = self._error_counts.get(error_type, 0) + 1
            count = self._error_counts[error_type]

        log_method = logger.critical if severity == ErrorSeverity.CRITICAL else logger.error
        log_method(f"Error in {self.context} for {item_id}: {error_type}: {error} (occurred {count} times)")

    @property
    def has_errors(self) -> bool:
        with self._lock:
            return bool(self._errors)

    @property
    def failed_ids(self) -> List[str]:
        """Sorted ids of failed items."""
        with self._lock:
            return sorted({e.item_id for e in self._errors})

    def get_error_summary(self) -> Dict[str, Any]:
        """
        Get a summary of tracked errors.

        Returns:
            Dictionary with counts per error type and the failed items
        """
        with self._lock:
            errors = sorted(self._errors, key=lambda e: (e.item_id, e.type))
            return {
                "context": self.context,
                "total_errors": len(errors),
                "error_counts": dict(sorted(self._error_counts.items())),
                "errors": [asdict(e) for e in errors],
            }

    def write_report(self, path: Union[str, Path]) -> Path:
        """Write the summary as JSON and return its path."""
        report_path = Path(path)
        write_json(report_path, self.get_error_summary())
        logger.info(f"Wrote error report for {self.context} to {report_path}")
        return report_path
