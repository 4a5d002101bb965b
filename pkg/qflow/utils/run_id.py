"""
Run ID logging context for correlation tracking.

Each CLI command runs inside ``run_context()``, which generates a unique run_id
(UUID) and stamps it on:
- Every log record emitted during the command
- The error document printed on failure
- The run metadata file
"""
from contextlib import contextmanager
from typing import Iterator, Optional
import logging
import uuid

logger = logging.getLogger(__name__)

_current_run_id: Optional[str] = None


def install_default_factory() -> None:
    """Make sure every record has a run_id field, 'startup' outside of a run."""
    base_factory = logging.getLogRecordFactory()
    if getattr(base_factory, "_qflow_default", False):
        return

    def default_record_factory(*args, **kwargs):
        record = base_factory(*args, **kwargs)
        if not hasattr(record, "run_id"):
            record.run_id = "startup"
        return record

    default_record_factory._qflow_default = True
    logging.setLogRecordFactory(default_record_factory)


@contextmanager
def run_context(run_id: Optional[str] = None) -> Iterator[str]:
    global _current_run_id
    run_id = run_id or str(uuid.uuid4())

    # Store the current factory BEFORE creating a new one to avoid recursion
    current_factory = logging.getLogRecordFactory()

    def record_factory_with_run_id(*args, **kwargs):
        record = current_factory(*args, **kwargs)
        record.run_id = run_id
        return record

    previous_run_id = _current_run_id
    _current_run_id = run_id
    logging.setLogRecordFactory(record_factory_with_run_id)
    try:
        yield run_id
    finally:
        logging.setLogRecordFactory(current_factory)
        _current_run_id = previous_run_id


def get_run_id() -> str:
    return _current_run_id or "startup"
