"""
Standard error document printed by the CLI on failure.
"""
from pydantic import BaseModel
from typing import Optional


class ErrorReport(BaseModel):
    """Standard error report format."""
    error_code: str
    message: str
    run_id: Optional[str] = None
    exit_code: int = 1
    detail: Optional[str] = None  # Additional context if needed
