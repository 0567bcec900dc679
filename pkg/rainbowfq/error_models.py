from pydantic import BaseModel, Field
from typing import Optional


class RainbowFqError(Exception):
    """
    Base exception for every error raised by the rainbowfq package.

    Subclasses set ``code`` (machine-readable identifier) and ``exit_code``
    (process exit status used by the CLI).
    """
    code = "error"
    exit_code = 2


class ErrorResponse(BaseModel):
    """
    Base error response model.

    Args:
        detail (str): Description of the error.
        code (Optional[str]): Optional error code identifier.
    """
    detail: str = Field(..., description="Description of the error.")
    code: Optional[str] = Field(None, description="Optional error code identifier.")


class ParseErrorResponse(ErrorResponse):
    """
    Parse error response model for malformed coloring files.

    Args:
        line (Optional[int]): 1-based line number of the offending input line.
    """
    line: Optional[int] = Field(None, description="1-based line number of the offending input line.")


def error_response(exc: RainbowFqError) -> ErrorResponse:
    """
    Build the machine-readable payload for an exception.

    Args:
        exc (RainbowFqError): The raised error.

    Returns:
        ErrorResponse: Payload carrying the message and error code.
    """
    line = getattr(exc, "line", None)
    if line is not None:
        return ParseErrorResponse(detail=str(exc), code=exc.code, line=line)
    return ErrorResponse(detail=str(exc), code=exc.code)
