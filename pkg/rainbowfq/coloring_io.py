"""
Text format for colorings of F_q^2:

    field p=<p> k=<k> [modulus=<c0,...,ck>]
    colors <count>
    <point-index> <color-id>      (q^2 lines, every index in [0, q^2) exactly once)

Decimal ASCII with LF line endings; ``#`` comment lines may appear before the data.
"""
import logging
from typing import Optional, TextIO

import numpy as np

from .coloring import Coloring
from .error_models import RainbowFqError
from .field import FieldSpec, format_header, parse_header

logger = logging.getLogger(__name__)


class ColoringFormatError(RainbowFqError):
    """
    Base exception for unreadable coloring files.
    """
    code = "format_error"


class ColoringParseError(ColoringFormatError):
    code = "parse_error"

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class CoverageError(ColoringFormatError):
    code = "coverage_error"


class FieldMismatch(ColoringFormatError):
    code = "field_mismatch"


def save_coloring(c: Coloring, sink: TextIO) -> None:
    """Write a coloring of F_q^2 in the text format."""
    if c.field is None:
        raise ColoringFormatError("only colorings of F_q^2 can be saved")
    sink.write(format_header(c.field) + "\n")
    sink.write(f"colors {c.class_count}\n")
    sink.writelines(f"{idx} {color}\n" for idx, color in enumerate(c.assignment.tolist()))


def load_coloring(source: TextIO, expected_field: Optional[FieldSpec] = None) -> Coloring:
    """
    Read a coloring in the text format.

    Args:
        source (TextIO): Open text stream.
        expected_field (Optional[FieldSpec]): Field the file must declare, if given.

    Raises:
        ColoringParseError: Malformed line (with its line number).
        CoverageError: Missing or duplicate point index.
        FieldMismatch: Header field differs from ``expected_field``.
        FieldError: Header describes an inadmissible field.
    """
    field: Optional[FieldSpec] = None
    declared: Optional[int] = None
    assignment = None
    seen = 0
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if field is None or declared is None:
            if not line or line.startswith("#"):
                continue
        elif not line:
            continue
        if field is None:
            try:
                field = parse_header(line)
            except ValueError as exc:
                raise ColoringParseError(str(exc), lineno)
            if expected_field is not None and field != expected_field:
                raise FieldMismatch(f"file declares {field!r}, expected {expected_field!r}")
            total = field.q ** 2
            assignment = np.full(total, -1, dtype=np.int64)
            continue
        if declared is None:
            parts = line.split()
            if len(parts) != 2 or parts[0] != "colors" or not parts[1].isdigit():
                raise ColoringParseError(f"expected 'colors <count>', got {line!r}", lineno)
            declared = int(parts[1])
            continue
        parts = line.split()
        if len(parts) != 2 or not parts[0].isdigit() or not parts[1].isdigit():
            raise ColoringParseError(f"expected '<point-index> <color-id>', got {line!r}", lineno)
        idx, color = int(parts[0]), int(parts[1])
        if idx >= total:
            raise ColoringParseError(f"point index {idx} outside [0, {total})", lineno)
        if assignment[idx] != -1:
            raise CoverageError(f"point index {idx} appears twice (line {lineno})")
        assignment[idx] = color
        seen += 1

    if field is None or declared is None:
        raise ColoringParseError("missing field header or colors line")
    if seen != total:
        missing = int(np.argmax(assignment == -1))
        raise CoverageError(f"{total - seen} point indices missing, first {missing}")
    coloring = Coloring(assignment, field)
    if coloring.class_count != declared:
        raise ColoringParseError(f"header declares {declared} colors, data has {coloring.class_count}")
    logger.info(f"Loaded coloring of F_{field.q}^2 with {declared} colors")
    return coloring
