from __future__ import annotations

import csv
import io
import math
import sys
from pathlib import Path
from typing import Any, Iterable, Literal, Mapping, Optional, Sequence, TextIO, Union

from .bounds import BoundReport
from .error import OutputError
from .logger import logger

Format = Literal['csv', 'text']

REPORT_COLUMNS = (
    'check',
    'alpha',
    'r',
    'n',
    'beta',
    'p',
    's',
    'a',
    'b',
    'lower',
    'measured',
    'upper',
    'status',
    'passed',
    'margin_low',
    'margin_high',
    'notes',
)


def format_value(value: Any) -> str:
    """Floats at 17 significant digits, `inf`/`-inf`/`nan` literals, empty for None."""
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return format(value, '.17g')
    return str(value)


def report_row(report: BoundReport) -> dict[str, Any]:
    row = dict(report.params.to_record())
    row.update(
        check=report.check,
        lower=report.lower,
        measured=report.measured,
        upper=report.upper,
        status=report.status,
        passed=report.passed,
        margin_low=report.margin_low,
        margin_high=report.margin_high,
        notes=report.notes,
    )
    return row


class Reporter:
    """
    Writes ordered rows either as CSV with a fixed header or as structured text, one
    `key: value` block per row separated by blank lines.
    """

    def __init__(self, columns: Sequence[str], fmt: Format = 'csv') -> None:
        self.columns = tuple(columns)
        self.fmt = fmt

    def render(self, rows: Iterable[Mapping[str, Any]]) -> str:
        buffer = io.StringIO()
        self._emit(rows, buffer)
        return buffer.getvalue()

    def write(self, rows: Iterable[Mapping[str, Any]], target: Union[str, Path, TextIO, None] = None) -> None:
        """
        Writes the rows to a path, to an open stream, or to stdout when `target` is None.

        Raises:
            OutputError: If the path cannot be written.
        """
        if target is None:
            self._emit(rows, sys.stdout)
            return
        if not isinstance(target, (str, Path)):
            self._emit(rows, target)
            return
        path = Path(target)
        try:
            with path.open('w', newline='', encoding='utf-8') as stream:
                self._emit(rows, stream)
        except OSError as e:
            raise OutputError(f'cannot write {path}: {e.strerror or e}', path=str(path))
        logger.info(f'report written to {path}')

    def _emit(self, rows: Iterable[Mapping[str, Any]], stream: TextIO) -> None:
        if self.fmt == 'csv':
            writer = csv.writer(stream, lineterminator='\n')
            writer.writerow(self.columns)
            for row in rows:
                writer.writerow([format_value(row.get(column)) for column in self.columns])
            return
        first = True
        for row in rows:
            if not first:
                stream.write('\n')
            first = False
            for column in self.columns:
                stream.write(f'{column}: {format_value(row.get(column))}\n')


def read_rows(path: Union[str, Path], columns: Optional[Sequence[str]] = None) -> list[dict[str, str]]:
    """Reads a CSV report back as string-valued rows."""
    with Path(path).open(newline='', encoding='utf-8') as stream:
        rows = list(csv.DictReader(stream))
    if columns is not None and rows and tuple(rows[0].keys()) != tuple(columns):
        raise OutputError(f'unexpected columns in {path}', path=str(path))
    return rows
