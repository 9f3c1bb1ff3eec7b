"""
Suite report for the ratioblock acceptance checks
Collects per-check results and writes them as json, csv or text
"""

import csv
import io
import json
import os
from dataclasses import dataclass
from datetime import datetime
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from config import CSV_COLUMNS, REPORT_SCHEMA, SUITE_CONFIG
from core import RatioBlockError, encode_rational, rational_json


@dataclass
class CheckResult:
    """Outcome of a single check; runtime is kept out of the deterministic report."""
    name: str
    anchor: str
    kind: str
    computed: object
    expected: object
    tolerance: Optional[Fraction]
    passed: bool
    reason: Optional[str] = None
    witnesses: Tuple[str, ...] = ()
    runtime: float = 0.0

    def to_json(self) -> Dict:
        return {
            'name': self.name,
            'anchor': self.anchor,
            'kind': self.kind,
            'computed': _json_value(self.computed),
            'expected': _json_value(self.expected),
            'tolerance': _json_value(self.tolerance),
            'pass': self.passed,
            'reason': self.reason,
            'witnesses': list(self.witnesses),
        }


def _json_value(value):
    if value is None or isinstance(value, bool):
        return value
    return rational_json(value)


def _text_value(value) -> str:
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    return encode_rational(value)


class SuiteReport:
    """Track the results of one suite run."""

    def __init__(self, suite: str = ''):
        self.suite = suite
        self.reset()

    def reset(self):
        """Reset all results for a new run."""
        self.results: Dict[int, CheckResult] = {}
        self.started = None
        self.finished = None

    def start(self):
        self.started = datetime.now()

    def update(self, index: int, result: CheckResult):
        """Record the result of the check at position index of the suite."""
        self.results[index] = result

    def finalize(self):
        self.finished = datetime.now()

    @property
    def ordered(self) -> List[CheckResult]:
        return [self.results[i] for i in sorted(self.results)]

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.results.values())

    @property
    def failed(self) -> int:
        return len(self.results) - self.passed

    @property
    def all_passed(self) -> bool:
        return self.failed == 0

    def generate_report(self) -> Dict:
        """Deterministic report dictionary (no timestamps, no runtimes)."""
        return {
            'schema': REPORT_SCHEMA,
            'suite': self.suite,
            'total': len(self.results),
            'passed': self.passed,
            'failed': self.failed,
            'checks': [r.to_json() for r in self.ordered],
        }

    def generate_timings(self) -> Dict:
        return {
            'schema': REPORT_SCHEMA,
            'suite': self.suite,
            'started': None if self.started is None else self.started.isoformat(),
            'finished': None if self.finished is None else self.finished.isoformat(),
            'runtimes': {r.name: round(r.runtime, 6) for r in self.ordered},
        }

    def render(self, fmt: str) -> str:
        if fmt == 'json':
            return json.dumps(self.generate_report(), indent=2, sort_keys=True) + '\n'
        if fmt == 'csv':
            buffer = io.StringIO()
            writer = csv.writer(buffer, lineterminator='\n')
            writer.writerow(CSV_COLUMNS)
            for r in self.ordered:
                writer.writerow([r.name, _text_value(r.computed), _text_value(r.expected),
                                 _text_value(r.tolerance), 'true' if r.passed else 'false'])
            return buffer.getvalue()
        if fmt == 'text':
            lines = []
            for r in self.ordered:
                mark = '✓' if r.passed else '✗'
                line = f"{mark} {r.name} [{r.anchor}] computed={_text_value(r.computed)}"
                if r.kind == 'value':
                    line += f" expected={_text_value(r.expected)} tol={_text_value(r.tolerance)}"
                if r.reason:
                    line += f" ({r.reason})"
                lines.append(line)
            lines.append(f"{self.passed}/{len(self.results)} checks passed")
            return '\n'.join(lines) + '\n'
        raise ValueError(f"unknown report format {fmt!r}")


def timings_path(filename: str) -> str:
    stem, _ = os.path.splitext(filename)
    return f"{stem}.timings.json"


def emit(report: SuiteReport, fmt: Optional[str] = None, filename: Optional[str] = None) -> str:
    """
    Write the report in json, csv or text format.

    Args:
        report: Finalized SuiteReport
        fmt: json, csv or text (defaults to SUITE_CONFIG['default_format'])
        filename: Destination; defaults to results/<suite>_report.<fmt>

    Returns:
        Path of the written report; runtimes go to a .timings.json sidecar next to it
    """
    fmt = fmt or SUITE_CONFIG['default_format']
    content = report.render(fmt)
    if filename is None:
        extension = 'txt' if fmt == 'text' else fmt
        filename = os.path.join(SUITE_CONFIG['results_dir'], f"{report.suite or 'suite'}_report.{extension}")
    try:
        directory = os.path.dirname(filename)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(filename, 'w', encoding='utf-8', newline='') as f:
            f.write(content)
        with open(timings_path(filename), 'w', encoding='utf-8') as f:
            json.dump(report.generate_timings(), f, indent=2)
    except OSError as e:
        raise RatioBlockError(f"cannot write report to {filename}: {e}") from e
    return filename
