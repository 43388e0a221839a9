from __future__ import annotations

from assertpy import assert_that

from .bounds import BoundReport, Status


class Expect:
    def __init__(self, report: BoundReport) -> None:
        self._report = report

    def _label(self) -> str:
        params = self._report.params
        return f'{self._report.check} at n={params.n}, beta={params.beta:g} ({self._report.notes})'

    def passed(self) -> None:
        """Asserts the report is not failed ('passed' or 'inconclusive')."""
        assert_that(self._report.passed).described_as(self._label()).is_true()

    def status(self, status: Status) -> None:
        assert_that(self._report.status).described_as(self._label()).is_equal_to(status)

    def check(self, check: str) -> None:
        assert_that(self._report.check).described_as(self._label()).is_equal_to(check)

    def sandwich(self) -> None:
        """lower <= measured, and measured <= upper when an upper bound exists."""
        measured = self._report.measured
        assert_that(measured).described_as(self._label()).is_greater_than_or_equal_to(
            self._report.lower
        )
        if self._report.upper is not None:
            assert_that(measured).described_as(self._label()).is_less_than_or_equal_to(
                self._report.upper
            )

    def margin_at_least(self, margin: float) -> None:
        assert_that(self._report.margin_low).described_as(self._label()).is_greater_than_or_equal_to(
            margin
        )

    def measured_close_to(self, value: float, tolerance: float) -> None:
        assert_that(self._report.measured).described_as(self._label()).is_close_to(value, tolerance)

    def notes_contain(self, text: str) -> None:
        assert_that(self._report.notes).described_as(self._label()).contains(text)
