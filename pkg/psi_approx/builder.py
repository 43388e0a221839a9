from __future__ import annotations

from typing import Any, Optional

from assertpy import assert_that

from .bounds import (
    BoundParams,
    BoundReport,
    Status,
    verify_derivative_ball,
    verify_duality_chain,
    verify_lemmas,
    verify_sup_lower_extra,
    verify_theorem1,
    verify_theorem2,
)
from .config import DEFAULT_TOLERANCES, Tolerances
from .error import ArgumentError
from .expect import Expect
from .logger import logger
from .psi_core import PsiSpec


class Study:
    """
    The `Study` class provides a fluent interface for building a verification point and running
    the inequality chains on it.
    The `given()` method returns a new instance of the `ParamsBuilder` class, which can be used to
    configure psi, the order and the exponents.
    """

    def given(self, spec: Optional[PsiSpec] = None) -> ParamsBuilder:
        """
        Constructs a new `ParamsBuilder` instance with the provided psi.

        Args:
            spec (Optional[PsiSpec]): The psi to study. It can also be set later with `exponential()`.

        Returns:
            ParamsBuilder: A new `ParamsBuilder` instance with the specified psi.
        """
        return ParamsBuilder(spec)


class ParamsBuilder:
    """
    The `ParamsBuilder` class collects the parameters of one verification point.

    - `exponential`: Uses psi(t) = exp(-alpha t^r).
    - `order`: The order n (approximation by polynomials of order n - 1).
    - `p`: The exponent of Theorem 1.
    - `s`: The exponent of Theorem 2.
    - `beta`: The phase of the (psi,beta)-derivative.
    - `constants`: Explicit a and b. Omitted values default to eta(n)-n-1e-9 and mu(n)-1e-9.
    - `tolerances`: Overrides of the numerical tolerances.
    - `when`: Validates the hypotheses and returns a `VerifyBuilder`.
    """

    def __init__(self, spec: Optional[PsiSpec]) -> None:
        self.__spec = spec
        self.__n: Optional[int] = None
        self.__beta = 0.0
        self.__p: Optional[float] = None
        self.__s: Optional[float] = None
        self.__a: Optional[float] = None
        self.__b: Optional[float] = None
        self.__tol: Tolerances = DEFAULT_TOLERANCES

    def exponential(self, alpha: float, r: float) -> ParamsBuilder:
        """
        Sets psi to the exponential family.

        Example:
            exponential(math.log(2), 0.5) is psi(t) = 2^(-sqrt(t))
        """
        self.__spec = PsiSpec.exponential(alpha, r)
        return self

    def order(self, n: int) -> ParamsBuilder:
        self.__n = n
        return self

    def p(self, p: float) -> ParamsBuilder:
        self.__p = p
        return self

    def s(self, s: float) -> ParamsBuilder:
        self.__s = s
        return self

    def beta(self, beta: float) -> ParamsBuilder:
        self.__beta = beta
        return self

    def constants(self, a: Optional[float] = None, b: Optional[float] = None) -> ParamsBuilder:
        """
        Sets the constants a and b of the hypotheses eta(n)-n >= a > 2, mu(n) >= b > 2.

        Example:
            constants(a=2 * math.sqrt(2), b=2.05)
        """
        if a is not None:
            self.__a = a
        if b is not None:
            self.__b = b
        return self

    def tolerances(self, **kwargs: Any) -> ParamsBuilder:
        """
        Overrides numerical tolerances.

        Example:
            tolerances(norm=1e-8, minimax=1e-7)
        """
        self.__tol = self.__tol.update(**kwargs)
        return self

    def when(self) -> VerifyBuilder:
        """
        Returns a `VerifyBuilder` for the configured point.

        Raises:
            ArgumentError: If psi or the order is missing.
            HypothesisError: If the point violates the hypotheses.
        """
        if self.__spec is None:
            raise ArgumentError('psi is not set', field='spec')
        if self.__n is None:
            raise ArgumentError('order n is not set', field='n')
        params = BoundParams.at(
            self.__spec,
            self.__n,
            beta=self.__beta,
            p=self.__p,
            s=self.__s,
            a=self.__a,
            b=self.__b,
            tol=self.__tol,
        )
        return VerifyBuilder(params)


class VerifyBuilder:
    def __init__(self, params: BoundParams) -> None:
        self.__params = params
        self.__reports: list[BoundReport] = []

    @property
    def params(self) -> BoundParams:
        return self.__params

    def theorem1(self) -> VerifyBuilder:
        """Runs the Theorem 1 sandwich for the configured p."""
        self.__reports.append(verify_theorem1(self.__params))
        return self

    def theorem2(self) -> VerifyBuilder:
        """Runs the Theorem 2 sandwich for the configured s."""
        self.__reports.append(verify_theorem2(self.__params))
        return self

    def duality(self) -> VerifyBuilder:
        self.__reports.append(verify_duality_chain(self.__params))
        return self

    def derivative_ball(self) -> VerifyBuilder:
        self.__reports.append(verify_derivative_ball(self.__params))
        return self

    def sup_lower_extra(self) -> VerifyBuilder:
        self.__reports.append(verify_sup_lower_extra(self.__params))
        return self

    def lemmas(self) -> VerifyBuilder:
        """Runs every lemma-level check at the configured point."""
        self.__reports.extend(verify_lemmas(self.__params))
        return self

    def then(self) -> ExpectBuilder:
        """
        Returns an `ExpectBuilder` over the reports produced so far.

        It provides a fluent interface for defining expectations, such as:
        - Expecting every report to pass
        - Expecting a specific status
        - Expecting lower <= measured <= upper
        - Expecting a minimal lower margin
        """
        logger.debug(f'{len(self.__reports)} reports at n={self.__params.n}')
        return ExpectBuilder(self.__reports)


class ExpectBuilder:
    def __init__(self, reports: list[BoundReport]) -> None:
        if not reports:
            raise ArgumentError('no verification was run before then()', field='reports')
        self.__reports = list(reports)
        self.__expects = [Expect(report) for report in self.__reports]

    @property
    def reports(self) -> list[BoundReport]:
        return list(self.__reports)

    def expect_passed(self) -> ExpectBuilder:
        """
        Expect every report to be passed or inconclusive.

        Returns:
            ExpectBuilder: The current `ExpectBuilder` instance, for chaining additional expectations.
        """
        for expect in self.__expects:
            expect.passed()
        return self

    def expect_status(self, status: Status) -> ExpectBuilder:
        """
        Expect every report to carry the given status.

        Args:
            status (Status): 'passed', 'inconclusive' or 'failed'.

        Returns:
            ExpectBuilder: The current `ExpectBuilder` instance, for chaining additional expectations.
        """
        for expect in self.__expects:
            expect.status(status)
        return self

    def expect_sandwich(self) -> ExpectBuilder:
        """
        Expect lower <= measured <= upper in every report.

        Returns:
            ExpectBuilder: The current `ExpectBuilder` instance, for chaining additional expectations.
        """
        for expect in self.__expects:
            expect.sandwich()
        return self

    def expect_margin_at_least(self, margin: float) -> ExpectBuilder:
        """
        Expect measured / lower >= margin in every report.

        Args:
            margin (float): The smallest acceptable lower margin.

        Returns:
            ExpectBuilder: The current `ExpectBuilder` instance, for chaining additional expectations.
        """
        for expect in self.__expects:
            expect.margin_at_least(margin)
        return self

    def expect_checks(self, *checks: str) -> ExpectBuilder:
        """
        Expect the reports to name exactly these checks, in order.

        Args:
            *checks (str): Check names such as 'theorem1' or 'floor_gap'.

        Returns:
            ExpectBuilder: The current `ExpectBuilder` instance, for chaining additional expectations.
        """
        assert_that(self.__expects).described_as('reports').is_length(len(checks))
        for expect, check in zip(self.__expects, checks):
            expect.check(check)
        return self

    def expect_notes_contain(self, text: str) -> ExpectBuilder:
        """
        Expect every report's notes to contain `text`.

        Returns:
            ExpectBuilder: The current `ExpectBuilder` instance, for chaining additional expectations.
        """
        for expect in self.__expects:
            expect.notes_contain(text)
        return self
