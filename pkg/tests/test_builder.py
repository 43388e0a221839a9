import math

import pytest
from assertpy import assert_that

from psi_approx import Study
from psi_approx.error import ArgumentError, HypothesisError


# Theorem 1
# psi(t) = 2^(-t/4), uniform case p = 2
def test_theorem1(linear):
    (
        Study()
        .given(linear)
        .order(25)
        .p(2)
        .beta(1)
        .when()
        .theorem1()
        .then()
        .expect_passed()
        .expect_sandwich()
        .expect_checks('theorem1')
        .expect_notes_contain('kernel')
    )


# Theorem 2 with the flagship psi(t) = 2^(-sqrt(t))
def test_theorem2_flagship():
    (
        Study()
        .given()
        .exponential(math.log(2), 0.5)
        .order(25)
        .s(2)
        .when()
        .theorem2()
        .then()
        .expect_passed()
        .expect_sandwich()
    )


# Several chains at one point
def test_chains_at_one_point(linear):
    (
        Study()
        .given(linear)
        .order(25)
        .p(1)
        .when()
        .derivative_ball()
        .duality()
        .sup_lower_extra()
        .then()
        .expect_passed()
        .expect_margin_at_least(0.0)
        .expect_checks('derivative_ball', 'duality', 'sup_lower_extra')
    )


# Lemma-level checks
def test_lemmas(linear):
    reports = (
        Study()
        .given(linear)
        .order(25)
        .beta(1)
        .when()
        .lemmas()
        .then()
        .expect_passed()
        .reports
    )
    assert_that(reports).is_length(10)


# Explicit constants and tolerance overrides
def test_constants_and_tolerances(linear):
    verify = (
        Study()
        .given(linear)
        .order(25)
        .p(1)
        .constants(a=3.0, b=3.0)
        .tolerances(minimax=1e-7)
        .when()
    )
    assert_that(verify.params.a).is_equal_to(3.0)
    assert_that(verify.params.tol.minimax).is_equal_to(1e-7)
    verify.duality().then().expect_passed()


# Hypotheses are checked when the point is built
def test_hypothesis_violation(flagship):
    with pytest.raises(HypothesisError) as e:
        Study().given(flagship).order(4).p(1).when()
    assert_that(str(e.value)).contains('μ(4)=0.8 ≤ 2, hypothesis violated')


def test_missing_parameters(flagship):
    with pytest.raises(ArgumentError) as e:
        Study().given().order(25).when()
    assert_that(e.value.field).is_equal_to('spec')
    with pytest.raises(ArgumentError) as e:
        Study().given(flagship).when()
    assert_that(e.value.field).is_equal_to('n')
    with pytest.raises(ArgumentError):
        Study().given(flagship).tolerances(bogus=1.0)


def test_then_needs_a_verification(linear):
    with pytest.raises(ArgumentError):
        Study().given(linear).order(25).when().then()


def test_failed_expectation_names_the_check(linear):
    with pytest.raises(AssertionError) as e:
        (
            Study()
            .given(linear)
            .order(25)
            .p(1)
            .when()
            .derivative_ball()
            .then()
            .expect_status('failed')
        )
    assert_that(str(e.value)).contains('derivative_ball at n=25')


def test_checks_must_match_in_order(linear):
    then = Study().given(linear).order(25).p(1).when().derivative_ball().duality().then()
    with pytest.raises(AssertionError):
        then.expect_checks('duality', 'derivative_ball')
    with pytest.raises(AssertionError):
        then.expect_checks('derivative_ball')
    with pytest.raises(AssertionError):
        then.expect_notes_contain('L_s case')
