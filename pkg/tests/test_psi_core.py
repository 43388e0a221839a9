import math

import pytest
from assertpy import assert_that
from hypothesis import given, settings
from hypothesis import strategies as st

from psi_approx.error import ArgumentError, ConvergenceError, DomainError, PreconditionError, RangeError
from psi_approx.psi_core import (
    PsiSpec,
    characteristics,
    classify,
    eta_closed_form,
    eta_slopes,
    exp_family_thresholds,
    floor_int,
    gap_closed_form,
    half_decay_chain,
    log_grid,
    psi_eval,
    psi_inverse,
    statement2_bound,
    tail_integral,
    tail_integral_exact,
)


def test_characteristics_at_flagship_point(flagship):
    c = characteristics(flagship, 25)
    assert_that(c.eta).is_close_to(36.0, 1e-12)
    assert_that(c.eta_minus_t).is_close_to(11.0, 1e-12)
    assert_that(c.mu).is_close_to(25 / 11, 1e-12)


def test_characteristics_below_hypotheses(flagship):
    c = characteristics(flagship, 4)
    assert_that(c.eta).is_close_to(9.0, 1e-12)
    assert_that(c.mu).is_close_to(0.8, 1e-12)


def test_linear_family_has_constant_gap(linear):
    for t in (1.0, 7.5, 25.0, 400.0):
        assert_that(characteristics(linear, t).eta_minus_t).is_close_to(4.0, 1e-9)


def test_generic_spec_matches_closed_form(flagship):
    generic = PsiSpec.generic(lambda t: 2.0 ** (-math.sqrt(t)), label='2^-sqrt(t)')
    assert_that(characteristics(generic, 25).eta).is_close_to(36.0, 1e-9)
    assert_that(psi_inverse(generic, psi_eval(flagship, 100.0))).is_close_to(100.0, 1e-8)


def test_psi_domain_and_range(flagship):
    with pytest.raises(DomainError):
        psi_eval(flagship, 0.5)
    with pytest.raises(RangeError):
        psi_inverse(flagship, 0.0)
    with pytest.raises(RangeError):
        psi_inverse(flagship, 0.9)


def test_spec_rejects_bad_parameters():
    with pytest.raises(ArgumentError) as e:
        PsiSpec.exponential(-1.0, 0.5)
    assert_that(e.value.field).is_equal_to('alpha')
    with pytest.raises(ArgumentError):
        PsiSpec.exponential(1.0, 1.5)


def test_spec_record(flagship):
    record = flagship.to_record()
    assert_that(record).contains_entry({'kind': 'exponential'})
    assert_that(PsiSpec.from_record(record).alpha).is_equal_to(flagship.alpha)
    with pytest.raises(ArgumentError):
        PsiSpec.generic(math.exp).to_record()


@settings(max_examples=50, deadline=None)
@given(
    alpha=st.floats(min_value=0.1, max_value=2.0),
    r=st.floats(min_value=0.2, max_value=1.0),
    t=st.floats(min_value=1.0, max_value=200.0),
)
def test_eta_halves_psi(alpha, r, t):
    spec = PsiSpec.exponential(alpha, r)
    c = characteristics(spec, t)
    assert_that(c.eta).is_close_to(eta_closed_form(alpha, r, t), 1e-9 * c.eta)
    assert_that(c.eta_minus_t).is_close_to(gap_closed_form(alpha, r, t), 1e-7 * c.eta_minus_t)
    assert_that(psi_eval(spec, c.eta)).is_close_to(psi_eval(spec, t) / 2, 1e-9 * psi_eval(spec, t))


def test_tail_integral(flagship):
    value = tail_integral(flagship, 25)
    assert_that(value).is_close_to(0.58093, 1e-5)
    assert_that(value).is_close_to(tail_integral_exact(flagship, 25), 1e-8 * value)
    assert_that(value).is_less_than_or_equal_to(statement2_bound(flagship, 25))


def test_tail_bound_needs_mu_above_two(flagship):
    with pytest.raises(PreconditionError) as e:
        statement2_bound(flagship, 4)
    assert_that(str(e.value)).contains('≤ 2')


def test_exponential_thresholds():
    thresholds = exp_family_thresholds(math.log(2), 0.5)
    assert_that(thresholds.a).is_close_to(2 * math.sqrt(2), 1e-12)
    assert_that(thresholds.b).is_close_to(2.0549, 1e-4)
    assert_that(thresholds.n_min).is_equal_to(21)
    with pytest.raises(DomainError):
        exp_family_thresholds(math.log(2), 1.0)


def test_thresholds_bound_every_order_from_n_min(flagship):
    thresholds = exp_family_thresholds(math.log(2), 0.5)
    for n in range(thresholds.n_min, thresholds.n_min + 40):
        c = characteristics(flagship, n)
        assert_that(c.eta_minus_t).is_greater_than_or_equal_to(thresholds.a)
        assert_that(c.mu).is_greater_than_or_equal_to(thresholds.b)


def test_floor_int_absorbs_round_off():
    assert_that(floor_int(36.0 - 1e-12)).is_equal_to(36)
    assert_that(floor_int(35.9)).is_equal_to(35)


def test_half_decay_chain(flagship):
    b = characteristics(flagship, 25).mu - 1e-9
    low, value, high = half_decay_chain(flagship, 25, b)
    assert_that(value).is_close_to(13.0, 1e-9)
    assert_that(low).is_less_than_or_equal_to(value)
    assert_that(value).is_less_than(high)


def test_eta_slopes(flagship):
    slopes = eta_slopes(flagship, [25.0, 100.0])
    assert_that(slopes[0]).is_close_to(1.2, 1e-6)
    assert_that(slopes[1]).is_close_to(1.1, 1e-6)


def test_classify_flagship(flagship):
    report = classify(flagship, log_grid(1.0, 1e4, 64))
    assert_that(report.in_M).is_true()
    assert_that(report.mu_increasing_to_infinity).is_true()
    assert_that(report.eta_gap_bounded_above).is_false()
    assert_that(report.eta_gap_bounded_below).is_true()
    assert_that(report.witnesses).contains_key('gap_above')


def test_classify_linear(linear):
    report = classify(linear, log_grid(1.0, 200.0, 32))
    assert_that(report.in_M).is_true()
    assert_that(report.mu_increasing_to_infinity).is_true()
    assert_that(report.eta_gap_bounded_above).is_true()
    assert_that(report.eta_gap_bounded_below).is_true()
    assert_that(report.witnesses).is_empty()


def test_classify_reports_concavity():
    gaussian = PsiSpec.generic(lambda t: math.exp(-t * t / 100.0), label='gaussian')
    report = classify(gaussian, log_grid(1.0, 100.0, 32))
    assert_that(report.in_M).is_false()
    assert_that(report.witnesses).contains_key('convex')


def test_classify_needs_a_grid(flagship):
    with pytest.raises(ArgumentError):
        classify(flagship, [1.0, 2.0, 3.0])
    with pytest.raises(ArgumentError):
        classify(flagship, [float(t) for t in range(10, 0, -1)])


# 2^(-t) underflows to 0.0 long before t = 10^4
def test_classify_treats_underflow_as_decay():
    report = classify(PsiSpec.exponential(math.log(2), 1.0), log_grid(4.0, 1e4, 64))
    assert_that(report.in_M).is_true()
    assert_that(report.eta_gap_bounded_above).is_true()
    assert_that(report.eta_gap_bounded_below).is_true()
    assert_that(report.mu_increasing_to_infinity).is_true()
    assert_that(report.witnesses).does_not_contain_key('positive')


def test_classify_still_rejects_non_positive_weights():
    shifted = PsiSpec.generic(lambda t: math.exp(-t) - math.exp(-10.0), label='shifted')
    report = classify(shifted, log_grid(1.0, 100.0, 32))
    assert_that(report.in_M).is_false()
    assert_that(report.witnesses).contains_key('positive')


def test_tail_bound_over_orders(flagship):
    # (2 / (1 - 22/25)) * 2^-5 * 11
    assert_that(statement2_bound(flagship, 25)).is_close_to(550 / 96, 1e-12)
    assert_that(statement2_bound(flagship, 25)).is_close_to(5.7292, 1e-4)
    for m in range(21, 201):
        assert_that(tail_integral(flagship, m)).is_less_than_or_equal_to(statement2_bound(flagship, m))


@settings(max_examples=60, deadline=None)
@given(
    alpha=st.floats(min_value=0.1, max_value=2.0),
    r=st.floats(min_value=0.2, max_value=1.0),
    n=st.integers(min_value=1, max_value=10**4),
)
def test_gap_grows_at_least_like_n_to_one_minus_r(alpha, r, n):
    gap = characteristics(PsiSpec.exponential(alpha, r), n).eta_minus_t
    assert_that(gap).is_greater_than_or_equal_to(math.log(2) / (alpha * r) * n ** (1 - r) * (1 - 1e-12))


@pytest.mark.parametrize('kind', ['exponential', 'generic'])
def test_inverse_undoes_psi_on_a_log_grid(flagship, kind):
    spec = flagship if kind == 'exponential' else PsiSpec.generic(lambda t: 2.0 ** (-math.sqrt(t)))
    for t in log_grid(1.0, 1e4, 50):
        assert_that(psi_inverse(spec, psi_eval(spec, t))).is_close_to(t, 1e-9 * t)


def test_inverse_reports_a_missed_root():
    # psi jumps from 1/2 to 1/4 at t = 2, so psi(t) = 0.3 has no solution
    step = PsiSpec.generic(lambda t: 2.0 ** -math.floor(t), label='step')
    with pytest.raises(ConvergenceError) as e:
        psi_inverse(step, 0.3)
    assert_that(str(e.value)).contains('relative tolerance')
