import math

import numpy as np
import pytest
from assertpy import assert_that

from psi_approx.error import ArgumentError, DomainError
from psi_approx.norms import (
    GridFunction,
    conjugate_exponent,
    convolution_bound,
    grid_size,
    local_maxima,
    lp_norm,
    pairing,
    pairing_analytic,
    sup_norm,
)
from psi_approx.psi_core import psi_eval
from psi_approx.trig_poly import KernelSpec, TrigPoly, extremal_difference, extremal_dual, kernel_poly


def test_conjugate_exponent():
    assert_that(conjugate_exponent(1)).is_equal_to(math.inf)
    assert_that(conjugate_exponent(math.inf)).is_equal_to(1.0)
    assert_that(conjugate_exponent(2)).is_equal_to(2.0)
    assert_that(conjugate_exponent(3)).is_close_to(1.5, 1e-15)
    with pytest.raises(DomainError):
        conjugate_exponent(0.5)


def test_grid_size():
    assert_that(grid_size(1)).is_equal_to(256)
    assert_that(grid_size(100)).is_equal_to(2048)
    assert_that(grid_size(100, cap=1024)).is_equal_to(1024)
    with pytest.raises(ArgumentError):
        GridFunction(np.cos, resolution=300)


@pytest.mark.parametrize(
    'p, expected',
    [
        (1.0, 4.0),
        (2.0, math.sqrt(math.pi)),
        (3.0, (8 / 3) ** (1 / 3)),
        (math.inf, 1.0),
    ],
)
def test_lp_norm_of_cosine(p, expected):
    assert_that(lp_norm(TrigPoly.cosine(1), p)).is_close_to(expected, 1e-8 * expected)


def test_lp_norm_of_constants_and_grids():
    assert_that(lp_norm(TrigPoly(2.0), 1.0)).is_close_to(4 * math.pi, 1e-12)
    assert_that(lp_norm(TrigPoly.zero(), 3.0)).is_equal_to(0.0)
    assert_that(lp_norm(GridFunction(np.cos, source='cos'), 1.0)).is_close_to(4.0, 1e-6)
    assert_that(lp_norm(GridFunction(np.cos), math.inf)).is_close_to(1.0, 1e-12)
    with pytest.raises(DomainError):
        lp_norm(TrigPoly.cosine(1), 0.5)


def test_sup_norm_locates_the_peak():
    peak = sup_norm(TrigPoly(0.0, [0.0, 0.0, 0.0, 0.0, 2.0]))
    assert_that(peak.value).is_close_to(2.0, 1e-12)
    assert_that(abs(math.cos(5 * peak.t))).is_close_to(1.0, 1e-10)
    # cos(t - 0.123) peaks off the grid
    shifted = TrigPoly(0.0, [math.cos(0.123)], [math.sin(0.123)])
    peak = sup_norm(shifted)
    assert_that(peak.value).is_close_to(1.0, 1e-12)
    assert_that(peak.t).is_close_to(0.123, 1e-6)


def test_local_maxima_of_cos3t():
    peaks = local_maxima(TrigPoly.cosine(3))
    assert_that(peaks).is_length(6)
    for peak in peaks:
        assert_that(peak.value).is_close_to(1.0, 1e-12)


def test_pairing():
    cos = TrigPoly.cosine(1)
    assert_that(pairing(cos, cos)).is_close_to(math.pi, 1e-14)
    assert_that(pairing(cos, TrigPoly.sine(1))).is_close_to(0.0, 1e-14)
    assert_that(pairing(TrigPoly(1.0), TrigPoly(1.0))).is_close_to(2 * math.pi, 1e-14)
    assert_that(pairing(GridFunction(np.cos), cos)).is_close_to(math.pi, 1e-12)


def test_pairing_closed_form(flagship):
    f = extremal_difference(flagship, 25)
    g = extremal_dual(flagship, 25)
    analytic = pairing_analytic(flagship, 25)
    assert_that(pairing(f, g)).is_close_to(analytic, 1e-13 * analytic)
    assert_that(pairing(GridFunction.of_poly(f), g)).is_close_to(analytic, 1e-12 * analytic)


@pytest.mark.parametrize('p', [1.0, 1.5, 2.0, math.inf])
def test_convolution_bound(linear, p):
    rng = np.random.default_rng(11)
    g = TrigPoly(0.0, rng.uniform(-1, 1, 40), rng.uniform(-1, 1, 40))
    kernel = kernel_poly(KernelSpec(psi=linear, beta=1, n=25))
    lhs, rhs = convolution_bound(kernel, g, p)
    assert_that(lhs).is_less_than_or_equal_to(rhs)


# odd polynomials vanish at -pi and pi, where the sampled sign is round-off
@pytest.mark.parametrize(
    'poly, p, expected',
    [
        # |sin t + sin 3t| = 4 |sin t| cos^2 t
        (TrigPoly.sine(1) + TrigPoly.sine(3), 1.0, 16 / 3),
        (TrigPoly.sine(1), 1.5, (2 * math.sqrt(math.pi) * math.gamma(1.25) / math.gamma(1.75)) ** (1 / 1.5)),
        (TrigPoly.sine(2, 3.0), 1.0, 12.0),
    ],
)
def test_lp_norm_of_odd_polynomials(poly, p, expected):
    assert_that(lp_norm(poly, p)).is_close_to(expected, 1e-8 * expected)


@pytest.mark.parametrize('n', [21, 22, 23, 30, 37, 49])
def test_lp_norms_of_the_odd_kernel(flagship, n):
    kernel = kernel_poly(KernelSpec(psi=flagship, beta=1, n=n))
    l1, l54, l2 = (lp_norm(kernel, q) for q in (1.0, 1.25, 2.0))
    # ||f||_p <= (2 pi)^(1/p - 1/q) ||f||_q for p < q
    assert_that(l1).is_less_than_or_equal_to((2 * math.pi) ** 0.2 * l54 * (1 + 1e-9))
    assert_that(l54).is_less_than_or_equal_to((2 * math.pi) ** 0.3 * l2 * (1 + 1e-9))
    assert_that(l1).is_greater_than(psi_eval(flagship, n))


@pytest.mark.parametrize('p', [1.0, 4 / 3, 2.0, 4.0, math.inf])
def test_holder_inequality(p):
    rng = np.random.default_rng(5)
    q = conjugate_exponent(p)
    for _ in range(30):
        f = TrigPoly(rng.normal(), rng.normal(size=4), rng.normal(size=4))
        g = TrigPoly(rng.normal(), rng.normal(size=4), rng.normal(size=4))
        bound = lp_norm(f, p) * lp_norm(g, q)
        assert_that(abs(pairing(f, g))).is_less_than_or_equal_to(bound * (1 + 1e-9))
