import math

import numpy as np
import pytest
from assertpy import assert_that
from hypothesis import given, settings
from hypothesis import strategies as st

from psi_approx.error import ArgumentError, PreconditionError
from psi_approx.psi_core import PsiSpec, psi_eval
from psi_approx.trig_poly import (
    KernelSpec,
    TrigPoly,
    convolve,
    dirichlet,
    dirichlet_closed,
    extremal_derivative_closed,
    extremal_difference,
    extremal_dual,
    extremal_support,
    fourier_partial_sum,
    kernel_eval,
    kernel_poly,
    kernel_terms,
    phase,
    psi_beta_derivative,
    psi_beta_integral,
    w_nm,
    w_nm_rearranged,
)

coefficients = st.lists(st.floats(min_value=-1.0, max_value=1.0), min_size=1, max_size=12)


def test_phase_is_exact_on_quarter_turns():
    assert_that(phase(0)).is_equal_to((1.0, 0.0))
    assert_that(phase(1)).is_equal_to((0.0, 1.0))
    assert_that(phase(2)).is_equal_to((-1.0, 0.0))
    assert_that(phase(-1)).is_equal_to((0.0, -1.0))


def test_canonical_degree():
    p = TrigPoly(0.5, [1.0, 0.0, 0.0], [0.0, 2.0, 0.0, 0.0])
    assert_that(p.degree).is_equal_to(2)
    assert_that(p.coefficient(2)).is_equal_to((0.0, 2.0))
    assert_that(p.coefficient(7)).is_equal_to((0.0, 0.0))
    assert_that(TrigPoly.zero().is_zero).is_true()


def test_evaluate_matches_definition():
    p = TrigPoly(0.25, [1.0, -0.5, 0.125], [0.0, 0.75, -2.0])
    ts = np.linspace(-math.pi, math.pi, 17)
    expected = 0.25 + sum(
        a * np.cos(k * ts) + b * np.sin(k * ts)
        for k, (a, b) in enumerate(zip([1.0, -0.5, 0.125], [0.0, 0.75, -2.0]), start=1)
    )
    assert_that(np.allclose(p.evaluate(ts), expected, atol=1e-14)).is_true()
    assert_that(p(0.0)).is_close_to(1.625, 1e-14)


def test_arithmetic():
    p = TrigPoly.cosine(3, 2.0) + TrigPoly.sine(1)
    q = p - TrigPoly.cosine(3, 2.0)
    assert_that(q == TrigPoly.sine(1)).is_true()
    assert_that((2 * p).coefficient(3)).is_equal_to((4.0, 0.0))
    assert_that((-p).coefficient(1)).is_equal_to((0.0, -1.0))
    assert_that(p.is_even).is_false()
    assert_that(TrigPoly.cosine(2).is_even).is_true()
    assert_that(TrigPoly.sine(2).is_odd).is_true()


def test_record_round_trip():
    p = TrigPoly(1 / 3, [math.pi, 0.0, -1e-300], [0.1, math.e, 0.0])
    record = p.to_record()
    assert_that(record).does_not_contain(',')
    assert_that(TrigPoly.from_record(record) == p).is_true()
    with pytest.raises(ArgumentError):
        TrigPoly.from_record('3;0;1 2;3 4')


def test_derivative_rotates_phase(flagship):
    # psi(2) cos 2t with beta = 1 gives -sin 2t
    derivative = psi_beta_derivative(TrigPoly.cosine(2, psi_eval(flagship, 2)), flagship, 1)
    assert_that(derivative == TrigPoly.sine(2, -1.0)).is_true()
    # beta = 0 only divides by psi(k)
    derivative = psi_beta_derivative(TrigPoly.sine(3, psi_eval(flagship, 3)), flagship, 0)
    assert_that(derivative.coefficient(3)).is_equal_to((0.0, 1.0))


def test_derivative_drops_constant(flagship):
    derivative = psi_beta_derivative(TrigPoly(5.0, [1.0]), flagship, 0)
    assert_that(derivative.a0_half).is_equal_to(0.0)
    assert_that(derivative.coefficient(1)[0]).is_close_to(1 / psi_eval(flagship, 1), 1e-12)


@settings(max_examples=40, deadline=None)
@given(a=coefficients, b=coefficients, beta=st.floats(min_value=-3.0, max_value=3.0))
def test_integral_inverts_derivative(flagship, a, b, beta):
    p = TrigPoly(0.0, a, b)
    back = psi_beta_integral(psi_beta_derivative(p, flagship, beta), flagship, beta)
    size = max(p.degree, back.degree)
    assert_that(np.allclose(back.padded(size), p.padded(size), atol=1e-12)).is_true()


@pytest.mark.parametrize('beta', [0, 1, 0.5, 2.5])
@pytest.mark.parametrize('k', [0, 1, 7, 30])
def test_dirichlet_closed_form(k, beta):
    kernel = dirichlet(k, beta)
    for t in (0.0, 1e-9, 0.3, 1.0, -2.0, math.pi, 2 * math.pi):
        assert_that(dirichlet_closed(k, beta, t)).is_close_to(float(kernel.evaluate(t)), 1e-9 * (k + 1))


def test_rearranged_sum():
    lam = [1.0 / j**2 for j in range(1, 20)]
    for gamma in (0.0, 0.7, -math.pi / 2):
        direct = w_nm(lam, gamma, 5, 12)
        rearranged = w_nm_rearranged(lam, gamma, 5, 12)
        assert_that(np.allclose(direct.padded(11), rearranged.padded(11), atol=1e-14)).is_true()
    with pytest.raises(ArgumentError):
        w_nm(lam, 0.0, 4, 4)


def test_extremal_support(flagship, linear):
    support = extremal_support(flagship, 25)
    assert_that((support.e1, support.e2, support.gap1, support.gap2)).is_equal_to((36, 49, 11, 13))
    support = extremal_support(linear, 25)
    assert_that((support.e1, support.e2)).is_equal_to((29, 33))


def test_extremal_support_needs_room():
    tight = PsiSpec.exponential(math.log(2), 1.0)
    with pytest.raises(PreconditionError) as e:
        extremal_support(tight, 25)
    assert_that(str(e.value)).contains('< 2')


def test_extremal_difference_is_difference_of_means(flagship):
    psi = lambda j: psi_eval(flagship, j)  # noqa: E731
    f = extremal_difference(flagship, 25)
    expected = w_nm(psi, 0.0, 36, 49) - w_nm(psi, 0.0, 25, 36)
    assert_that(np.allclose(f.padded(48), expected.padded(48), atol=1e-15)).is_true()
    # nothing at or below n
    assert_that(np.any(f.cos_coeffs[:25])).is_false()
    assert_that(f.degree).is_equal_to(48)


def test_dual_is_the_profile(flagship):
    dual = extremal_dual(flagship, 25)
    assert_that(dual.coefficient(36)).is_equal_to((1.0, 0.0))
    assert_that(dual.coefficient(30)[0]).is_close_to(5 / 11, 1e-15)
    assert_that(dual.coefficient(40)[0]).is_close_to(9 / 13, 1e-15)


@pytest.mark.parametrize('beta', [0, 1, 0.5])
def test_closed_form_derivative(flagship, beta):
    derivative = psi_beta_derivative(extremal_difference(flagship, 25), flagship, beta)
    for t in (0.0, 0.3, 1.0, 2.5, -1.7):
        assert_that(extremal_derivative_closed(flagship, 25, beta, t)).is_close_to(
            float(derivative.evaluate(t)), 1e-9
        )


def test_closed_form_derivative_decay(flagship):
    support = extremal_support(flagship, 25)
    for t in np.linspace(0.2, math.pi, 40):
        value = abs(extremal_derivative_closed(flagship, 25, 0, t))
        bound = math.pi**2 / t**2 * (1 / support.gap1 + 1 / support.gap2)
        assert_that(value).is_less_than_or_equal_to(bound)


def test_fourier_partial_sum():
    p = TrigPoly(1.0, [1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
    s = fourier_partial_sum(p, 2)
    assert_that(s.degree).is_equal_to(2)
    assert_that(s.a0_half).is_equal_to(1.0)
    assert_that(fourier_partial_sum(p, 0) == TrigPoly(1.0)).is_true()


def test_kernel_paths_agree(linear):
    kspec = KernelSpec(psi=linear, beta=1, n=25)
    scale = psi_eval(linear, 25)
    kernel = kernel_poly(kspec)
    assert_that(kernel_terms(kspec)).is_greater_than(25)
    for t in (1.0, 2.0, -2.5, math.pi):
        direct = kernel_eval(kspec, t, abel=False)
        abel = kernel_eval(kspec, t, abel=True)
        assert_that(abel).is_close_to(direct, 1e-9 * scale)
        assert_that(float(kernel.evaluate(t))).is_close_to(direct, 1e-9 * scale)
    # near the origin only the direct sum applies
    assert_that(kernel_eval(kspec, 0.01)).is_close_to(float(kernel.evaluate(0.01)), 1e-9 * scale)


@pytest.mark.parametrize('beta', [0, 1, 0.5])
def test_kernel_reproduces_tail(linear, beta):
    rng = np.random.default_rng(7)
    f = TrigPoly(0.3, rng.uniform(-1, 1, 32), rng.uniform(-1, 1, 32))
    kernel = kernel_poly(KernelSpec(psi=linear, beta=beta, n=25))
    represented = convolve(kernel, psi_beta_derivative(f, linear, beta))
    tail = f - fourier_partial_sum(f, 24)
    assert_that(represented.degree).is_equal_to(32)
    assert_that(np.allclose(represented.padded(32), tail.padded(32), atol=1e-10)).is_true()
    assert_that(represented.a0_half).is_equal_to(0.0)


def test_rearranged_sum_on_random_instances():
    rng = np.random.default_rng(1)
    for _ in range(200):
        M = int(rng.integers(2, 65))
        N = int(rng.integers(1, M))
        lam = rng.uniform(-1.0, 1.0, M - 1)
        gamma = float(rng.uniform(-math.pi, math.pi))
        direct = w_nm(lam, gamma, N, M)
        rearranged = w_nm_rearranged(lam, gamma, N, M)
        assert_that(np.allclose(direct.padded(M - 1), rearranged.padded(M - 1), rtol=0.0, atol=1e-14)).is_true()


@pytest.mark.parametrize('beta', [0, 1 / 3, 1, 3.5])
def test_dirichlet_closed_form_on_a_dense_grid(beta):
    # an even point count keeps t = 0 off the grid
    ts = np.linspace(-math.pi, math.pi, 1000)
    for k in range(65):
        summed = dirichlet(k, beta).evaluate(ts)
        closed = np.array([dirichlet_closed(k, beta, float(t)) for t in ts])
        assert_that(float(np.max(np.abs(summed - closed)))).is_less_than_or_equal_to(1e-12 * (k + 1))


@pytest.mark.slow
@pytest.mark.parametrize('beta', [0, 0.5, 1, 1.5, 2])
def test_kernels_decay_like_one_over_t(flagship, beta):
    ts = np.linspace(math.pi / 2000, math.pi, 2000)
    for k in range(65):
        decay = float(np.max(np.abs(dirichlet(k, beta).evaluate(ts)) * ts))
        assert_that(decay).is_less_than_or_equal_to(math.pi)
    for n in range(21, 50):
        kernel = kernel_poly(KernelSpec(psi=flagship, beta=beta, n=n))
        decay = float(np.max(np.abs(kernel.evaluate(ts)) * ts))
        assert_that(decay).is_less_than_or_equal_to(2 * math.pi * psi_eval(flagship, n) * (1 + 1e-9))
