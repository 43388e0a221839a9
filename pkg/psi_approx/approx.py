from __future__ import annotations

import math
from typing import Literal

import numpy as np
import pydantic
import scipy.linalg
from numpy.typing import NDArray
from pydantic import ConfigDict, Field
from scipy import optimize

from .config import DEFAULT_TOLERANCES, Tolerances
from .error import ArgumentError, ConvergenceError, DomainError
from .logger import logger
from .norms import grid_size, local_maxima, lp_norm, pairing, sup_norm, uniform_grid
from .trig_poly import TrigPoly, fourier_partial_sum

Method = Literal['discrete-minimax', 'projection', 'smooth-descent']
Parity = Literal['even', 'odd', 'full']


class ApproxResult(pydantic.BaseModel):
    """
    Best approximation of one polynomial by polynomials of order <= `order`.

    `diagnostics` keys depend on the method: grid and point counts, iterations, the discrete
    lower value and equioscillation residual of the uniform solver, the gradient norm of the
    descent.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    error: float = Field(ge=0)
    best_poly: TrigPoly
    order: int
    method: Method
    diagnostics: dict[str, float] = Field(default_factory=dict)


def _check_order(order: int) -> None:
    if order < 0:
        raise ArgumentError(f'approximation order must be >= 0, got {order}', field='order')


def _parity(f: TrigPoly) -> Parity:
    if f.is_even:
        return 'even'
    if f.is_odd:
        return 'odd'
    return 'full'


def _sample_points(m: int, parity: Parity) -> NDArray[np.float64]:
    if parity == 'full':
        return uniform_grid(m)
    half = m // 2
    return math.pi * np.arange(half + 1) / half


def _sample_weights(m: int, parity: Parity) -> NDArray[np.float64]:
    """Trapezoid weights for the integral over the full period."""
    h = 2.0 * math.pi / m
    if parity == 'full':
        return np.full(m, h)
    # half period [0, pi] counted twice
    weights = np.full(m // 2 + 1, 2.0 * h)
    weights[[0, -1]] = h
    return weights


def _fold(t: float, parity: Parity) -> float:
    r = math.remainder(t, 2.0 * math.pi)
    return r if parity == 'full' else abs(r)


def _basis(ts: NDArray[np.float64], order: int, parity: Parity) -> NDArray[np.float64]:
    ks = np.arange(1, order + 1)
    angles = np.outer(ts, ks)
    ones = np.ones((ts.size, 1))
    if parity == 'even':
        return np.hstack([ones, np.cos(angles)])
    if parity == 'odd':
        return np.sin(angles)
    return np.hstack([ones, np.cos(angles), np.sin(angles)])


def _poly(coeffs: NDArray[np.float64], order: int, parity: Parity) -> TrigPoly:
    if parity == 'even':
        return TrigPoly(coeffs[0], coeffs[1:])
    if parity == 'odd':
        return TrigPoly(0.0, np.zeros(order), coeffs)
    return TrigPoly(coeffs[0], coeffs[1 : order + 1], coeffs[order + 1 :])


def _minimax_lp(
    basis: NDArray[np.float64], target: NDArray[np.float64]
) -> tuple[NDArray[np.float64], float]:
    """min E subject to |target - basis @ c| <= E at every sample."""
    rows, cols = basis.shape
    objective = np.zeros(cols + 1)
    objective[-1] = 1.0
    column = -np.ones((rows, 1))
    constraints = np.vstack([np.hstack([basis, column]), np.hstack([-basis, column])])
    solution = optimize.linprog(
        objective,
        A_ub=constraints,
        b_ub=np.concatenate([target, -target]),
        bounds=[(None, None)] * cols + [(0, None)],
        method='highs-ds',
        options={'primal_feasibility_tolerance': 1e-10, 'dual_feasibility_tolerance': 1e-10},
    )
    if solution.status != 0:
        raise ConvergenceError(f'minimax linear program failed: {solution.message}')
    return solution.x[:-1], float(solution.x[-1])


def equioscillation_residual(
    f: TrigPoly, t: TrigPoly, order: int, tol: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """
    Largest deviation |f - t| minus its 2(order+1)-th largest local maximum.

    Zero at the Chebyshev optimum; the full deviation when fewer peaks exist.
    """
    peaks = local_maxima(f - t, tol=tol)
    count = 2 * (order + 1)
    if len(peaks) < count:
        return peaks[0].value
    return peaks[0].value - peaks[count - 1].value


def best_uniform(f: TrigPoly, order: int, tol: Tolerances = DEFAULT_TOLERANCES) -> ApproxResult:
    """
    Chebyshev best approximation of `f` by polynomials of order <= `order`.

    The discrete minimax problem is solved as a linear program on a uniform grid of
    16 * max(degree, order + 1) points, restricted to the half basis for even or odd `f`.
    The refined local maxima of the residual are then added to the point set and the program is
    solved again, until the continuous maximum and the discrete value agree to tol.minimax.
    """
    _check_order(order)
    if f.degree <= order:
        return ApproxResult(error=0.0, best_poly=f, order=order, method='discrete-minimax')

    scale = sup_norm(f, tol).value
    g = f.scale(1.0 / scale)
    parity = _parity(g)
    fourier = fourier_partial_sum(f, order)
    fourier_gap = sup_norm(f - fourier, tol).value

    if parity == 'odd' and order == 0:
        return ApproxResult(
            error=scale, best_poly=TrigPoly.zero(), order=order, method='discrete-minimax'
        )

    m = grid_size(max(g.degree, order + 1), cap=tol.minimax_grid_cap)
    points = _sample_points(m, parity)
    grid = points.size
    for iteration in range(1, tol.iteration_cap + 1):
        coeffs, lower = _minimax_lp(_basis(points, order, parity), np.asarray(g.evaluate(points)))
        candidate = _poly(coeffs, order, parity)
        peaks = local_maxima(g - candidate, tol=tol, floor=0.5 * lower)
        upper = peaks[0].value
        logger.debug(f'minimax iteration {iteration}: {points.size} points, [{lower!r}, {upper!r}]')
        if upper - lower <= tol.minimax * upper:
            break
        fresh = np.array([_fold(peak.t, parity) for peak in peaks if peak.value > lower])
        points = np.concatenate([points, fresh])
        if points.size > tol.minimax_grid_cap:
            raise ConvergenceError(f'minimax exchange exceeds {tol.minimax_grid_cap} points')
    else:
        raise ConvergenceError(f'minimax exchange did not settle in {tol.iteration_cap} iterations')

    count = 2 * (order + 1)
    residual = upper - peaks[count - 1].value if len(peaks) >= count else upper
    best, error = candidate.scale(scale), upper * scale
    if error > fourier_gap:
        logger.warning(f'minimax error {error!r} exceeds the Fourier error {fourier_gap!r}; keeping S_n f')
        best, error = fourier, fourier_gap
    return ApproxResult(
        error=error,
        best_poly=best,
        order=order,
        method='discrete-minimax',
        diagnostics={
            'grid': float(grid),
            'points': float(points.size),
            'iterations': float(iteration),
            'lower': lower * scale,
            'equioscillation_residual': residual * scale,
        },
    )


def _descend(
    basis: NDArray[np.float64],
    target: NDArray[np.float64],
    weights: NDArray[np.float64],
    s: float,
    start: NDArray[np.float64],
    tol: Tolerances,
) -> tuple[NDArray[np.float64], int, float]:
    """
    Damped Newton descent on J(c) = sum w |target - basis c|^s.

    The Hessian weights |r|^(s-2) are floored at tol.smoothing so s < 2 stays well posed.
    Stops once |grad J| < tol.ls * J.
    """

    def objective(c: NDArray[np.float64]) -> float:
        return float(np.sum(weights * np.abs(target - basis @ c) ** s))

    coeffs = start.copy()
    value = objective(coeffs)
    gradient_norm = math.inf
    for iteration in range(1, tol.iteration_cap + 1):
        r = target - basis @ coeffs
        magnitude = np.maximum(np.abs(r), tol.smoothing)
        gradient = -s * basis.T @ (weights * magnitude ** (s - 1.0) * np.sign(r))
        gradient_norm = float(np.linalg.norm(gradient))
        if gradient_norm < tol.ls * value:
            return coeffs, iteration - 1, gradient_norm
        curvature = s * (s - 1.0) * weights * magnitude ** (s - 2.0)
        hessian = basis.T @ (curvature[:, None] * basis)
        try:
            direction = scipy.linalg.solve(hessian, -gradient, assume_a='pos')
        except (np.linalg.LinAlgError, ValueError):
            direction = scipy.linalg.lstsq(hessian, -gradient)[0]
        slope = float(gradient @ direction)
        if slope >= 0:
            direction, slope = -gradient, -(gradient_norm**2)
        step = 1.0
        while True:
            trial = coeffs + step * direction
            trial_value = objective(trial)
            if trial_value <= value + 1e-4 * step * slope:
                break
            step *= 0.5
            if step < 1e-12:
                logger.debug(f'L_{s:g} descent stalled at iteration {iteration}')
                return coeffs, iteration, gradient_norm
        coeffs, value = trial, trial_value
    raise ConvergenceError(f'L_{s:g} descent did not converge in {tol.iteration_cap} iterations')


def best_ls(f: TrigPoly, s: float, order: int, tol: Tolerances = DEFAULT_TOLERANCES) -> ApproxResult:
    """
    Best L_s approximation of `f` by polynomials of order <= `order`, 1 < s < inf.

    s = 2 is the Fourier projection. Otherwise the discretized integral of |f - t|^s is minimized
    from the Fourier truncation, and the grid is doubled until the accurately computed error
    settles to tol.ls. s = inf is handed to `best_uniform`.
    """
    _check_order(order)
    if math.isinf(s):
        return best_uniform(f, order, tol)
    if not s > 1:
        raise DomainError(f'best L_s approximation needs s > 1, got s={s!r}')
    if f.degree <= order:
        return ApproxResult(error=0.0, best_poly=f, order=order, method='projection')

    fourier = fourier_partial_sum(f, order)
    if s == 2:
        return ApproxResult(
            error=lp_norm(f - fourier, 2.0, tol), best_poly=fourier, order=order, method='projection'
        )

    scale = sup_norm(f, tol).value
    g = f.scale(1.0 / scale)
    parity = _parity(g)
    if parity == 'odd' and order == 0:
        return ApproxResult(
            error=lp_norm(f, s, tol), best_poly=TrigPoly.zero(), order=order, method='smooth-descent'
        )

    start = fourier_partial_sum(g, order)
    if parity == 'even':
        coeffs = np.concatenate([[start.a0_half], start.padded(order)[0]])
    elif parity == 'odd':
        coeffs = start.padded(order)[1].copy()
    else:
        a, b = start.padded(order)
        coeffs = np.concatenate([[start.a0_half], a, b])

    m = grid_size(max(g.degree, order + 1), cap=tol.minimax_grid_cap)
    previous = math.inf
    iterations = 0
    while True:
        points = _sample_points(m, parity)
        coeffs, steps, gradient_norm = _descend(
            _basis(points, order, parity),
            np.asarray(g.evaluate(points)),
            _sample_weights(m, parity),
            s,
            coeffs,
            tol,
        )
        iterations += steps
        candidate = _poly(coeffs, order, parity)
        error = lp_norm(g - candidate, s, tol)
        logger.debug(f'L_{s:g} descent on m={m}: error {error!r} after {steps} steps')
        if abs(error - previous) <= tol.ls * error:
            break
        previous = error
        if 2 * m > tol.minimax_grid_cap:
            raise ConvergenceError(f'L_{s:g} error did not settle below m={tol.minimax_grid_cap}')
        m *= 2

    best, error = candidate.scale(scale), error * scale
    fourier_gap = lp_norm(f - fourier, s, tol)
    if error > fourier_gap:
        logger.warning(f'L_{s:g} error {error!r} exceeds the Fourier error {fourier_gap!r}; keeping S_n f')
        best, error = fourier, fourier_gap
    return ApproxResult(
        error=error,
        best_poly=best,
        order=order,
        method='smooth-descent',
        diagnostics={'grid': float(m), 'iterations': float(iterations), 'gradient_norm': gradient_norm},
    )


def fourier_error(f: TrigPoly, order: int, p: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """||f - S_order(f)||_p."""
    _check_order(order)
    return lp_norm(f - fourier_partial_sum(f, order), p, tol)


def dual_lower_bound(f: TrigPoly, g: TrigPoly, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """|<f, g>| / ||g||_1, a lower bound for the uniform error whenever g annihilates the approximants."""
    return abs(pairing(f, g, tol)) / lp_norm(g, 1.0, tol)
