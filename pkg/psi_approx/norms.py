from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, NamedTuple, Union

import numpy as np
from numpy.typing import NDArray
from scipy import optimize

from .config import DEFAULT_TOLERANCES, Tolerances
from .error import ArgumentError, ConvergenceError, DomainError
from .logger import logger
from .psi_core import PsiSpec, psi_values
from .trig_poly import TrigPoly, convolve, extremal_support

MIN_RESOLUTION = 256


def grid_size(degree: int, factor: int = 16, cap: int | None = None) -> int:
    """Smallest power of two >= max(256, factor * degree), clipped to `cap`."""
    target = max(MIN_RESOLUTION, factor * max(degree, 1))
    m = 1 << math.ceil(math.log2(target))
    return m if cap is None else min(m, cap)


def uniform_grid(m: int) -> NDArray[np.float64]:
    """t_j = -pi + 2 pi j / m, j = 0, ..., m - 1."""
    return -math.pi + 2.0 * math.pi * np.arange(m) / m


@dataclass(frozen=True)
class GridFunction:
    """
    A periodic function sampled on the uniform grid over [-pi, pi).

    `func` maps an array of t values to values; refinement doubles `resolution` and resamples.
    """

    func: Callable[[NDArray[np.float64]], NDArray[np.float64]]
    resolution: int = MIN_RESOLUTION
    source: str = ''

    def __post_init__(self) -> None:
        m = self.resolution
        if m < MIN_RESOLUTION or m & (m - 1):
            raise ArgumentError(f'resolution must be a power of two >= 256, got {m}', field='resolution')

    @classmethod
    def of_poly(cls, p: TrigPoly, resolution: int | None = None, source: str = 'trig_poly') -> GridFunction:
        return cls(p.evaluate, resolution or grid_size(p.degree), source)  # type: ignore[arg-type]

    @property
    def points(self) -> NDArray[np.float64]:
        return uniform_grid(self.resolution)

    @cached_property
    def samples(self) -> NDArray[np.float64]:
        return np.asarray(self.func(self.points), dtype=np.float64)

    def refined(self) -> GridFunction:
        return replace(self, resolution=2 * self.resolution)


Periodic = Union[GridFunction, TrigPoly]


class Peak(NamedTuple):
    t: float
    value: float


def conjugate_exponent(p: float) -> float:
    """p' with 1/p + 1/p' = 1; 1 and inf are conjugate."""
    if not p >= 1:
        raise DomainError(f'exponent must be >= 1, got p={p!r}')
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _refine_peak(p: TrigPoly, left: float, centre: float, right: float) -> Peak:
    """Parabolic vertex of |p| through the three grid values, then bounded Brent on the bracket."""
    f = lambda u: abs(float(p.evaluate(u)))  # noqa: E731
    fl, fc, fr = f(left), f(centre), f(right)
    candidates = [Peak(centre, fc)]
    denominator = fl - 2.0 * fc + fr
    if denominator < 0:
        h = centre - left
        vertex = centre + 0.5 * h * (fl - fr) / denominator
        if left < vertex < right:
            candidates.append(Peak(vertex, f(vertex)))
    result = optimize.minimize_scalar(
        lambda u: -f(u), bounds=(left, right), method='bounded', options={'xatol': 1e-13}
    )
    candidates.append(Peak(float(result.x), -float(result.fun)))
    return max(candidates, key=lambda peak: peak.value)


def _grid_peaks(values: NDArray[np.float64]) -> NDArray[np.intp]:
    """Indices of circular discrete local maxima of `values`."""
    before = np.roll(values, 1)
    after = np.roll(values, -1)
    return np.flatnonzero((values > before) & (values >= after))


def local_maxima(
    p: TrigPoly,
    m: int | None = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    floor: float = 0.0,
) -> list[Peak]:
    """Local maxima of |p| on the circle, refined, largest first. Grid peaks below `floor` are skipped."""
    if p.degree == 0:
        return [Peak(0.0, abs(p.a0_half))]
    m = m or grid_size(p.degree, cap=tol.norm_grid_cap)
    ts = uniform_grid(m)
    values = np.abs(p.evaluate(ts))
    h = 2.0 * math.pi / m
    peaks = [
        _refine_peak(p, ts[j] - h, ts[j], ts[j] + h)
        for j in _grid_peaks(values)
        if values[j] >= floor
    ]
    return sorted(peaks, key=lambda peak: peak.value, reverse=True)


def sup_norm(p: TrigPoly, tol: Tolerances = DEFAULT_TOLERANCES) -> Peak:
    """
    max |p(t)| and a point attaining it.

    The five largest grid maxima, and any within 10% of the grid maximum, are refined.
    """
    if p.degree == 0:
        return Peak(0.0, abs(p.a0_half))
    m = grid_size(p.degree, cap=tol.norm_grid_cap)
    ts = uniform_grid(m)
    values = np.abs(p.evaluate(ts))
    indices = _grid_peaks(values)
    if indices.size == 0:
        indices = np.array([int(np.argmax(values))])
    order = indices[np.argsort(values[indices])[::-1]]
    top = values[order[0]]
    chosen = [j for rank, j in enumerate(order) if rank < 5 or values[j] >= 0.9 * top]
    h = 2.0 * math.pi / m
    peaks = [_refine_peak(p, ts[j] - h, ts[j], ts[j] + h) for j in chosen]
    best = max(peaks, key=lambda peak: peak.value)
    return Peak(math.remainder(best.t, 2.0 * math.pi), best.value)


def _trapezoid_power(values: NDArray[np.float64], p: float) -> float:
    return 2.0 * math.pi * float(np.mean(np.abs(values) ** p))


def _grid_norm(f: GridFunction, p: float, tol: Tolerances) -> float:
    if math.isinf(p):
        return float(np.max(np.abs(f.samples)))
    previous = _trapezoid_power(f.samples, p)
    current = f
    while current.resolution < tol.norm_grid_cap:
        current = current.refined()
        value = _trapezoid_power(current.samples, p)
        if abs(value - previous) <= tol.norm * abs(value):
            return value ** (1.0 / p)
        previous = value
    raise ConvergenceError(f'L_{p:g} norm of {f.source or "grid function"} did not settle below m={tol.norm_grid_cap}')


def _sign_changes(p: TrigPoly, tol: Tolerances) -> list[float]:
    """Zeros of p on [-pi, pi) where the sign changes, located by Brent's method."""
    m = grid_size(p.degree, cap=tol.norm_grid_cap)
    ts = uniform_grid(m)
    values = p.evaluate(ts)
    roots = [float(ts[j]) for j in np.flatnonzero(values == 0.0)]
    for j in np.flatnonzero(values * np.roll(values, -1) < 0):
        k = (j + 1) % m
        # the wrap-around bracket ends at -pi, whose value was sampled there and not at pi
        left = float(ts[j]) if k else float(ts[j]) - 2.0 * math.pi
        right = float(ts[k])
        # brentq sees the endpoint values the scan saw, so a sign change near a zero survives rounding
        known = {left: float(values[j]), right: float(values[k])}

        def f(u: float, known: dict[float, float] = known) -> float:
            return known[u] if u in known else float(p.evaluate(u))

        root = optimize.brentq(f, left, right, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        roots.append(math.remainder(root, 2.0 * math.pi))
    return sorted(roots)


def _piecewise_power(p: TrigPoly, power: float, tol: Tolerances) -> float:
    """
    Integral of |p|^power over a period.

    Between consecutive sign changes |p|^power is smooth inside, so each piece is integrated by
    Gauss-Legendre with the node count doubled until the total settles. Without sign changes the
    integrand is smooth and periodic and the trapezoid rule is used instead.
    """
    roots = _sign_changes(p, tol)
    if not roots:
        return _grid_norm(GridFunction.of_poly(p, grid_size(p.degree, factor=4)), power, tol) ** power

    edges = np.array(roots + [roots[0] + 2.0 * math.pi])
    mids = 0.5 * (edges[1:] + edges[:-1])
    halves = 0.5 * (edges[1:] - edges[:-1])
    previous = math.nan
    nodes = 16
    while len(roots) * nodes <= tol.norm_grid_cap:
        x, w = np.polynomial.legendre.leggauss(nodes)
        points = (mids[:, None] + halves[:, None] * x[None, :]).ravel()
        weights = (halves[:, None] * w[None, :]).ravel()
        value = float(np.sum(weights * np.abs(p.evaluate(points)) ** power))
        if abs(value - previous) <= tol.norm * value:
            logger.debug(f'|p|^{power:g} integral: {len(roots)} pieces, {nodes} nodes each')
            return value
        previous = value
        nodes *= 2
    raise ConvergenceError(f'L_{power:g} integral of a degree-{p.degree} polynomial did not settle')


def lp_norm(f: Periodic, p: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """
    (integral over a period of |f|^p)^(1/p), or max |f| for p = inf.

    Polynomials use Parseval for p = 2 and a refined maximum for p = inf; grid functions use the
    periodic trapezoid rule with doubling.
    """
    if not p >= 1:
        raise DomainError(f'exponent must be >= 1, got p={p!r}')
    if isinstance(f, GridFunction):
        return _grid_norm(f, p, tol)
    if f.is_zero:
        return 0.0
    if math.isinf(p):
        return sup_norm(f, tol).value
    if p == 2:
        energy = 2.0 * math.pi * f.a0_half**2 + math.pi * float(
            np.sum(f.cos_coeffs**2) + np.sum(f.sin_coeffs**2)
        )
        return math.sqrt(energy)
    if f.degree == 0:
        return abs(f.a0_half) * (2.0 * math.pi) ** (1.0 / p)
    return _piecewise_power(f, p, tol) ** (1.0 / p)


def pairing(f: Periodic, g: TrigPoly, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Integral of f g over [-pi, pi): exact on coefficients for two polynomials."""
    if isinstance(f, TrigPoly):
        size = min(f.degree, g.degree)
        harmonics = float(
            np.dot(f.cos_coeffs[:size], g.cos_coeffs[:size]) + np.dot(f.sin_coeffs[:size], g.sin_coeffs[:size])
        )
        return 2.0 * math.pi * f.a0_half * g.a0_half + math.pi * harmonics
    # the trapezoid rule is exact once the grid resolves f's and g's harmonics
    current = f if f.resolution > 2 * g.degree else replace(f, resolution=grid_size(g.degree, factor=4))
    previous = 2.0 * math.pi * float(np.mean(current.samples * g.evaluate(current.points)))
    while current.resolution < tol.norm_grid_cap:
        current = current.refined()
        value = 2.0 * math.pi * float(np.mean(current.samples * g.evaluate(current.points)))
        if abs(value - previous) <= tol.norm * max(abs(value), 1e-300):
            return value
        previous = value
    raise ConvergenceError(f'pairing with {f.source or "grid function"} did not settle')


def pairing_analytic(spec: PsiSpec, n: int, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """
    Pairing of the extremal psi-difference with its lambda = 1 counterpart, summed in closed form:

        pi/g1^2 sum psi(k)(k-n)^2 + pi psi([eta(n)]) + pi/g2^2 sum psi(k)([eta(eta(n))]-k)^2.
    """
    support = extremal_support(spec, n, tol)
    rise = np.arange(n + 1, support.e1, dtype=np.float64)
    fall = np.arange(support.e1 + 1, support.e2, dtype=np.float64)
    up = float(np.sum(psi_values(spec, rise) * (rise - n) ** 2)) / support.gap1**2
    plateau = float(psi_values(spec, [support.e1])[0])
    down = float(np.sum(psi_values(spec, fall) * (support.e2 - fall) ** 2)) / support.gap2**2
    return math.pi * (up + plateau + down)


def convolution_bound(h: TrigPoly, g: TrigPoly, p: float, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[float, float]:
    """Both sides of ||(1/pi) h * g||_C <= (1/pi) ||h||_p ||g||_p'."""
    lhs = sup_norm(convolve(h, g), tol).value
    rhs = lp_norm(h, p, tol) * lp_norm(g, conjugate_exponent(p), tol) / math.pi
    return lhs, rhs
