from __future__ import annotations

import math
from typing import Any, Callable, Literal, Optional, Sequence

import numpy as np
import pydantic
from numpy.typing import ArrayLike, NDArray
from pydantic import ConfigDict, Field, model_validator
from scipy import integrate, optimize, special

from .config import DEFAULT_TOLERANCES, Tolerances
from .error import (
    ArgumentError,
    ConvergenceError,
    DomainError,
    PreconditionError,
    RangeError,
)
from .logger import logger

LN2 = math.log(2.0)

# psi(2^k) for k up to this cap covers every double-precision argument.
_BRACKET_CAP = 1000

PsiKind = Literal['exponential', 'generic']


class PsiSpec(pydantic.BaseModel):
    """
    A decreasing convex weight psi(t), t >= 1.

    Two kinds exist: the closed-form family `exp(-alpha * t**r)` and a generic callable.
    Membership in the admissible classes is not enforced here; `classify()` samples it.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: PsiKind
    alpha: Optional[float] = None
    r: Optional[float] = None
    func: Optional[Callable[[float], float]] = Field(default=None, exclude=True, repr=False)
    label: str = ''
    domain_min: float = 1.0

    @model_validator(mode='after')
    def _check_kind(self) -> PsiSpec:
        if self.kind == 'exponential':
            if self.alpha is None or not self.alpha > 0:
                raise ArgumentError('alpha must be positive', field='alpha')
            if self.r is None or not 0 < self.r <= 1:
                raise ArgumentError('r must lie in (0, 1]', field='r')
        elif self.func is None:
            raise ArgumentError('a generic spec needs a callable', field='func')
        return self

    @classmethod
    def exponential(cls, alpha: float, r: float) -> PsiSpec:
        return cls(kind='exponential', alpha=alpha, r=r, label=f'exp(-{alpha:.6g}*t^{r:.6g})')

    @classmethod
    def generic(cls, func: Callable[[float], float], label: str = 'generic') -> PsiSpec:
        return cls(kind='generic', func=func, label=label)

    def to_record(self) -> dict[str, Any]:
        """Flat key-value record. Only the exponential family is serializable."""
        if self.kind != 'exponential':
            raise ArgumentError('generic specs are constructed programmatically only', field='kind')
        return {'kind': self.kind, 'alpha': self.alpha, 'r': self.r}

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> PsiSpec:
        if record.get('kind') != 'exponential':
            raise ArgumentError(f"unsupported kind {record.get('kind')!r}", field='kind')
        return cls.exponential(float(record['alpha']), float(record['r']))

    def __call__(self, t: float) -> float:
        return psi_eval(self, t)


class Characteristics(pydantic.BaseModel):
    """The pair eta(t) = psi^-1(psi(t)/2), mu(t) = t / (eta(t) - t) at one point."""

    model_config = ConfigDict(frozen=True)

    t: float
    eta: float
    mu: float
    eta_minus_t: float


class ClassReport(pydantic.BaseModel):
    """Sampled membership flags. Failing checks keep the t values that witnessed them."""

    model_config = ConfigDict(frozen=True)

    in_M: bool
    mu_increasing_to_infinity: bool
    eta_gap_bounded_above: bool
    eta_gap_bounded_below: bool
    sample_grid: list[float]
    witnesses: dict[str, list[float]] = Field(default_factory=dict)


class ExpThresholds(pydantic.BaseModel):
    """Uniform constants of the exponential family, valid for every n >= n_min."""

    model_config = ConfigDict(frozen=True)

    alpha: float
    r: float
    a: float
    b: float
    n_min: int
    n_gap: float
    n_mu: float


def floor_int(x: float, eps: float = DEFAULT_TOLERANCES.floor_eps) -> int:
    """Integer part, shifted by `eps` so exact integers are not pushed down by round-off."""
    return math.floor(x + eps)


def log_grid(lo: float, hi: float, count: int) -> list[float]:
    return [float(t) for t in np.geomspace(lo, hi, count)]


def psi_eval(spec: PsiSpec, t: float) -> float:
    if not t >= spec.domain_min:
        raise DomainError(f'psi is defined on t >= {spec.domain_min:g}, got t={t!r}')
    if spec.kind == 'exponential':
        assert spec.alpha is not None and spec.r is not None
        return math.exp(-spec.alpha * t**spec.r)
    assert spec.func is not None
    return float(spec.func(t))


def psi_values(spec: PsiSpec, ks: ArrayLike) -> NDArray[np.float64]:
    """psi over an array of arguments (typically harmonic indices)."""
    points = np.asarray(ks, dtype=np.float64)
    if points.size and not points.min() >= spec.domain_min:
        raise DomainError(f'psi is defined on t >= {spec.domain_min:g}, got t={points.min()!r}')
    if spec.kind == 'exponential':
        assert spec.alpha is not None and spec.r is not None
        return np.exp(-spec.alpha * points**spec.r)
    assert spec.func is not None
    func = spec.func
    return np.fromiter((func(float(t)) for t in points.ravel()), dtype=np.float64).reshape(
        points.shape
    )


def psi_inverse(spec: PsiSpec, y: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """
    Solves psi(t) = y for t >= 1.

    The exponential family uses the closed form ((-ln y)/alpha)^(1/r). Generic specs bracket
    the root by doubling and then run Brent's method on the bracket.

    Raises:
        RangeError: y <= 0 or y > psi(1).
        ConvergenceError: no sign change within the doubling cap, or the root misses tol.root.
    """
    top = psi_eval(spec, spec.domain_min)
    if not 0 < y <= top:
        raise RangeError(f'y={y!r} lies outside (0, psi(1)={top!r}]')
    if spec.kind == 'exponential':
        assert spec.alpha is not None and spec.r is not None
        return max(spec.domain_min, (-math.log(y) / spec.alpha) ** (1.0 / spec.r))

    lo, hi = spec.domain_min, 2.0 * spec.domain_min
    if psi_eval(spec, lo) == y:
        return lo
    for _ in range(_BRACKET_CAP):
        if psi_eval(spec, hi) <= y:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise ConvergenceError(f'could not bracket psi^-1({y!r}) below t={hi!r}')
    if psi_eval(spec, hi) == y:
        return hi

    solution = optimize.root_scalar(
        lambda u: psi_eval(spec, u) - y,
        bracket=[lo, hi],
        method='brentq',
        xtol=1e-14,
        rtol=4 * np.finfo(float).eps,
        maxiter=tol.iteration_cap,
    )
    if not solution.converged:
        raise ConvergenceError(f'psi^-1({y!r}) did not converge: {solution.flag}')
    t = float(solution.root)
    residual = abs(psi_eval(spec, t) - y)
    if residual > tol.root * y:
        raise ConvergenceError(
            f'psi^-1({y!r}) = {t!r} leaves |psi(t) - y| = {residual:g} above the relative tolerance {tol.root:g}'
        )
    return t


def characteristics(
    spec: PsiSpec, t: float, tol: Tolerances = DEFAULT_TOLERANCES
) -> Characteristics:
    if not t >= spec.domain_min:
        raise DomainError(f'characteristics are defined on t >= {spec.domain_min:g}, got t={t!r}')
    if spec.kind == 'exponential':
        assert spec.alpha is not None and spec.r is not None
        # eta - t = t((1 + ln2/(alpha t^r))^(1/r) - 1) without cancellation
        x = LN2 / (spec.alpha * t**spec.r)
        gap = t * math.expm1(math.log1p(x) / spec.r)
        eta = t + gap
    else:
        eta = psi_inverse(spec, psi_eval(spec, t) / 2.0, tol)
        gap = eta - t
    if not gap > 0:
        raise ConvergenceError(f'eta({t!r}) = {eta!r} does not exceed t')
    return Characteristics(t=t, eta=eta, mu=t / gap, eta_minus_t=gap)


def eta(spec: PsiSpec, t: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    return characteristics(spec, t, tol).eta


def eta_closed_form(alpha: float, r: float, t: float) -> float:
    return (LN2 / alpha + t**r) ** (1.0 / r)


def gap_closed_form(alpha: float, r: float, n: float) -> float:
    """n((ln2/(alpha n^r) + 1)^(1/r) - 1), the factor in the exponential-family bounds."""
    return n * ((LN2 / (alpha * n**r) + 1.0) ** (1.0 / r) - 1.0)


def classify(
    spec: PsiSpec, grid: Sequence[float], tol: Tolerances = DEFAULT_TOLERANCES
) -> ClassReport:
    """
    Sampled class membership on a sorted grid.

    - `in_M`: positive (up to underflow), non-increasing, discretely convex, and psi(T) < psi(1) * tol.decay.
    - `mu_increasing_to_infinity`: mu non-decreasing and still growing over the second half.
    - `eta_gap_bounded_above`: eta(t) - t over the second half never exceeds the first half's maximum.
    - `eta_gap_bounded_below`: eta(t) - t stays positive and keeps at least half of its first-half minimum.
    """
    ts = [float(t) for t in grid]
    if len(ts) < 8:
        raise ArgumentError(f'classify needs at least 8 grid points, got {len(ts)}', field='grid')
    if ts[0] < spec.domain_min or any(b <= a for a, b in zip(ts, ts[1:])):
        raise ArgumentError('grid must be strictly increasing inside [1, inf)', field='grid')

    witnesses: dict[str, list[float]] = {}
    points = np.asarray(ts)
    values = psi_values(spec, points)
    mids = psi_values(spec, 0.5 * (points[:-1] + points[1:]))

    # 0.0 after a positive sample is underflow of a decaying psi, not a sign violation
    seen_positive = np.logical_or.accumulate(values > 0)
    underflow = (values == 0.0) & np.concatenate(([False], seen_positive[:-1]))
    positive = [t for t, v, u in zip(ts, values, underflow) if not v > 0 and not u]
    increasing = [ts[i + 1] for i in range(len(ts) - 1) if values[i + 1] > values[i]]
    second = values[:-1] - 2.0 * mids + values[1:]
    concave = [ts[i] for i in range(len(ts) - 1) if second[i] < -tol.convex * values[i]]
    decayed = values[-1] < psi_eval(spec, spec.domain_min) * tol.decay
    for name, found in (('positive', positive), ('monotone', increasing), ('convex', concave)):
        if found:
            witnesses[name] = found
    if not decayed:
        witnesses['decay'] = [ts[-1]]
    in_m = not witnesses

    if not in_m:
        return ClassReport(
            in_M=False,
            mu_increasing_to_infinity=False,
            eta_gap_bounded_above=False,
            eta_gap_bounded_below=False,
            sample_grid=ts,
            witnesses=witnesses,
        )

    try:
        chars = [characteristics(spec, t, tol) for t in ts]
    except (ConvergenceError, RangeError) as e:
        logger.warning(f'characteristics unavailable on the grid: {e}')
        witnesses['characteristics'] = ts
        return ClassReport(
            in_M=True,
            mu_increasing_to_infinity=False,
            eta_gap_bounded_above=False,
            eta_gap_bounded_below=False,
            sample_grid=ts,
            witnesses=witnesses,
        )

    mus = [c.mu for c in chars]
    gaps = [c.eta_minus_t for c in chars]
    mid = len(ts) // 2

    mu_drops = [ts[i + 1] for i in range(len(ts) - 1) if mus[i + 1] < mus[i] * (1 - tol.slack)]
    mu_grows = mus[-1] > mus[mid] * (1 + 1e-6)
    if mu_drops:
        witnesses['mu_increasing'] = mu_drops
    elif not mu_grows:
        witnesses['mu_increasing'] = [ts[mid], ts[-1]]

    first, last = gaps[: mid + 1], gaps[mid:]
    above = max(last) <= max(first) * (1 + 1e-6)
    if not above:
        witnesses['gap_above'] = [ts[mid + int(np.argmax(last))]]
    below = min(gaps) > 0 and min(last) >= 0.5 * min(first)
    if not below:
        witnesses['gap_below'] = [ts[mid + int(np.argmin(last))]]

    return ClassReport(
        in_M=True,
        mu_increasing_to_infinity=not mu_drops and mu_grows,
        eta_gap_bounded_above=above,
        eta_gap_bounded_below=below,
        sample_grid=ts,
        witnesses=witnesses,
    )


def statement2_bound(spec: PsiSpec, m: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """(2 / (1 - 2/mu(m))) psi(m) (eta(m) - m), an upper bound for the tail integral from m."""
    c = characteristics(spec, m, tol)
    if not c.mu > 2:
        raise PreconditionError(f'μ({m:g})={c.mu:g} ≤ 2, tail bound unavailable')
    return 2.0 / (1.0 - 2.0 / c.mu) * psi_eval(spec, m) * c.eta_minus_t


def tail_integral(spec: PsiSpec, m: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """
    Integral of psi over [m, inf).

    Integrates over the half-decay steps [t, eta(t)] with adaptive quadrature and stops at the
    first step end T whose tail bound `statement2_bound(T)` falls below tol.quad times the
    running integral.
    """
    if not m >= spec.domain_min:
        raise DomainError(f'tail integral needs m >= {spec.domain_min:g}, got m={m!r}')
    if psi_eval(spec, m) == 0.0:
        return 0.0

    total = 0.0
    left = m
    for step in range(tol.iteration_cap):
        right = eta(spec, left, tol)
        piece, _ = integrate.quad(
            lambda u: psi_eval(spec, u),
            left,
            right,
            epsabs=0.0,
            epsrel=max(tol.quad * 0.1, 1e-13),
            limit=200,
        )
        total += piece
        if psi_eval(spec, right) == 0.0:
            return total
        c = characteristics(spec, right, tol)
        if c.mu > 2:
            remainder = 2.0 / (1.0 - 2.0 / c.mu) * psi_eval(spec, right) * c.eta_minus_t
            if remainder < tol.quad * total:
                logger.debug(f'tail integral from {m:g} truncated at T={right:g} after {step + 1} steps')
                return total
        left = right
    raise ConvergenceError(f'tail integral from m={m!r} did not reach tolerance {tol.quad:g}')


def tail_integral_exact(spec: PsiSpec, m: float) -> float:
    """Closed form alpha^(-1/r) Gamma(1/r, alpha m^r) / r for the exponential family."""
    if spec.kind != 'exponential':
        raise ArgumentError('closed-form tail needs the exponential family', field='kind')
    assert spec.alpha is not None and spec.r is not None
    if not m >= spec.domain_min:
        raise DomainError(f'tail integral needs m >= {spec.domain_min:g}, got m={m!r}')
    shape = 1.0 / spec.r
    x = spec.alpha * m**spec.r
    return float(
        shape * spec.alpha ** (-shape) * special.gamma(shape) * special.gammaincc(shape, x)
    )


def exp_family_thresholds(alpha: float, r: float) -> ExpThresholds:
    """
    Uniform constants for psi(t) = exp(-alpha t^r), 0 < r < 1.

    `a` bounds eta(n) - n and `b` bounds mu(n) from below for all n >= n_min.
    """
    if not alpha > 0:
        raise DomainError(f'alpha must be positive, got {alpha!r}')
    if not 0 < r < 1:
        raise DomainError(f'r must lie in (0, 1), got {r!r}')
    try:
        n_gap = (2.0 * r * alpha / LN2) ** (1.0 / (1.0 - r))
        n_mu = 2.0 * (LN2 / (alpha * (3.0**r - 2.0**r))) ** (1.0 / r)
        a = LN2 / (alpha * r) * (1.0 + n_gap) ** (1.0 - r)
        b = 1.0 / ((LN2 / alpha * (1.0 + n_mu) ** (-r) + 1.0) ** (1.0 / r) - 1.0)
    except OverflowError:
        raise DomainError(f'thresholds overflow for alpha={alpha!r}, r={r!r}')
    n_min = math.ceil(1.0 + max(n_gap, n_mu) - DEFAULT_TOLERANCES.floor_eps)
    return ExpThresholds(alpha=alpha, r=r, a=a, b=b, n_min=n_min, n_gap=n_gap, n_mu=n_mu)


def half_decay_chain(
    spec: PsiSpec, n: float, b: float, tol: Tolerances = DEFAULT_TOLERANCES
) -> tuple[float, float, float]:
    """
    Returns ((eta(n)-n)/2, eta(eta(n)) - eta(n), (1 + 1/b)(eta(n)-n)).

    For mu(n) >= b the middle value lies between the outer two.
    """
    first = characteristics(spec, n, tol)
    second = characteristics(spec, first.eta, tol)
    gap = first.eta_minus_t
    return 0.5 * gap, second.eta - first.eta, (1.0 + 1.0 / b) * gap


def eta_slopes(
    spec: PsiSpec, grid: Sequence[float], tol: Tolerances = DEFAULT_TOLERANCES
) -> list[float]:
    """Central differences of eta with h = 1e-4 * t (forward differences at the left edge)."""
    slopes = []
    for t in grid:
        h = 1e-4 * t
        left = t - h if t - h >= spec.domain_min else t
        right = t + h
        slopes.append((eta(spec, right, tol) - eta(spec, left, tol)) / (right - left))
    return slopes
