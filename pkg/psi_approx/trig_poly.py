from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np
import pydantic
from numpy.typing import ArrayLike, NDArray
from pydantic import ConfigDict, Field

from .config import DEFAULT_TOLERANCES, Tolerances
from .error import ArgumentError, ConvergenceError, DomainError, PreconditionError
from .logger import logger
from .psi_core import PsiSpec, characteristics, floor_int, psi_eval, psi_values

Weights = Union[Callable[[int], float], Sequence[float], NDArray[np.float64]]

# (cos, sin) of beta*pi/2 for beta = 0, 1, 2, 3 (mod 4)
_QUARTER_TURNS: tuple[tuple[float, float], ...] = ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))

# below this |sin(t/2)| closed forms switch to the coefficient sum
_SINGULAR = 1e-6


def phase(beta: float) -> tuple[float, float]:
    """(cos(beta*pi/2), sin(beta*pi/2)), exact when beta is an integer."""
    if float(beta).is_integer():
        return _QUARTER_TURNS[int(beta) % 4]
    theta = beta * math.pi / 2.0
    return math.cos(theta), math.sin(theta)


def _format(x: float) -> str:
    return format(float(x), '.17g')


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """
    a0_half + sum_{k=1}^{D} (a_k cos kt + b_k sin kt).

    Coefficient arrays are copied, padded to equal length, stripped of trailing zero pairs and
    made read-only, so `degree` is always the canonical degree.
    """

    a0_half: float = 0.0
    cos_coeffs: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    sin_coeffs: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        a = np.array(self.cos_coeffs, dtype=np.float64).ravel()
        b = np.array(self.sin_coeffs, dtype=np.float64).ravel()
        size = max(a.size, b.size)
        a = np.pad(a, (0, size - a.size))
        b = np.pad(b, (0, size - b.size))
        nonzero = np.flatnonzero((a != 0.0) | (b != 0.0))
        degree = int(nonzero[-1]) + 1 if nonzero.size else 0
        a, b = a[:degree].copy(), b[:degree].copy()
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, 'a0_half', float(self.a0_half))
        object.__setattr__(self, 'cos_coeffs', a)
        object.__setattr__(self, 'sin_coeffs', b)

    @classmethod
    def zero(cls) -> TrigPoly:
        return cls()

    @classmethod
    def cosine(cls, k: int, amplitude: float = 1.0) -> TrigPoly:
        if k == 0:
            return cls(a0_half=amplitude)
        a = np.zeros(k)
        a[k - 1] = amplitude
        return cls(cos_coeffs=a)

    @classmethod
    def sine(cls, k: int, amplitude: float = 1.0) -> TrigPoly:
        if k < 1:
            raise ArgumentError(f'sine harmonic must be >= 1, got {k}', field='k')
        b = np.zeros(k)
        b[k - 1] = amplitude
        return cls(sin_coeffs=b)

    @property
    def degree(self) -> int:
        return int(self.cos_coeffs.size)

    @property
    def is_zero(self) -> bool:
        return self.degree == 0 and self.a0_half == 0.0

    @property
    def is_even(self) -> bool:
        return not np.any(self.sin_coeffs)

    @property
    def is_odd(self) -> bool:
        return self.a0_half == 0.0 and not np.any(self.cos_coeffs)

    @cached_property
    def _horner(self) -> NDArray[np.complex128]:
        # c_k = a_k - i b_k, so Re(sum c_k e^{ikt}) = sum a_k cos kt + b_k sin kt
        return np.concatenate(((self.cos_coeffs - 1j * self.sin_coeffs)[::-1], [0.0]))

    def evaluate(self, t: ArrayLike) -> NDArray[np.float64] | float:
        points = np.asarray(t, dtype=np.float64)
        if self.degree == 0:
            values = np.full(points.shape, self.a0_half)
        else:
            values = self.a0_half + np.polyval(self._horner, np.exp(1j * points)).real
        return float(values) if points.ndim == 0 else values

    def __call__(self, t: ArrayLike) -> NDArray[np.float64] | float:
        return self.evaluate(t)

    def coefficient(self, k: int) -> tuple[float, float]:
        if k < 1 or k > self.degree:
            return 0.0, 0.0
        return float(self.cos_coeffs[k - 1]), float(self.sin_coeffs[k - 1])

    def padded(self, size: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        return (
            np.pad(self.cos_coeffs, (0, size - self.degree)),
            np.pad(self.sin_coeffs, (0, size - self.degree)),
        )

    def __add__(self, other: TrigPoly) -> TrigPoly:
        size = max(self.degree, other.degree)
        a1, b1 = self.padded(size)
        a2, b2 = other.padded(size)
        return TrigPoly(self.a0_half + other.a0_half, a1 + a2, b1 + b2)

    def __neg__(self) -> TrigPoly:
        return TrigPoly(-self.a0_half, -self.cos_coeffs, -self.sin_coeffs)

    def __sub__(self, other: TrigPoly) -> TrigPoly:
        return self + (-other)

    def scale(self, factor: float) -> TrigPoly:
        return TrigPoly(factor * self.a0_half, factor * self.cos_coeffs, factor * self.sin_coeffs)

    def __mul__(self, factor: float) -> TrigPoly:
        return self.scale(factor)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return (
            self.a0_half == other.a0_half
            and np.array_equal(self.cos_coeffs, other.cos_coeffs)
            and np.array_equal(self.sin_coeffs, other.sin_coeffs)
        )

    def __repr__(self) -> str:
        return f'TrigPoly(degree={self.degree}, a0_half={self.a0_half!r})'

    def to_record(self) -> str:
        """`degree;a0_half;a_1 ... a_D;b_1 ... b_D` with 17 significant digits, free of commas."""
        cos_part = ' '.join(_format(x) for x in self.cos_coeffs)
        sin_part = ' '.join(_format(x) for x in self.sin_coeffs)
        return f'{self.degree};{_format(self.a0_half)};{cos_part};{sin_part}'

    @classmethod
    def from_record(cls, record: str) -> TrigPoly:
        parts = record.strip().split(';')
        if len(parts) != 4:
            raise ArgumentError(f'malformed polynomial record {record[:40]!r}', field='record')
        try:
            degree = int(parts[0])
            a = np.array([float(x) for x in parts[2].split()])
            b = np.array([float(x) for x in parts[3].split()])
            poly = cls(float(parts[1]), a, b)
        except ValueError as e:
            raise ArgumentError(f'malformed polynomial record: {e}', field='record')
        if poly.degree != degree or a.size != degree or b.size != degree:
            raise ArgumentError(f'record declares degree {degree}, holds {a.size}', field='record')
        return poly


def evaluate(p: TrigPoly, t: ArrayLike) -> NDArray[np.float64] | float:
    return p.evaluate(t)


def _weights(lam: Weights, count: int) -> NDArray[np.float64]:
    """lambda(1), ..., lambda(count); sequences are read from their first element on."""
    if callable(lam):
        return np.array([lam(j) for j in range(1, count + 1)], dtype=np.float64)
    values = np.asarray(lam, dtype=np.float64).ravel()
    if values.size < count:
        raise ArgumentError(f'weights hold {values.size} values, {count} needed', field='lambda')
    return values[:count].copy()


def _with_phase(weights: NDArray[np.float64], gamma: float) -> TrigPoly:
    # weights_j cos(jt + gamma) = weights_j (cos gamma cos jt - sin gamma sin jt)
    return TrigPoly(0.0, weights * math.cos(gamma), -weights * math.sin(gamma))


def dirichlet(k: int, beta: float) -> TrigPoly:
    """D_{k,beta}(t) = cos(beta*pi/2)/2 + sum_{j=1}^{k} cos(jt - beta*pi/2)."""
    if k < 0:
        raise ArgumentError(f'Dirichlet order must be >= 0, got {k}', field='k')
    c, s = phase(beta)
    return TrigPoly(0.5 * c, np.full(k, c), np.full(k, s))


def dirichlet_closed(k: int, beta: float, t: float) -> float:
    """
    Closed form (sin((k+1/2)t - theta) + sin(theta) cos(t/2)) / (2 sin(t/2)), theta = beta*pi/2.

    The removable singularity at t = 0 (mod 2pi) is handled by summing the coefficients.
    """
    half = math.sin(t / 2.0)
    if abs(half) < _SINGULAR:
        return float(dirichlet(k, beta).evaluate(t))
    c, s = phase(beta)
    # sin(x - theta) = sin x cos theta - cos x sin theta
    x = (k + 0.5) * t
    return (math.sin(x) * c - math.cos(x) * s + s * math.cos(t / 2.0)) / (2.0 * half)


def _dirichlet_closed_many(ks: NDArray[np.float64], beta: float, t: float) -> NDArray[np.float64]:
    c, s = phase(beta)
    x = (ks + 0.5) * t
    return (np.sin(x) * c - np.cos(x) * s + s * math.cos(t / 2.0)) / (2.0 * math.sin(t / 2.0))


def w_nm(lam: Weights, gamma: float, N: int, M: int) -> TrigPoly:
    """(1/(M-N)) sum_{k=N}^{M-1} sum_{j=1}^{k} lambda(j) cos(jt + gamma), summed literally."""
    if not 1 <= N < M:
        raise ArgumentError(f'need 1 <= N < M, got N={N}, M={M}', field='N')
    weights = _weights(lam, M - 1)
    acc = np.zeros(M - 1)
    for k in range(N, M):
        acc[:k] += weights[:k]
    return _with_phase(acc / (M - N), gamma)


def w_nm_rearranged(lam: Weights, gamma: float, N: int, M: int) -> TrigPoly:
    """Single-pass form: weight 1 for j <= N and (M-j)/(M-N) for N < j < M."""
    if not 1 <= N < M:
        raise ArgumentError(f'need 1 <= N < M, got N={N}, M={M}', field='N')
    weights = _weights(lam, M - 1)
    js = np.arange(1, M, dtype=np.float64)
    ramp = np.where(js <= N, 1.0, (M - js) / (M - N))
    return _with_phase(weights * ramp, gamma)


class ExtremalSupport(pydantic.BaseModel):
    """Integer break points n < [eta(n)] < [eta(eta(n))] of the extremal difference."""

    model_config = ConfigDict(frozen=True)

    n: int
    e1: int
    e2: int
    eta_n: float
    eta_eta_n: float
    gap1: int = Field(description='[eta(n)] - n')
    gap2: int = Field(description='[eta(eta(n))] - [eta(n)]')


def extremal_support(
    spec: PsiSpec, n: int, tol: Tolerances = DEFAULT_TOLERANCES
) -> ExtremalSupport:
    if n < 1:
        raise DomainError(f'order must be >= 1, got n={n}')
    eta_n = characteristics(spec, n, tol).eta
    eta_eta_n = characteristics(spec, eta_n, tol).eta
    e1 = floor_int(eta_n, tol.floor_eps)
    e2 = floor_int(eta_eta_n, tol.floor_eps)
    gap1, gap2 = e1 - n, e2 - e1
    if gap1 < 2:
        raise PreconditionError(f'[η({n})] - {n} = {gap1} < 2, extremal ramp is empty')
    if gap2 < 2:
        raise PreconditionError(f'[η(η({n}))] - [η({n})] = {gap2} < 2, extremal ramp is empty')
    return ExtremalSupport(
        n=n, e1=e1, e2=e2, eta_n=eta_n, eta_eta_n=eta_eta_n, gap1=gap1, gap2=gap2
    )


def _extremal_profile(support: ExtremalSupport) -> NDArray[np.float64]:
    """Ramp-up, plateau, ramp-down weights on k = 1, ..., e2 - 1."""
    ks = np.arange(1, support.e2, dtype=np.float64)
    profile = np.zeros_like(ks)
    up = (ks > support.n) & (ks < support.e1)
    down = (ks > support.e1) & (ks < support.e2)
    profile[up] = (ks[up] - support.n) / support.gap1
    profile[support.e1 - 1] = 1.0
    profile[down] = (support.e2 - ks[down]) / support.gap2
    return profile


def extremal_difference(spec: PsiSpec, n: int, tol: Tolerances = DEFAULT_TOLERANCES) -> TrigPoly:
    """
    W_{[eta(n)],[eta(eta(n))]}(psi; 0; t) - W_{n,[eta(n)]}(psi; 0; t) in closed coefficient form.

    Cosine coefficients are (k-n)/g1 psi(k) below [eta(n)], psi([eta(n)]) at it, and
    ([eta(eta(n))]-k)/g2 psi(k) above it. The spectrum starts at n+1.
    """
    support = extremal_support(spec, n, tol)
    profile = _extremal_profile(support)
    ks = np.arange(1, support.e2, dtype=np.float64)
    return TrigPoly(0.0, profile * psi_values(spec, ks))


def extremal_dual(spec: PsiSpec, n: int, tol: Tolerances = DEFAULT_TOLERANCES) -> TrigPoly:
    """The same difference taken with lambda = 1; orthogonal to every polynomial of order n-1."""
    return TrigPoly(0.0, _extremal_profile(extremal_support(spec, n, tol)))


def psi_beta_derivative(p: TrigPoly, spec: PsiSpec, beta: float) -> TrigPoly:
    """
    Divides harmonic k by psi(k) and advances its phase by beta*pi/2.

    (a, b) -> (a cos theta + b sin theta, b cos theta - a sin theta) / psi(k). The constant
    term is dropped.
    """
    if p.a0_half != 0.0:
        logger.warning(f'(psi,beta)-derivative drops the constant term {p.a0_half!r}')
    if p.degree == 0:
        return TrigPoly.zero()
    c, s = phase(beta)
    weights = psi_values(spec, np.arange(1, p.degree + 1))
    a, b = p.cos_coeffs, p.sin_coeffs
    live = (a != 0.0) | (b != 0.0)
    if np.any(live & ~(weights > 0)):
        raise DomainError('psi(k) underflows to zero on a nonzero harmonic')
    safe = np.where(live, weights, 1.0)
    cos_part = np.where(live, (a * c + b * s) / safe, 0.0)
    sin_part = np.where(live, (b * c - a * s) / safe, 0.0)
    return TrigPoly(0.0, cos_part, sin_part)


def psi_beta_integral(p: TrigPoly, spec: PsiSpec, beta: float) -> TrigPoly:
    """Inverse of `psi_beta_derivative`: multiply harmonic k by psi(k) and retard by beta*pi/2."""
    if p.a0_half != 0.0:
        logger.warning(f'(psi,beta)-integral drops the constant term {p.a0_half!r}')
    if p.degree == 0:
        return TrigPoly.zero()
    c, s = phase(beta)
    weights = psi_values(spec, np.arange(1, p.degree + 1))
    a, b = p.cos_coeffs, p.sin_coeffs
    return TrigPoly(0.0, weights * (a * c - b * s), weights * (b * c + a * s))


def fourier_partial_sum(p: TrigPoly, order: int) -> TrigPoly:
    """S_order(p): keeps the constant term and harmonics k <= order."""
    if order < 0:
        raise ArgumentError(f'order must be >= 0, got {order}', field='order')
    return TrigPoly(p.a0_half, p.cos_coeffs[:order], p.sin_coeffs[:order])


def convolve(h: TrigPoly, g: TrigPoly) -> TrigPoly:
    """(1/pi) * integral over a period of h(x - t) g(t) dt, harmonic by harmonic."""
    size = min(h.degree, g.degree)
    a, b = h.cos_coeffs[:size], h.sin_coeffs[:size]
    c, d = g.cos_coeffs[:size], g.sin_coeffs[:size]
    return TrigPoly(2.0 * h.a0_half * g.a0_half, a * c - b * d, a * d + b * c)


def extremal_derivative_closed(
    spec: PsiSpec, n: int, beta: float, t: float, tol: Tolerances = DEFAULT_TOLERANCES
) -> float:
    """
    (psi,beta)-derivative of the extremal difference in closed form.

    With S(N) = sin(Nt/2 + theta) sin(Nt/2) the value is
    ((S(e2) - S(e1))/g2 - (S(e1) - S(n))/g1) / (2 sin^2(t/2)).
    """
    support = extremal_support(spec, n, tol)
    c, s = phase(beta)
    half = math.sin(t / 2.0)
    if abs(half) < _SINGULAR:
        # profile_k cos(kt + theta)
        profile = _extremal_profile(support)
        return float(TrigPoly(0.0, profile * c, -profile * s).evaluate(t))

    def partial(N: int) -> float:
        x = N * t / 2.0
        return (math.sin(x) * c + math.cos(x) * s) * math.sin(x)

    upper = (partial(support.e2) - partial(support.e1)) / support.gap2
    lower = (partial(support.e1) - partial(support.n)) / support.gap1
    return (upper - lower) / (2.0 * half * half)


class KernelSpec(pydantic.BaseModel):
    """The tail kernel Psi_{beta,n}(t) = sum_{k>=n} psi(k) cos(kt - beta*pi/2)."""

    model_config = ConfigDict(frozen=True)

    psi: PsiSpec
    beta: float
    n: int = Field(ge=1)


def _tail_mass(spec: PsiSpec, k: float, tol: Tolerances) -> float:
    """psi(k) + a bound on the integral of psi from k on; inf while mu(k) <= 2."""
    c = characteristics(spec, k, tol)
    if not c.mu > 2:
        return math.inf
    return psi_eval(spec, k) * (1.0 + 2.0 / (1.0 - 2.0 / c.mu) * c.eta_minus_t)


def _next_index(spec: PsiSpec, k: int, tol: Tolerances) -> int:
    return max(k + 1, math.ceil(characteristics(spec, k, tol).eta))


def _default_atol(kspec: KernelSpec, tol: Tolerances) -> float:
    return tol.quad * psi_eval(kspec.psi, kspec.n)


def kernel_terms(
    kspec: KernelSpec, tol: Tolerances = DEFAULT_TOLERANCES, atol: float | None = None
) -> int:
    """
    Smallest index K on the half-decay ladder n, [eta(n)]+1, ... whose certified tail
    psi(K) + bound(integral from K) is at most `atol`. The kernel is summed over n <= k < K.
    """
    limit = _default_atol(kspec, tol) if atol is None else atol
    if not limit > 0:
        raise ArgumentError(f'kernel tolerance must be positive, got {limit!r}', field='tol')
    k = kspec.n
    while _tail_mass(kspec.psi, k, tol) > limit:
        k = _next_index(kspec.psi, k, tol)
        if k - kspec.n > tol.term_cap:
            raise ConvergenceError(f'kernel truncation exceeds {tol.term_cap} terms for n={kspec.n}')
    return k


def kernel_poly(
    kspec: KernelSpec, tol: Tolerances = DEFAULT_TOLERANCES, atol: float | None = None
) -> TrigPoly:
    """Psi_{beta,n} truncated at `kernel_terms`; sup-distance to the full kernel is <= atol."""
    K = kernel_terms(kspec, tol, atol)
    c, s = phase(kspec.beta)
    weights = np.zeros(K - 1)
    weights[kspec.n - 1 :] = psi_values(kspec.psi, np.arange(kspec.n, K))
    return TrigPoly(0.0, weights * c, weights * s)


def _reduce(t: float) -> float:
    """t mod 2pi into (-pi, pi]."""
    r = math.remainder(t, 2.0 * math.pi)
    return math.pi if r == -math.pi else r


def kernel_eval(
    kspec: KernelSpec,
    t: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
    atol: float | None = None,
    abel: bool | None = None,
) -> float:
    """
    Psi_{beta,n}(t) to within `atol` (default tol.quad * psi(n)).

    Away from the origin, |t| >= 1/(eta(n) - n), the series is summed after the Abel transform

        sum_{k>=n} psi(k) cos(kt - theta)
            = sum_{k>=n} (psi(k) - psi(k+1)) D_{k,beta}(t) - psi(n) D_{n-1,beta}(t),

    whose tail from K is bounded by psi(K) pi/|t|. The minus sign on the last term was checked
    against the direct partial sums. Elsewhere the direct series is summed up to `kernel_terms`.
    `abel` forces one of the two paths.
    """
    limit = _default_atol(kspec, tol) if atol is None else atol
    spec, n = kspec.psi, kspec.n
    x = _reduce(t)
    if abel is None:
        abel = abs(x) >= 1.0 / characteristics(spec, n, tol).eta_minus_t
    if abel and abs(math.sin(x / 2.0)) < _SINGULAR:
        raise DomainError(f'Abel summation needs t away from 0 (mod 2pi), got t={t!r}')

    if not abel:
        K = kernel_terms(kspec, tol, limit)
        c, s = phase(kspec.beta)
        ks = np.arange(n, K, dtype=np.float64)
        terms = psi_values(spec, ks) * (np.cos(ks * x) * c + np.sin(ks * x) * s)
        return float(np.sum(terms))

    K = n
    while psi_eval(spec, K) * math.pi / abs(x) > limit:
        K = _next_index(spec, K, tol)
        if K - n > tol.term_cap:
            raise ConvergenceError(f'Abel truncation exceeds {tol.term_cap} terms for n={n}')
    ks = np.arange(n, K + 1, dtype=np.float64)
    weights = psi_values(spec, ks)
    drops = weights[:-1] - weights[1:]
    kernels = _dirichlet_closed_many(ks[:-1], kspec.beta, x)
    head = psi_eval(spec, n) * dirichlet_closed(n - 1, kspec.beta, x)
    logger.debug(f'Abel kernel sum at t={x:g} with {K - n} terms')
    return float(np.sum(drops * kernels) - head)
