from __future__ import annotations

import argparse
import math
import os
import sys
from fractions import Fraction
from typing import Any, Literal, Optional, Sequence, get_args

import pydantic
from pydantic import ConfigDict, Field

from .approx import best_uniform, fourier_error
from .bounds import (
    BoundParams,
    BoundReport,
    CorollaryResult,
    build_extremal,
    sweep_map,
    verify_corollary1,
    verify_corollary2,
    verify_derivative_ball,
    verify_duality_chain,
    verify_lemmas,
    verify_theorem1,
    verify_theorem2,
)
from .config import DEFAULT_TOLERANCES, Tolerances
from .error import ArgumentError, Base, ConvergenceError, DomainError
from .logger import Logger, logger
from .norms import lp_norm
from .psi_core import LN2, PsiSpec, characteristics, classify, exp_family_thresholds, log_grid, psi_eval
from .reporter import REPORT_COLUMNS, Format, Reporter, report_row
from .trig_poly import KernelSpec, extremal_support, kernel_poly, kernel_terms, psi_beta_derivative

JOBS_ENV = 'PSI_APPROX_JOBS'

Command = Literal[
    'characteristics',
    'classify',
    'kernel-norm',
    'extremal',
    'verify-thm1',
    'verify-thm2',
    'verify-cor1',
    'verify-cor2',
    'verify-lemmas',
    'sweep',
]

CHARACTERISTICS_COLUMNS = ('alpha', 'r', 'n', 'psi', 'eta', 'eta_minus_t', 'mu', 'a', 'b', 'n_min')
CLASSIFY_COLUMNS = (
    'alpha',
    'r',
    'grid_min',
    'grid_max',
    'grid_count',
    'in_M',
    'mu_increasing_to_infinity',
    'eta_gap_bounded_above',
    'eta_gap_bounded_below',
    'witnesses',
)
KERNEL_COLUMNS = ('alpha', 'r', 'n', 'beta', 'p', 'terms', 'norm', 'norm_over_pi')
EXTREMAL_COLUMNS = (
    'alpha',
    'r',
    'n',
    'beta',
    'p',
    'e1',
    'e2',
    'gap1',
    'gap2',
    'derivative_norm',
    'best_uniform_error',
    'fourier_error',
    'equioscillation_residual',
    'polynomial',
)
SUMMARY_COLUMNS = ('check', 'exponent', 'beta', 'n', 'measured', 'rate', 'ratio', 'band', 'finite')

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_CONVERGENCE = 3

# lemma point, uniform points, L_s points at one (n, beta)
SweepPoint = tuple[BoundParams, list[BoundParams], list[BoundParams]]


class RunConfig(pydantic.BaseModel):
    """
    One CLI invocation. `psi` overrides the exponential family given by `alpha` and `r`, so
    generic weights can be run through `run()` programmatically.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    command: Command
    alpha: float = LN2
    r: float = 0.5
    psi: Optional[PsiSpec] = None
    n: list[int] = Field(default_factory=list)
    p: list[float] = Field(default_factory=lambda: [1.0])
    s: list[float] = Field(default_factory=lambda: [2.0])
    beta: list[float] = Field(default_factory=lambda: [0.0])
    output: Optional[str] = None
    fmt: Format = 'csv'
    tol: Tolerances = DEFAULT_TOLERANCES
    jobs: int = Field(default=1, ge=1)
    grid_min: float = 1.0
    grid_max: float = 1e4
    grid_count: int = 64
    summary: Optional[str] = None

    @property
    def spec(self) -> PsiSpec:
        return self.psi if self.psi is not None else PsiSpec.exponential(self.alpha, self.r)


def parse_number(text: str) -> float:
    """A float, a fraction like `3/2`, or `inf`."""
    token = text.strip().lower()
    if token in ('inf', '+inf', 'infinity'):
        return math.inf
    try:
        return float(Fraction(token))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f'not a number: {text!r}')


def parse_alpha(text: str) -> float:
    return LN2 if text.strip().lower() == 'ln2' else parse_number(text)


def parse_numbers(text: str) -> list[float]:
    return [parse_number(token) for token in text.split(',') if token.strip()]


def parse_orders(text: str) -> list[int]:
    """`25`, `21..49` (inclusive) or comma-separated mixes of both."""
    orders: list[int] = []
    for token in text.split(','):
        token = token.strip()
        if not token:
            continue
        try:
            if '..' in token:
                lo, hi = token.split('..', 1)
                orders.extend(range(int(lo), int(hi) + 1))
            else:
                orders.append(int(token))
        except ValueError:
            raise argparse.ArgumentTypeError(f'not an order or range: {token!r}')
    return orders


def parse_override(text: str) -> tuple[str, str]:
    key, sep, value = text.partition('=')
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f'expected key=value, got {text!r}')
    return key.strip(), value.strip()


def default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV, '1')
    try:
        return int(raw)
    except ValueError:
        raise ArgumentError(f'{JOBS_ENV}={raw!r} is not an integer', field='jobs')


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--alpha', type=parse_alpha, default=LN2, help='alpha of exp(-alpha t^r); `ln2` is exact')
    common.add_argument('--r', type=parse_number, default=0.5, help='r of exp(-alpha t^r), 0 < r <= 1')
    common.add_argument('--n', type=parse_orders, default=[], help='order, range a..b or list')
    common.add_argument('--p', type=parse_numbers, default=[1.0], help='uniform-case exponents')
    common.add_argument('--s', type=parse_numbers, default=[2.0], help='L_s exponents')
    common.add_argument('--beta', type=parse_numbers, default=[0.0], help='phases of the derivative')
    common.add_argument('--output', default=None, help='report path (stdout by default)')
    common.add_argument('--format', dest='fmt', choices=('csv', 'text'), default='csv')
    common.add_argument('--tol', type=parse_override, action='append', default=[], metavar='KEY=VALUE')
    common.add_argument('--jobs', type=int, default=None, help=f'worker processes (default ${JOBS_ENV} or 1)')
    common.add_argument('--grid-min', type=parse_number, default=1.0)
    common.add_argument('--grid-max', type=parse_number, default=1e4)
    common.add_argument('--grid-count', type=int, default=64)
    common.add_argument('--summary', default=None, help='plot-ready order summary CSV (corollaries)')
    common.add_argument('--log-level', default=None, help='DEBUG, INFO, WARNING or ERROR')

    parser = argparse.ArgumentParser(
        prog='psi-approx',
        description='Kernels, extremal polynomials and order-estimate checks for (psi,beta)-differentiable functions.',
    )
    commands = parser.add_subparsers(dest='command', required=True)
    for name in get_args(Command):
        commands.add_parser(name, parents=[common])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    tol = DEFAULT_TOLERANCES.update(**dict(args.tol)) if args.tol else DEFAULT_TOLERANCES
    jobs = args.jobs if args.jobs is not None else default_jobs()
    try:
        return RunConfig(
            command=args.command,
            alpha=args.alpha,
            r=args.r,
            n=args.n,
            p=args.p,
            s=args.s,
            beta=args.beta,
            output=args.output,
            fmt=args.fmt,
            tol=tol,
            jobs=jobs,
            grid_min=args.grid_min,
            grid_max=args.grid_max,
            grid_count=args.grid_count,
            summary=args.summary,
        )
    except pydantic.ValidationError as e:
        error = e.errors()[0]
        field = str(error['loc'][0]) if error['loc'] else None
        raise ArgumentError(f"invalid {field}: {error['msg']}", field=field)


def _require_orders(config: RunConfig) -> list[int]:
    if not config.n:
        raise ArgumentError(f'{config.command} needs --n', field='n')
    return config.n


def _characteristics_rows(config: RunConfig) -> list[dict[str, Any]]:
    spec = config.spec
    thresholds = None
    if spec.kind == 'exponential':
        try:
            thresholds = exp_family_thresholds(config.alpha, config.r)
        except DomainError as e:
            logger.info(f'no uniform thresholds: {e.message}')
    rows = []
    for n in _require_orders(config):
        c = characteristics(spec, n, config.tol)
        row: dict[str, Any] = {
            'alpha': spec.alpha,
            'r': spec.r,
            'n': n,
            'psi': psi_eval(spec, n),
            'eta': c.eta,
            'eta_minus_t': c.eta_minus_t,
            'mu': c.mu,
        }
        if thresholds is not None:
            row.update(a=thresholds.a, b=thresholds.b, n_min=thresholds.n_min)
        rows.append(row)
    return rows


def _classify_rows(config: RunConfig) -> list[dict[str, Any]]:
    spec = config.spec
    grid = log_grid(config.grid_min, config.grid_max, config.grid_count)
    report = classify(spec, grid, config.tol)
    witnesses = ';'.join(
        f"{name}:{' '.join(format(t, '.17g') for t in ts)}" for name, ts in sorted(report.witnesses.items())
    )
    return [
        {
            'alpha': spec.alpha,
            'r': spec.r,
            'grid_min': config.grid_min,
            'grid_max': config.grid_max,
            'grid_count': config.grid_count,
            'in_M': report.in_M,
            'mu_increasing_to_infinity': report.mu_increasing_to_infinity,
            'eta_gap_bounded_above': report.eta_gap_bounded_above,
            'eta_gap_bounded_below': report.eta_gap_bounded_below,
            'witnesses': witnesses,
        }
    ]


def _kernel_row(task: tuple[PsiSpec, int, float, float, Tolerances]) -> dict[str, Any]:
    spec, n, beta, p, tol = task
    kspec = KernelSpec(psi=spec, beta=beta, n=n)
    norm = lp_norm(kernel_poly(kspec, tol), p, tol)
    return {
        'alpha': spec.alpha,
        'r': spec.r,
        'n': n,
        'beta': beta,
        'p': p,
        'terms': kernel_terms(kspec, tol) - n,
        'norm': norm,
        'norm_over_pi': norm / math.pi,
    }


def _extremal_row(params: BoundParams) -> dict[str, Any]:
    assert params.p is not None
    f = build_extremal(params)
    support = extremal_support(params.spec, params.n, params.tol)
    best = best_uniform(f, params.n - 1, params.tol)
    row = params.to_record()
    row.update(
        e1=support.e1,
        e2=support.e2,
        gap1=support.gap1,
        gap2=support.gap2,
        derivative_norm=lp_norm(psi_beta_derivative(f, params.spec, params.beta), params.p, params.tol),
        best_uniform_error=best.error,
        fourier_error=fourier_error(f, params.n - 1, math.inf, params.tol),
        equioscillation_residual=best.diagnostics.get('equioscillation_residual'),
        polynomial=f.to_record(),
    )
    return row


def _verify(task: tuple[str, BoundParams]) -> list[BoundReport]:
    kind, params = task
    if kind == 'theorem1':
        return [verify_theorem1(params)]
    if kind == 'theorem2':
        return [verify_theorem2(params)]
    if kind == 'derivative_ball':
        return [verify_derivative_ball(params)]
    if kind == 'duality':
        return [verify_duality_chain(params)]
    if kind == 'lemmas':
        return verify_lemmas(params)
    raise ArgumentError(f'unknown verification {kind!r}', field='command')


def _verification_tasks(config: RunConfig) -> list[tuple[str, BoundParams]]:
    spec, tol = config.spec, config.tol
    tasks: list[tuple[str, BoundParams]] = []
    for n in _require_orders(config):
        if config.command == 'verify-thm1':
            for p in config.p:
                for beta in config.beta:
                    tasks.append(('theorem1', BoundParams.at(spec, n, beta, p=p, tol=tol)))
        elif config.command == 'verify-thm2':
            for s in config.s:
                for beta in config.beta:
                    tasks.append(('theorem2', BoundParams.at(spec, n, beta, s=s, tol=tol)))
        else:
            for beta in config.beta:
                tasks.append(('lemmas', BoundParams.at(spec, n, beta, tol=tol)))
    return tasks


def _sweep_points(config: RunConfig) -> list[SweepPoint]:
    spec, tol = config.spec, config.tol
    return [
        (
            BoundParams.at(spec, n, beta, tol=tol),
            [BoundParams.at(spec, n, beta, p=p, tol=tol) for p in config.p],
            [BoundParams.at(spec, n, beta, s=s, tol=tol) for s in config.s],
        )
        for n in _require_orders(config)
        for beta in config.beta
    ]


def _sweep_point(point: SweepPoint) -> list[BoundReport]:
    """
    Lemmas first, then the uniform and L_s checks at the same (n, beta).

    Theorem rows are emitted only when no lemma failed at the point; the lemma rows carry the
    failure instead.
    """
    base, uniform, mean = point
    reports = verify_lemmas(base)
    gated = not any(report.status == 'failed' for report in reports)
    if not gated:
        logger.warning(f'lemmas failed at n={base.n}, beta={base.beta:g}; theorem rows skipped')
    for params in uniform:
        reports.append(verify_derivative_ball(params))
        if gated and params.p is not None and math.isfinite(params.p):
            reports.append(verify_theorem1(params, gate=False))
        reports.append(verify_duality_chain(params))
    for params in mean:
        if gated:
            reports.append(verify_theorem2(params, gate=False))
        reports.append(verify_duality_chain(params))
    return reports


def _corollary_results(config: RunConfig) -> list[tuple[str, float, float, CorollaryResult]]:
    if config.spec.kind != 'exponential':
        raise ArgumentError('corollaries need the exponential family', field='psi')
    ns = _require_orders(config)
    results = []
    for beta in config.beta:
        if config.command == 'verify-cor1':
            for p in config.p:
                result = verify_corollary1(config.alpha, config.r, p, ns, beta, config.tol, config.jobs)
                results.append(('corollary1', p, beta, result))
        else:
            for s in config.s:
                result = verify_corollary2(config.alpha, config.r, s, ns, beta, config.tol, config.jobs)
                results.append(('corollary2', s, beta, result))
    return results


def _summary_rows(results: list[tuple[str, float, float, CorollaryResult]]) -> list[dict[str, Any]]:
    rows = []
    for check, exponent, beta, result in results:
        summary = result.summary
        for n, report, rate, ratio in zip(summary.ns, result.reports, summary.rates, summary.ratios):
            rows.append(
                {
                    'check': check,
                    'exponent': exponent,
                    'beta': beta,
                    'n': n,
                    'measured': report.measured,
                    'rate': rate,
                    'ratio': ratio,
                    'band': summary.band,
                    'finite': summary.finite,
                }
            )
    return rows


def run(config: RunConfig) -> int:
    """
    Runs one command and writes its report.

    Returns:
        int: 0 when every verification passed or was inconclusive, 1 when any failed.

    Raises:
        Base: Parameter, hypothesis, output and convergence errors, mapped to exit codes by `main()`.
    """
    logger.info(f'{config.command} with {len(config.n)} orders, jobs={config.jobs}')
    command = config.command
    ok = True
    columns: Sequence[str] = REPORT_COLUMNS
    if command == 'characteristics':
        columns, rows = CHARACTERISTICS_COLUMNS, _characteristics_rows(config)
    elif command == 'classify':
        columns, rows = CLASSIFY_COLUMNS, _classify_rows(config)
    elif command == 'kernel-norm':
        tasks = [
            (config.spec, n, beta, p, config.tol)
            for n in _require_orders(config)
            for beta in config.beta
            for p in config.p
        ]
        columns, rows = KERNEL_COLUMNS, sweep_map(_kernel_row, tasks, config.jobs)
    elif command == 'extremal':
        points = [
            BoundParams.at(config.spec, n, beta, p=p, tol=config.tol)
            for n in _require_orders(config)
            for beta in config.beta
            for p in config.p
        ]
        columns, rows = EXTREMAL_COLUMNS, sweep_map(_extremal_row, points, config.jobs)
    elif command in ('verify-cor1', 'verify-cor2'):
        results = _corollary_results(config)
        rows = [report_row(report) for *_, result in results for report in result.reports]
        ok = all(result.passed for *_, result in results)
        if config.summary is not None:
            Reporter(SUMMARY_COLUMNS).write(_summary_rows(results), config.summary)
    else:
        if command == 'sweep':
            batches = sweep_map(_sweep_point, _sweep_points(config), config.jobs)
        else:
            batches = sweep_map(_verify, _verification_tasks(config), config.jobs)
        reports = [report for batch in batches for report in batch]
        rows = [report_row(report) for report in reports]
        ok = all(report.passed for report in reports)

    Reporter(columns, config.fmt).write(rows, config.output)
    if not ok:
        logger.warning(f'{command}: at least one verification failed')
    return EXIT_OK if ok else EXIT_FAILED


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    if args.log_level:
        Logger().set_level(args.log_level)
    try:
        return run(config_from_args(args))
    except ConvergenceError as e:
        print(f'psi-approx: {e}', file=sys.stderr)
        return EXIT_CONVERGENCE
    except Base as e:
        field = getattr(e, 'field', None) or getattr(e, 'path', None)
        suffix = f' [{field}]' if field else ''
        print(f'psi-approx: {e}{suffix}', file=sys.stderr)
        return EXIT_USAGE
