import argparse
import json
import sys
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, TypeAdapter

from . import core_special
from .bvp_eigen import eigen_residual, eigenpairs_symmetric, eigenpairs_unit_interval, gram_schmidt_basis
from .checks import SUITES, run_suites
from .config import get_settings
from .core_special import SpecialFunctionKind
from .errors import PantographError
from .export import read_json, write_csv
from .general_point import (
    Classification,
    classify_first_order,
    classify_first_order_forced,
    classify_jordan_pair,
    classify_second_order_same_point,
    classify_second_order_split,
)
from .logging_utils import get_logger
from .pantograph_solve import (
    forcing_solution,
    solve_first_order,
    solve_first_order_forced_exp,
    solve_nth_order,
    solve_second_order,
    special_solution_nth,
    special_solution_second_order,
)
from .pde_formal import heat_like_solution, sample_grid, wave_like_solution
from .solutions import ClosedFormSolution
from .zero_finder import build_zero_table

logger = get_logger()


class Diagnostics(BaseModel):
    error_estimates: Dict[str, float] = Field(default_factory=dict)
    condition_flags: List[str] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)


class OutputEnvelope(BaseModel):
    command: str
    inputs: Dict[str, Any]
    results: Any
    diagnostics: Diagnostics = Field(default_factory=Diagnostics)


def parse_forcing(text: str) -> List[Tuple[float, float]]:
    """'A:r,A:r,...' -> [(A, r), ...]"""
    out = []
    for chunk in text.split(','):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ':' not in chunk:
            raise ValueError(f'forcing term {chunk!r} must look like A:r')
        a, r = chunk.split(':', 1)
        out.append((float(a), float(r)))
    return out


def parse_builtin(text: str, basis=None) -> Callable[[float], float]:
    """'poly:c0,c1,...' (Σ c_k x^k) or 'basis:k' (the k-th sine-like mode)."""
    kind, _, spec = text.partition(':')
    if kind == 'poly':
        coeffs = [float(c) for c in spec.split(',') if c.strip()]
        if not coeffs:
            raise ValueError('poly: needs at least one coefficient')
        return lambda x: float(np.polynomial.polynomial.polyval(x, coeffs))
    if kind == 'basis':
        k = int(spec)
        if basis is None or not (1 <= k <= basis.N):
            raise ValueError(f'basis:{k} outside the {basis.N if basis else 0} available modes')
        return lambda x: basis.f(k, x)
    raise ValueError(f'unknown built-in function {text!r} (expected poly:... or basis:k)')


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog='pantograph', description='Linear pantograph equations y\'(x) = b*y(a*x): special functions, zeros, solvers and checks.')
    p.add_argument('--progress', action='store_true', help='Show progress bars on stderr')
    sub = p.add_subparsers(dest='command', required=True)

    e = sub.add_parser('eval', help='Evaluate E, C, S or L')
    e.add_argument('--fn', required=True, choices=['E', 'C', 'S', 'L'])
    e.add_argument('--alpha', type=float, required=True)
    e.add_argument('--x', type=float, required=True, help='Argument (for L: the point 1+x)')
    e.add_argument('--deriv', type=int, default=0, help='Derivative order (E, C, S only)')

    z = sub.add_parser('zeros', help='Zero table of E (negative axis), C and S')
    z.add_argument('--alpha', type=float, required=True)
    z.add_argument('--count', type=int, required=True)
    z.add_argument('--family', choices=['rho', 'eta', 'eneg'], help='Restrict the output to one family')
    z.add_argument('--refine-tol', type=float)
    z.add_argument('--csv', help='Write the zeros with their brackets to this CSV file')

    s = sub.add_parser('solve', help='Closed-form solution of an IVP at the origin')
    s.add_argument('--order', type=int)
    s.add_argument('--alpha', type=float)
    s.add_argument('--coeffs', type=float, nargs='+', help='p_0 ... p_{n-1} (order 1: beta)')
    s.add_argument('--init', type=float, nargs='+', help='y(0), y\'(0), ...')
    s.add_argument('--forcing', help='Sum of A*E_alpha(r x) terms as A:r,A:r,...')
    s.add_argument('--from-json', help='Re-evaluate the solution stored in a previous solve output')
    s.add_argument('--t-end', type=float, default=2.0)
    s.add_argument('--samples', type=int, default=21)
    s.add_argument('--csv', help='Write sampled (x, y) to this CSV file')

    c = sub.add_parser('classify', help='Existence and uniqueness at a general initial point')
    mode = c.add_mutually_exclusive_group(required=True)
    mode.add_argument('--k', type=float, help='First order y\' = k*y(alpha x)')
    mode.add_argument('--pq', type=float, nargs=2, metavar=('P', 'Q'), help='Second order y\'\' + p y\'(ax) + q y(a^2x) = 0')
    mode.add_argument('--jordan', type=float, metavar='LAMBDA', help='Jordan pair with eigenvalue lambda')
    c.add_argument('--alpha', type=float, required=True)
    c.add_argument('--x0', type=float, required=True)
    c.add_argument('--data', type=float, nargs='+', required=True)
    c.add_argument('--forcing', help='First order only: A:r')
    c.add_argument('--same-point', action='store_true', help='Second order: y(x0)=A, y\'(x0)=B instead of y\'(x0/alpha)=B')
    c.add_argument('--zeros', type=int, default=10, help='Size of the zero table used by the gates')

    g = sub.add_parser('eigen', help='Eigenpairs of y\'\' = lambda*y(alpha^2 x) with Dirichlet conditions')
    g.add_argument('--alpha', type=float, required=True)
    g.add_argument('--count', type=int, required=True)
    g.add_argument('--symmetric', type=float, metavar='L', help='Use [-L, L] instead of [0, 1]')
    g.add_argument('--csv')

    d = sub.add_parser('pde', help='Truncated separated-variables solution of the heat-like or wave-like PDE')
    d.add_argument('--kind', required=True, choices=['heat', 'wave'])
    d.add_argument('--alpha', type=float, required=True)
    d.add_argument('--beta', type=float, required=True)
    d.add_argument('--phi', default='poly:0,1,-1', help='poly:c0,c1,... or basis:k')
    d.add_argument('--psi', default='poly:0', help='Initial velocity (wave only)')
    d.add_argument('--modes', type=int, required=True)
    d.add_argument('--normalization', choices=['corrected', 'printed'], default='corrected')
    d.add_argument('--t-max', type=float, default=1.0)
    d.add_argument('--nx', type=int, default=11)
    d.add_argument('--nt', type=int, default=5)
    d.add_argument('--csv')

    k = sub.add_parser('check', help='Run acceptance suites')
    k.add_argument('--suite', nargs='+', default=['all'], choices=['all'] + list(SUITES))
    k.add_argument('--alpha', type=float, nargs='+', help='Override the alphas of each suite')
    k.add_argument('--instances', type=int, default=20, help='Random instances per family (oracle suite)')
    return p


def parse_args(argv: Sequence[str] | None = None) -> Tuple[argparse.ArgumentParser, argparse.Namespace]:
    p = build_parser()
    args = p.parse_args(argv)
    if args.command == 'solve' and not args.from_json:
        if args.order is None or args.alpha is None or args.coeffs is None or args.init is None:
            p.error('solve needs --order, --alpha, --coeffs and --init (or --from-json)')
        if len(args.coeffs) != args.order or len(args.init) != args.order:
            p.error(f'--coeffs and --init need {args.order} values each')
    if args.command == 'eval' and args.fn == 'L' and args.deriv:
        p.error('--deriv is not available for L')
    if args.command == 'classify':
        expected = 1 if args.k is not None else 2
        if len(args.data) != expected:
            p.error(f'--data needs {expected} value(s) for this equation')
        if args.forcing and args.k is None:
            p.error('--forcing is only supported with --k')
    return p, args


def _inputs(args: argparse.Namespace) -> Dict[str, Any]:
    return {k: v for k, v in vars(args).items() if k not in ('command', 'progress') and v is not None}


def cmd_eval(args) -> OutputEnvelope:
    if args.fn == 'L':
        sv = core_special.eval_L(args.alpha, args.x)
    else:
        sv = core_special.eval_derivative(SpecialFunctionKind.parse(args.fn), args.deriv, args.alpha, args.x)
    flags = ['extended-precision'] if sv.extended else []
    return OutputEnvelope(command='eval', inputs=_inputs(args), results=sv.model_dump(),
                          diagnostics=Diagnostics(error_estimates={'value': sv.abs_error_estimate}, condition_flags=flags))


def cmd_zeros(args) -> OutputEnvelope:
    table = build_zero_table(args.alpha, args.count, args.refine_tol)
    families = [args.family] if args.family else ['rho', 'eta', 'eneg']
    if args.family:
        results: Any = {'alpha': table.alpha, args.family: table.family(args.family)}
    else:
        results = table.model_dump()
    if args.csv:
        rows = []
        for name in families:
            key = 'e_neg' if name == 'eneg' else name
            for n, (value, bracket) in enumerate(zip(table.family(name), table.brackets.get(key, [])), start=1):
                rows.append([name, n, value, bracket[0], bracket[1]])
        write_csv(args.csv, ['family', 'n', 'zero', 'bracket_lo', 'bracket_hi'], rows)
    warnings = [f'{family}: {message}' for family, message in table.failures.items()] + list(table.tail_flags)
    return OutputEnvelope(command='zeros', inputs=_inputs(args), results=results,
                          diagnostics=Diagnostics(error_estimates={'refine_tol': table.refine_tol}, warnings=warnings))


def _solve(args) -> ClosedFormSolution:
    alpha, n = args.alpha, args.order
    forcing = parse_forcing(args.forcing) if args.forcing else []
    if n == 1:
        beta, y0 = args.coeffs[0], args.init[0]
        solution = solve_first_order(alpha, beta, y0)
        for A, r in forcing:
            solution = solution + solve_first_order_forced_exp(alpha, beta, 0.0, A, r)
        return solution
    p = list(args.coeffs)
    if forcing:
        particular = (special_solution_second_order(alpha, p[1], p[0], forcing) if n == 2
                      else special_solution_nth(alpha, p, forcing))
    else:
        particular = ClosedFormSolution.zero(alpha)
    # conditions initiales reportées sur la partie homogène
    init = [c - particular.derivative(0.0, i) for i, c in enumerate(args.init)]
    homogeneous = solve_second_order(alpha, p[1], p[0], *init) if n == 2 else solve_nth_order(alpha, p, init)
    return homogeneous + particular


def cmd_solve(args) -> OutputEnvelope:
    if args.from_json:
        stored = read_json(args.from_json)
        payload = stored.get('results', stored).get('solution', stored) if isinstance(stored, dict) else stored
        solution = ClosedFormSolution.model_validate(payload)
    else:
        solution = _solve(args)
    xs = np.linspace(0.0, args.t_end, args.samples)
    samples = [[float(x), solution.evaluate(float(x))] for x in xs]
    if args.csv:
        write_csv(args.csv, ['x', 'y'], samples)
    settings = get_settings()
    return OutputEnvelope(
        command='solve', inputs=_inputs(args),
        results={'solution': solution.model_dump(), 'samples': samples},
        diagnostics=Diagnostics(error_estimates={'series_rel_tol': settings.rel_tol}, warnings=list(solution.warnings)),
    )


def cmd_classify(args) -> OutputEnvelope:
    table = build_zero_table(args.alpha, args.zeros)
    if args.k is not None:
        if args.forcing:
            forcing = parse_forcing(args.forcing)
            if len(forcing) != 1:
                raise ValueError('classify accepts a single A:r forcing term')
            result = classify_first_order_forced(args.alpha, args.k, forcing[0], args.x0, args.data[0], table)
        else:
            result = classify_first_order(args.alpha, args.k, args.x0, args.data[0], table)
    elif args.jordan is not None:
        result = classify_jordan_pair(args.alpha, args.jordan, args.x0, *args.data, table)
    else:
        p, q = args.pq
        classify = classify_second_order_same_point if args.same_point else classify_second_order_split
        result = classify(args.alpha, p, q, args.x0, *args.data, table)
    dumped = TypeAdapter(Classification).dump_python(result, mode='json')
    gates = getattr(result, 'gates', [])
    return OutputEnvelope(
        command='classify', inputs=_inputs(args), results=dumped,
        diagnostics=Diagnostics(
            error_estimates={f'gate_{i}': g.abs_error for i, g in enumerate(gates)},
            condition_flags=[g.condition_flag.value for g in gates],
            warnings=[f'{f}: {m}' for f, m in table.failures.items()],
        ),
    )


def cmd_eigen(args) -> OutputEnvelope:
    table = build_zero_table(args.alpha, args.count)
    if args.symmetric is not None:
        pairs = eigenpairs_symmetric(args.alpha, args.symmetric, args.count, table)
        xs = np.linspace(-args.symmetric, args.symmetric, 22)[1:-1]
    else:
        pairs = eigenpairs_unit_interval(args.alpha, args.count, table)
        xs = np.linspace(0.0, 1.0, 22)[1:-1]
    residuals = {f'residual_{p.index}': max(eigen_residual(p, args.alpha, xs)) for p in pairs}
    if args.csv:
        write_csv(args.csv, ['index', 'lambda', 'rate', 'kind'],
                  [[p.index, p.eigenvalue, p.eigenfunction.terms[0].rate.real, p.kind.value] for p in pairs])
    return OutputEnvelope(command='eigen', inputs=_inputs(args),
                          results=[p.model_dump(mode='json', by_alias=True) for p in pairs],
                          diagnostics=Diagnostics(error_estimates=residuals))


def cmd_pde(args) -> OutputEnvelope:
    table = build_zero_table(args.alpha, args.modes)
    basis = gram_schmidt_basis(args.alpha, args.modes, table)
    phi = parse_builtin(args.phi, basis)
    if args.kind == 'heat':
        u = heat_like_solution(args.alpha, args.beta, phi, args.modes, basis, t_max=args.t_max)
    else:
        psi = parse_builtin(args.psi, basis)
        u = wave_like_solution(args.alpha, args.beta, phi, psi, args.modes, basis, args.normalization)
    grid = sample_grid(u, np.linspace(0.0, 1.0, args.nx), np.linspace(0.0, args.t_max, args.nt))
    if args.csv:
        write_csv(args.csv, ['x', 't', 'u'], grid)
    return OutputEnvelope(
        command='pde', inputs=_inputs(args),
        results={'solution': u.model_dump(mode='json'), 'grid': [list(row) for row in grid]},
        diagnostics=Diagnostics(
            error_estimates={'quad_tol': basis.quad_tol, 'orthogonality_error': basis.orthogonality_error},
            warnings=list(u.flags),
        ),
    )


def cmd_check(args) -> Tuple[OutputEnvelope, bool]:
    report = run_suites(args.suite, alphas=args.alpha, instances=args.instances)
    envelope = OutputEnvelope(
        command='check', inputs=_inputs(args),
        results={'passed': report.passed, 'checks': [r.model_dump() for r in report.results]},
        diagnostics=Diagnostics(
            error_estimates={f'{r.suite}:{r.name}': r.measured for r in report.results},
            warnings=[f'{r.suite}: {r.name} failed ({r.detail})' for r in report.failures],
        ),
    )
    return envelope, report.passed


COMMANDS = {
    'eval': cmd_eval,
    'zeros': cmd_zeros,
    'solve': cmd_solve,
    'classify': cmd_classify,
    'eigen': cmd_eigen,
    'pde': cmd_pde,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser, args = parse_args(argv)
    if args.progress:
        get_settings().progress = True
    ok = True
    try:
        if args.command == 'check':
            envelope, ok = cmd_check(args)
        else:
            envelope = COMMANDS[args.command](args)
    except PantographError as exc:
        logger.error('%s failed: %s', args.command, exc)
        diagnostic = {'command': args.command, 'error': type(exc).__name__, 'message': str(exc), 'details': exc.details}
        sys.stderr.write(json.dumps(diagnostic, default=str) + '\n')
        return 1
    except ValueError as exc:
        parser.error(str(exc))
    print(envelope.model_dump_json(indent=2, by_alias=True))
    return 0 if ok else 1


if __name__ == '__main__':
    sys.exit(main())
