"""Real zeros of E_α (negative axis), C_α and S_α (positive axis) and the identities they satisfy.

Positive zeros are located in the order η₁, ρ₁, η₂, ρ₂, … : each scan starts from the previous
zero of the other family divided by α, which the interlacing αη_n < η_n < αρ_n < ρ_n < αη_{n+1}
guarantees is still below the next zero. Each sign change is polished with Brent's method and
then certified by a small bracket whose endpoint values dominate their error estimates.
"""
from __future__ import annotations
import math
from functools import lru_cache
from typing import Dict, List, Tuple

import mpmath
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import quad
from scipy.optimize import brentq
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt
from tqdm import tqdm

from . import core_special
from .config import get_settings
from .core_special import SpecialFunctionKind, check_alpha
from .errors import BracketNotFound, NoZeroFound, PantographError, QuadratureFailure, RootFindingFailure
from .logging_utils import get_logger

logger = get_logger()

EPS = core_special.EPS
FAMILIES = ('rho', 'eta', 'e_neg')

Bracket = Tuple[float, float]


class ZeroTable(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float
    rho: List[float] = Field(default_factory=list)
    eta: List[float] = Field(default_factory=list)
    e_neg: List[float] = Field(default_factory=list)
    brackets: Dict[str, List[Bracket]] = Field(default_factory=dict)
    refine_tol: float
    failures: Dict[str, str] = Field(default_factory=dict)
    tail_flags: List[str] = Field(default_factory=list)

    def family(self, name: str) -> List[float]:
        name = {'eneg': 'e_neg', 'E': 'e_neg', 'S': 'rho', 'C': 'eta'}.get(name, name)
        if name not in FAMILIES:
            raise ValueError(f'unknown zero family {name!r} (expected rho, eta or eneg)')
        return list(getattr(self, name))


def first_zero_estimate(kind: SpecialFunctionKind | str, alpha: float) -> float:
    """First-order approximation of η₁ (CosLike) or ρ₁ (SinLike); only used to seed scans."""
    kind = SpecialFunctionKind.parse(kind)
    alpha = check_alpha(alpha)
    if kind is SpecialFunctionKind.COS_LIKE:
        return alpha ** -0.5 * ((1 - alpha) * math.sqrt(2) + alpha * math.pi / 2)
    if kind is SpecialFunctionKind.SIN_LIKE:
        return alpha ** -1.5 * ((1 - alpha) * math.sqrt(6) + alpha * math.pi)
    raise ValueError('first_zero_estimate is defined for CosLike and SinLike only')


def _f(kind: SpecialFunctionKind, alpha: float, x: float) -> float:
    """F_α(x) divided by its largest Taylor term: same signs and zeros, always in double range."""
    sv = core_special.eval(kind, alpha, x)
    digits = core_special.largest_term_log10(kind, alpha, x)
    if digits < 200:
        return sv.value / 10.0 ** digits
    return float(sv.precise / mpmath.power(10, digits))


def _scan(kind: SpecialFunctionKind, alpha: float, start: float, direction: int,
          base_step: float, shrink: float, budget: int) -> Bracket:
    """March from `start` until the sign flips; the step follows the zero spacing |x|(1/α − 1)."""
    x = start
    fx = _f(kind, alpha, x)
    for _ in range(budget):
        h = shrink * 0.25 * max(abs(x) * (1 / alpha - 1), base_step)
        nxt = x + direction * h
        fn = _f(kind, alpha, nxt)
        if fn == 0.0 or fx * fn < 0:
            return (x, nxt) if x < nxt else (nxt, x)
        x, fx = nxt, fn
    raise BracketNotFound(
        f'no sign change of {kind.value} within {budget} steps from {start:.6g}',
        kind=kind.value, start=start, reached=x,
    )


def _scan_with_retry(kind: SpecialFunctionKind, alpha: float, start: float, direction: int,
                     base_step: float) -> Bracket:
    settings = get_settings()
    for attempt in Retrying(
        stop=stop_after_attempt(settings.bracket_attempts),
        retry=retry_if_exception_type(BracketNotFound),
        reraise=True,
    ):
        with attempt:
            k = attempt.retry_state.attempt_number - 1
            if k:
                logger.warning('bracket scan for %s retried with step /%d', kind.value, 2 ** k)
            return _scan(kind, alpha, start, direction, base_step, 0.5 ** k, settings.scan_budget * 2 ** k)
    raise AssertionError('unreachable')


def _certify(kind: SpecialFunctionKind, alpha: float, z: float, outer: Bracket, refine_tol: float) -> Bracket:
    """Smallest bracket around z whose endpoints have opposite signs above 10× their error."""
    delta = 4 * max(refine_tol, EPS) * max(1.0, abs(z))
    width = outer[1] - outer[0]
    while True:
        a, b = max(outer[0], z - delta), min(outer[1], z + delta)
        fa = core_special.eval(kind, alpha, a)
        fb = core_special.eval(kind, alpha, b)
        va, vb = fa.precise, fb.precise
        if ((va < 0) != (vb < 0) and va != 0 and vb != 0
                and abs(va) > 10 * fa.precise_error
                and abs(vb) > 10 * fb.precise_error):
            return a, b
        if delta >= width:
            break
        delta *= 8
    raise RootFindingFailure(f'could not certify the zero of {kind.value} near {z!r}', kind=kind.value, zero=z)


def _polish(kind: SpecialFunctionKind, alpha: float, bracket: Bracket, refine_tol: float) -> float:
    """Brent on the scanned bracket, then one Newton correction with the exact derivative."""
    a, b = bracket
    f = lambda x: _f(kind, alpha, x)
    z = brentq(f, a, b, xtol=refine_tol, rtol=max(refine_tol, 4 * EPS), maxiter=200)
    # Newton sur les valeurs étendues : F et F' peuvent dépasser la plage double
    fz = core_special.eval(kind, alpha, z).precise
    slope = core_special.eval_derivative(kind, 1, alpha, z).precise
    if slope != 0 and fz != 0:
        candidate = float(z - fz / slope)
        if a <= candidate <= b and abs(core_special.eval(kind, alpha, candidate).precise) < abs(fz):
            z = candidate
    return float(z)


def _locate(kind: SpecialFunctionKind, alpha: float, start: float, direction: int,
            refine_tol: float, base_step: float) -> Tuple[float, Bracket]:
    scanned = _scan_with_retry(kind, alpha, start, direction, base_step)
    z = _polish(kind, alpha, scanned, refine_tol)
    return z, _certify(kind, alpha, z, scanned, refine_tol)


def negative_zeros(alpha: float, count: int, refine_tol: float | None = None) -> Tuple[List[float], List[Bracket]]:
    """First `count` negative zeros of E_α, decreasing; E_1 = exp has none."""
    alpha = check_alpha(alpha)
    if count < 1:
        raise ValueError('count must be >= 1')
    refine_tol = refine_tol or get_settings().refine_tol
    if alpha == 1.0:
        return [], []
    zeros: List[float] = []
    brackets: List[Bracket] = []
    start = -0.5
    for _ in range(count):
        z, bracket = _locate(SpecialFunctionKind.EXP_LIKE, alpha, start, -1, refine_tol, 1.0)
        zeros.append(z)
        brackets.append(bracket)
        start = bracket[0]
    return zeros, brackets


def build_zero_table(alpha: float, count: int, refine_tol: float | None = None) -> ZeroTable:
    """First `count` zeros of each family; tables are cached per (alpha, count, refine_tol)."""
    alpha = check_alpha(alpha)
    if count < 1:
        raise ValueError('count must be >= 1')
    refine_tol = refine_tol or get_settings().refine_tol
    if refine_tol <= 0:
        raise ValueError('refine_tol must be > 0')
    return _build_zero_table(alpha, int(count), float(refine_tol))


@lru_cache(maxsize=32)
def _build_zero_table(alpha: float, count: int, refine_tol: float) -> ZeroTable:
    settings = get_settings()
    C, S = SpecialFunctionKind.COS_LIKE, SpecialFunctionKind.SIN_LIKE
    eta: List[float] = []
    rho: List[float] = []
    brackets: Dict[str, List[Bracket]] = {name: [] for name in FAMILIES}
    failures: Dict[str, str] = {}

    start = 0.5 * first_zero_estimate(C, alpha)
    family = 'eta'
    try:
        for _ in tqdm(range(count), disable=not settings.progress, desc=f'zeros α={alpha}', leave=False):
            family = 'eta'
            z, bracket = _locate(C, alpha, start, 1, refine_tol, 0.5)
            eta.append(z)
            brackets['eta'].append(bracket)
            family = 'rho'
            z, bracket = _locate(S, alpha, eta[-1] / alpha, 1, refine_tol, 0.5)
            rho.append(z)
            brackets['rho'].append(bracket)
            start = rho[-1] / alpha
    except PantographError as exc:
        logger.warning('zero family %s stopped (%d eta, %d rho found): %s', family, len(eta), len(rho), exc)
        failures[family] = f'{type(exc).__name__}: {exc}'

    e_neg: List[float] = []
    if alpha == 1.0:
        failures['e_neg'] = 'NoZeroFound: E_1 = exp has no real zeros'
    else:
        try:
            e_neg, brackets['e_neg'] = negative_zeros(alpha, count, refine_tol)
        except PantographError as exc:
            logger.warning('zero family e_neg failed: %s', exc)
            failures['e_neg'] = f'{type(exc).__name__}: {exc}'

    return ZeroTable(
        alpha=alpha, rho=rho, eta=eta, e_neg=e_neg, brackets=brackets, refine_tol=refine_tol,
        failures=failures, tail_flags=['euler_sum tail uses the empirical ratio of the last two zeros'],
    )


def interlacing_chain(table: ZeroTable) -> List[float]:
    """αη₁, η₁, αρ₁, ρ₁, αη₂, … (scaled copies dropped when α = 1)."""
    chain: List[float] = []
    a = table.alpha
    for eta, rho in zip(table.eta, table.rho):
        chain.extend([eta, rho] if a == 1.0 else [a * eta, eta, a * rho, rho])
    return chain


def check_interlacing(table: ZeroTable) -> bool:
    chain = interlacing_chain(table)
    return bool(chain) and chain[0] > 0 and all(x < y for x, y in zip(chain, chain[1:]))


def derivative_zero_check(table: ZeroTable) -> float:
    """max |C'_α(ρ_n/α)|; S_α(ρ_n) = 0 forces these derivatives to vanish."""
    a = table.alpha
    return max(
        (abs(core_special.eval_derivative(SpecialFunctionKind.COS_LIKE, 1, a, rho / a).value) for rho in table.rho),
        default=0.0,
    )


def euler_target(alpha: float, power: int) -> float:
    alpha = check_alpha(alpha)
    if power == 2:
        return alpha ** 3 / 6
    if power == 4:
        return alpha ** 6 / 36 - alpha ** 10 / 60
    raise ValueError('power must be 2 or 4')


def euler_sum(table: ZeroTable, power: int) -> float:
    """Σ ρ_n^(−power) plus a geometric tail from the last observed ratio ρ_N/ρ_{N−1}."""
    if power not in (2, 4):
        raise ValueError('power must be 2 or 4')
    if not table.rho:
        raise ValueError('the table holds no zeros of S_alpha')
    acc = core_special.CompensatedSum(0.0)
    for rho in table.rho:
        acc.add(rho ** -power)
    tail = 0.0
    if len(table.rho) >= 2:
        q = (table.rho[-2] / table.rho[-1]) ** power
        tail = table.rho[-1] ** -power * q / (1 - q)
    return float(acc.value + tail)


def integral_identity_check(table: ZeroTable, n: int, quad_tol: float | None = None,
                            kind: SpecialFunctionKind | str = SpecialFunctionKind.COS_LIKE) -> float:
    """∫ C_α over [αρ_n, αρ_{n+1}] (or ∫ S_α over [αη_n, αη_{n+1}]); both vanish exactly."""
    kind = SpecialFunctionKind.parse(kind)
    quad_tol = quad_tol or get_settings().quad_tol
    zeros = table.rho if kind is SpecialFunctionKind.COS_LIKE else table.eta
    if n < 1 or n + 1 > len(zeros):
        raise ValueError(f'the table needs zeros through index {n + 1}')
    a, b = table.alpha * zeros[n - 1], table.alpha * zeros[n]
    value, abserr = quad(lambda x: _f(kind, table.alpha, x), a, b, epsabs=quad_tol / 10, epsrel=1e-13, limit=200)
    if abserr > quad_tol:
        raise QuadratureFailure(f'quadrature error {abserr:.3e} above {quad_tol:.3e}', interval=[a, b])
    return float(value)


def zero_relation_check(table: ZeroTable, m: int, n_terms: int) -> float:
    """Addition formula for S_α about η_m evaluated at x = ρ_m − η_m; equals S_α(ρ_m) = 0."""
    if m < 1 or m > min(len(table.rho), len(table.eta)):
        raise ValueError(f'zeros with index {m} are not in the table')
    rho, eta = table.rho[m - 1], table.eta[m - 1]
    return core_special.addition_rhs(SpecialFunctionKind.SIN_LIKE, table.alpha, rho - eta, eta, n_terms).value


def comparison_first_zero(alpha: float, k: float, h: float | None = None) -> float:
    """First positive zero of y'' = −k·y(α²x), y(0)=1, y'(0)=0, from the oracle integrator."""
    from .oracle_integrator import comparison_system, integrate

    alpha = check_alpha(alpha)
    if k <= 0:
        raise ValueError('k must be positive')
    t_end = 2 * first_zero_estimate(SpecialFunctionKind.COS_LIKE, alpha) * math.sqrt(alpha / k)
    for _ in range(3):
        trajectory = integrate(comparison_system(alpha, k), t_end, h or t_end / 4000)
        roots = trajectory.roots(0)
        if roots:
            return roots[0]
        t_end *= 2
    raise NoZeroFound(f'no zero of the comparison solution below {t_end:.6g}', k=k)


def comparison_scaling_check(alpha: float, k1: float, k2: float, h: float | None = None) -> Tuple[float, float]:
    """First zeros (x₀ for k₁, x₁ for k₂); x₁ = √(k₁/k₂)·x₀ for 0 < k₁ < k₂."""
    if not (0 < k1 < k2):
        raise ValueError('requires 0 < k1 < k2')
    x0 = comparison_first_zero(alpha, k1, h)
    x1 = comparison_first_zero(alpha, k2, h)
    gap = abs(x1 - math.sqrt(k1 / k2) * x0)
    if gap > 1e-6 * x0:
        logger.warning('comparison scaling off by %.3e', gap)
    return x0, x1
