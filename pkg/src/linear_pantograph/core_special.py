"""Series evaluation of the exponent-like, cosine-like, sine-like and logarithm-like functions.

E_α(x) = Σ α^{n(n-1)/2} xⁿ/n!, C_α and S_α are its even/odd companions
(C_α(x) = Re E_α(ix), S_α(x) = Im E_α(ix)) and L_α is the local inverse of E_α near 1.

Every evaluation goes through a precision ladder: double precision with a compensated
running sum first, then mpmath at growing working precision while cancellation is
detected. The ladder is driven by tenacity, the same way network calls are retried.
"""
from __future__ import annotations
import math
import sys
from enum import Enum
from functools import lru_cache
from typing import Any, Callable, List, NamedTuple, Sequence, Tuple

import mpmath
import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from .config import get_settings
from .errors import AlphaOutOfRange, OutsideValidatedDomain, PrecisionLoss, TruncationFailure
from .logging_utils import get_logger

logger = get_logger()

EPS = sys.float_info.epsilon


class SpecialFunctionKind(str, Enum):
    EXP_LIKE = 'E'
    COS_LIKE = 'C'
    SIN_LIKE = 'S'
    LOG_LIKE = 'L'

    @classmethod
    def parse(cls, tag: 'str | SpecialFunctionKind') -> 'SpecialFunctionKind':
        if isinstance(tag, cls):
            return tag
        aliases = {
            'e': cls.EXP_LIKE, 'exp': cls.EXP_LIKE, 'explike': cls.EXP_LIKE,
            'c': cls.COS_LIKE, 'cos': cls.COS_LIKE, 'coslike': cls.COS_LIKE,
            's': cls.SIN_LIKE, 'sin': cls.SIN_LIKE, 'sinlike': cls.SIN_LIKE,
            'l': cls.LOG_LIKE, 'log': cls.LOG_LIKE, 'loglike': cls.LOG_LIKE,
        }
        key = str(tag).strip().lower().replace('_', '').replace('-', '')
        if key not in aliases:
            raise ValueError(f'Unknown special function kind: {tag!r}')
        return aliases[key]


class EvalOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    rel_tol: float = Field(1e-14, gt=0)
    max_terms: int = Field(500, ge=2)
    high_precision_threshold: float = Field(30.0, ge=0)
    guard_digits: int = Field(30, ge=5)
    precision_attempts: int = Field(3, ge=2)

    @classmethod
    def from_settings(cls) -> 'EvalOptions':
        s = get_settings()
        return cls(
            rel_tol=s.rel_tol,
            max_terms=s.max_terms,
            high_precision_threshold=s.high_precision_threshold,
            guard_digits=s.guard_digits,
            precision_attempts=s.precision_attempts,
        )


class SeriesValue(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    value: float
    abs_error_estimate: float = Field(ge=0)
    terms_used: int
    extended: bool = False
    # mpmath value kept when the sum was accumulated in extended precision
    exact: Any = Field(default=None, exclude=True, repr=False)
    exact_error: Any = Field(default=None, exclude=True, repr=False)

    @property
    def precise(self) -> Any:
        return self.exact if self.exact is not None else self.value

    @property
    def precise_error(self) -> Any:
        return self.exact_error if self.exact_error is not None else self.abs_error_estimate


class ComplexSeriesValue(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: complex
    abs_error_estimate: float = Field(ge=0)
    terms_used: int
    extended: bool = False


def default_options() -> EvalOptions:
    return EvalOptions.from_settings()


def check_alpha(alpha: float) -> float:
    if not (0.0 < alpha <= 1.0) or not math.isfinite(alpha):
        raise AlphaOutOfRange(f'alpha must satisfy 0 < alpha <= 1, got {alpha}', alpha=alpha)
    return float(alpha)


class CompensatedSum:
    """Running sum carrying the rounding error of each addition (two-sum).

    Works unchanged for complex numbers since complex addition is componentwise.
    """

    __slots__ = ('_s', '_c')

    def __init__(self, value: Any = 0.0):
        self._s = value
        self._c = value * 0

    @staticmethod
    def two_sum(u: Any, v: Any) -> Tuple[Any, Any]:
        s = u + v
        up = s - v
        vpp = s - up
        return s, (u - up) + (v - vpp)

    def add(self, y: Any) -> None:
        self._s, t = self.two_sum(self._s, y)
        self._c += t

    @property
    def value(self) -> Any:
        return self._s + self._c


class _Plan(NamedTuple):
    """tₙ = tₙ₋₁ · sign · α^(a·n+b) / den(n) · x^power, starting from x^lead."""
    lead: int
    power: int
    sign: int
    a: int
    b: int
    den: Callable[[int], int]


_PLANS = {
    SpecialFunctionKind.EXP_LIKE: _Plan(0, 1, 1, 1, -1, lambda n: n),
    SpecialFunctionKind.COS_LIKE: _Plan(0, 2, -1, 4, -3, lambda m: (2 * m) * (2 * m - 1)),
    SpecialFunctionKind.SIN_LIKE: _Plan(1, 2, -1, 4, -1, lambda m: (2 * m + 1) * (2 * m)),
}


class _RawSum(NamedTuple):
    value: Any
    # mpf in extended precision: the bound can leave the double range along with the value
    abs_error: Any
    terms_used: int
    extended: bool


def _largest_term_digits(plan: _Plan, alpha: float, ax: float, max_terms: int) -> float:
    """log10 of the largest term magnitude; the term ratio decreases monotonically in n."""
    if ax == 0.0:
        return 0.0
    log_t = plan.lead * math.log10(ax)
    best = log_t
    log_alpha = math.log10(alpha)
    log_x = plan.power * math.log10(ax)
    for n in range(1, max_terms):
        log_r = (plan.a * n + plan.b) * log_alpha - math.log10(plan.den(n)) + log_x
        if log_r < 0:
            break
        log_t += log_r
        best = max(best, log_t)
    return best


def largest_term_log10(kind: 'SpecialFunctionKind | str', alpha: float, x: float,
                       opts: EvalOptions | None = None) -> float:
    """log10 of the largest Taylor term of F_α at x, 0 when every term is below 1."""
    kind = SpecialFunctionKind.parse(kind)
    if kind is SpecialFunctionKind.LOG_LIKE:
        raise ValueError('LogLike is evaluated through eval_L')
    opts = opts or default_options()
    return max(0.0, _largest_term_digits(_PLANS[kind], check_alpha(alpha), abs(float(x)), opts.max_terms))


def _sum_series(plan: _Plan, alpha: Any, x: Any, opts: EvalOptions, eps: Any, final: bool) -> _RawSum:
    xp = x ** plan.power
    term = x ** plan.lead
    acc = CompensatedSum(term)
    largest = abs(term)
    small_run = 0
    for n in range(1, opts.max_terms):
        factor = plan.sign * alpha ** (plan.a * n + plan.b) / plan.den(n)
        term = term * factor * xp
        acc.add(term)
        magnitude = abs(term)
        partial = abs(acc.value)
        largest = max(largest, magnitude, partial)
        scale = max(partial, eps * largest)
        small_run = small_run + 1 if magnitude <= opts.rel_tol * scale else 0
        if small_run >= 3:
            ratio = abs(alpha ** (plan.a * (n + 1) + plan.b) / plan.den(n + 1) * xp)
            if ratio < 1:
                tail = magnitude * ratio / (1 - ratio)
                value = acc.value
                cancellation = eps * largest
                if not final and cancellation > opts.rel_tol * abs(value):
                    raise PrecisionLoss('cancellation exceeds tolerance', cancellation=float(cancellation))
                extended = eps < EPS
                bound = tail + cancellation
                return _RawSum(value, bound if extended else float(bound), n + 1, extended)
    raise TruncationFailure(
        f'series did not converge within {opts.max_terms} terms',
        x=str(x),
    )


def _ladder(plan: _Plan, alpha: float, x: Any, opts: EvalOptions) -> _RawSum:
    """Double precision first, then mpmath rungs, each with more guard digits."""
    ax = abs(complex(x))
    start = 0 if ax <= opts.high_precision_threshold else 1
    rungs = opts.precision_attempts
    digits = None
    for attempt in Retrying(
        stop=stop_after_attempt(rungs - start),
        retry=retry_if_exception_type(PrecisionLoss),
        reraise=True,
    ):
        with attempt:
            rung = start + attempt.retry_state.attempt_number - 1
            final = rung == rungs - 1
            if rung == 0:
                return _sum_series(plan, alpha, x, opts, EPS, final)
            if digits is None:
                digits = _largest_term_digits(plan, alpha, ax, opts.max_terms)
            dps = 17 + max(0, math.ceil(digits)) + opts.guard_digits * rung
            logger.debug('extended precision: %d digits for |x|=%.6g', dps, ax)
            with mpmath.workdps(dps):
                xm = mpmath.mpc(x) if isinstance(x, complex) else mpmath.mpf(x)
                raw = _sum_series(plan, mpmath.mpf(alpha), xm, opts, mpmath.mpf(10) ** (1 - dps), final)
                value = +raw.value
            return _RawSum(value, raw.abs_error, raw.terms_used, True)
    raise AssertionError('unreachable')


def _to_series_value(raw: _RawSum) -> SeriesValue:
    if raw.extended:
        return SeriesValue(
            value=float(raw.value), abs_error_estimate=float(raw.abs_error), terms_used=raw.terms_used,
            extended=True, exact=raw.value, exact_error=raw.abs_error,
        )
    return SeriesValue(value=float(raw.value), abs_error_estimate=raw.abs_error, terms_used=raw.terms_used)


def eval(kind: 'SpecialFunctionKind | str', alpha: float, x: float, opts: EvalOptions | None = None) -> SeriesValue:
    """Evaluate E_α, C_α or S_α at a real point.

    Args:
        kind: ExpLike, CosLike or SinLike
        alpha: delay ratio, 0 < alpha <= 1
        x: finite real argument
        opts: truncation and precision policy (settings when omitted)

    Returns:
        SeriesValue with the value, a tail + cancellation error bound and the number of terms
    """
    kind = SpecialFunctionKind.parse(kind)
    if kind is SpecialFunctionKind.LOG_LIKE:
        raise ValueError('LogLike is evaluated through eval_L')
    alpha = check_alpha(alpha)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f'argument must be finite, got {x}')
    return _to_series_value(_ladder(_PLANS[kind], alpha, x, opts or default_options()))


def eval_complex(alpha: float, z: complex, opts: EvalOptions | None = None) -> ComplexSeriesValue:
    """E_α at a complex argument with the same truncation and precision policy."""
    alpha = check_alpha(alpha)
    z = complex(z)
    raw = _ladder(_PLANS[SpecialFunctionKind.EXP_LIKE], alpha, z, opts or default_options())
    return ComplexSeriesValue(
        value=complex(raw.value), abs_error_estimate=float(raw.abs_error),
        terms_used=raw.terms_used, extended=raw.extended,
    )


def derivative_form(kind: 'SpecialFunctionKind | str', order: int, alpha: float) -> Tuple[float, SpecialFunctionKind, float]:
    """Return (factor, kind', scale) with F⁽ᵒʳᵈᵉʳ⁾(u) = factor · F'(scale · u)."""
    kind = SpecialFunctionKind.parse(kind)
    if order < 0:
        raise ValueError('derivative order must be >= 0')
    m, odd = divmod(order, 2)
    if kind is SpecialFunctionKind.EXP_LIKE:
        return alpha ** (order * (order - 1) / 2), kind, alpha ** order
    if kind is SpecialFunctionKind.COS_LIKE:
        if not odd:
            return (-1) ** m * alpha ** (m * (2 * m - 1)), kind, alpha ** order
        return (-1) ** (m + 1) * alpha ** (m * (2 * m + 1)), SpecialFunctionKind.SIN_LIKE, alpha ** order
    if kind is SpecialFunctionKind.SIN_LIKE:
        if not odd:
            return (-1) ** m * alpha ** (m * (2 * m - 1)), kind, alpha ** order
        return (-1) ** m * alpha ** (m * (2 * m + 1)), SpecialFunctionKind.COS_LIKE, alpha ** order
    raise ValueError('LogLike has no closed-form derivative chain')


def eval_derivative(kind: 'SpecialFunctionKind | str', order: int, alpha: float, x: float,
                    opts: EvalOptions | None = None) -> SeriesValue:
    alpha = check_alpha(alpha)
    factor, inner, scale = derivative_form(kind, order, alpha)
    sv = eval(inner, alpha, scale * x, opts)
    exact = None if sv.exact is None else sv.exact * factor
    exact_error = None if sv.exact_error is None else sv.exact_error * abs(factor)
    return SeriesValue(
        value=factor * sv.value, abs_error_estimate=abs(factor) * sv.abs_error_estimate,
        terms_used=sv.terms_used, extended=sv.extended, exact=exact, exact_error=exact_error,
    )


def _series_coefficient(kind: SpecialFunctionKind, k: int, alpha: Any) -> Any:
    if kind is SpecialFunctionKind.COS_LIKE and k % 2:
        return 0
    if kind is SpecialFunctionKind.SIN_LIKE and not k % 2:
        return 0
    sign = 1 if kind is SpecialFunctionKind.EXP_LIKE or (k // 2) % 2 == 0 else -1
    return sign * alpha ** (k * (k - 1) // 2) / mpmath.factorial(k)


def series_derivative(kind: 'SpecialFunctionKind | str', order: int, alpha: float, x: float,
                      opts: EvalOptions | None = None) -> float:
    """F⁽ᵒʳᵈᵉʳ⁾(x) by termwise differentiation of the Taylor series, in mpmath.

    Does not go through derivative_form, so it can be set against the closed-form chain.
    """
    kind = SpecialFunctionKind.parse(kind)
    if kind is SpecialFunctionKind.LOG_LIKE:
        raise ValueError('LogLike is evaluated through eval_L')
    if order < 0:
        raise ValueError('derivative order must be >= 0')
    alpha = check_alpha(alpha)
    opts = opts or default_options()
    digits = _largest_term_digits(_PLANS[kind], alpha, abs(float(x)), opts.max_terms)
    dps = 17 + max(0, math.ceil(digits)) + opts.guard_digits
    with mpmath.workdps(dps):
        a, xm = mpmath.mpf(alpha), mpmath.mpf(x)
        acc = mpmath.mpf(0)
        small_run = 0
        for k in range(order, order + 2 * opts.max_terms):
            c = _series_coefficient(kind, k, a)
            if not c:
                continue
            term = c * mpmath.ff(k, order) * xm ** (k - order)
            acc += term
            small_run = small_run + 1 if abs(term) <= opts.rel_tol * abs(acc) else 0
            if small_run >= 3:
                return float(acc)
    raise TruncationFailure(f'termwise derivative did not converge within {opts.max_terms} terms', x=x)


def evaluate_at(kind: 'SpecialFunctionKind | str', order: int, alpha: float, z: complex | float,
                opts: EvalOptions | None = None) -> complex | float:
    """Plain number F⁽ᵒʳᵈᵉʳ⁾(z); complex arguments are accepted for ExpLike only."""
    if isinstance(z, complex) and z.imag != 0.0:
        factor, inner, scale = derivative_form(kind, order, alpha)
        if inner is not SpecialFunctionKind.EXP_LIKE:
            raise ValueError('complex arguments are supported for ExpLike only')
        return factor * eval_complex(alpha, scale * z, opts).value
    return eval_derivative(kind, order, alpha, float(z.real if isinstance(z, complex) else z), opts).value


@lru_cache(maxsize=64)
def _log_like_table(alpha: float, count: int) -> Tuple[float, ...]:
    # réversion de E_α(y) − 1 = Σ eₙ yⁿ par puissances tronquées
    e = np.array([alpha ** (n * (n - 1) / 2) / math.factorial(n) for n in range(count + 1)], dtype=float)
    coeffs = np.zeros(count + 1)
    coeffs[1] = 1.0
    for k in range(2, count + 1):
        g = coeffs[:k + 1]
        power = g.copy()
        acc = e[1] * power[k]
        for n in range(2, k + 1):
            power = np.convolve(power, g)[:k + 1]
            acc += e[n] * power[k]
        coeffs[k] = -acc
    return tuple(float(c) for c in coeffs)


def log_like_coefficients(alpha: float, count: int) -> List[float]:
    """Coefficients l₀…l_count of L_α(1+x) = Σ l_k x^k (l₀ = 0, l₁ = 1)."""
    alpha = check_alpha(alpha)
    if count < 1:
        raise ValueError('count must be >= 1')
    return list(_log_like_table(alpha, count))


def eval_L(alpha: float, one_plus_x: float, opts: EvalOptions | None = None) -> SeriesValue:
    alpha = check_alpha(alpha)
    opts = opts or default_options()
    settings = get_settings()
    x = float(one_plus_x) - 1.0
    if abs(x) >= settings.log_like_radius:
        raise OutsideValidatedDomain(
            f'|x| = {abs(x):.3g} outside the validated radius {settings.log_like_radius}',
            x=x, radius=settings.log_like_radius,
        )
    coeffs = _log_like_table(alpha, settings.log_like_coefficients)
    if x == 0.0:
        return SeriesValue(value=0.0, abs_error_estimate=0.0, terms_used=1)
    acc = CompensatedSum(0.0)
    xk = 1.0
    small_run = 0
    for k in range(1, len(coeffs)):
        xk *= x
        term = coeffs[k] * xk
        acc.add(term)
        small_run = small_run + 1 if abs(term) <= opts.rel_tol * abs(acc.value) else 0
        if small_run >= 3:
            # empirical ratio from the last coefficients
            tail_ratios = [abs(coeffs[j + 1] / coeffs[j]) for j in range(max(1, k - 5), k) if coeffs[j] != 0]
            ratio = (max(tail_ratios) if tail_ratios else 0.0) * abs(x)
            if ratio >= 1:
                raise OutsideValidatedDomain('coefficient growth leaves the convergence disc', x=x)
            tail = abs(term) * ratio / (1 - ratio)
            value = acc.value
            _check_round_trip(alpha, value, one_plus_x, opts)
            return SeriesValue(value=value, abs_error_estimate=tail + EPS * abs(value), terms_used=k + 1)
    raise TruncationFailure(f'L series needs more than {len(coeffs)} coefficients', x=x)


def _check_round_trip(alpha: float, y: float, one_plus_x: float, opts: EvalOptions) -> None:
    back = eval(SpecialFunctionKind.EXP_LIKE, alpha, y, opts).value
    if abs(back - one_plus_x) > 100 * opts.rel_tol * max(1.0, abs(one_plus_x)):
        raise TruncationFailure('round trip E(L(1+x)) failed', residual=abs(back - one_plus_x))


def addition_rhs(kind: 'SpecialFunctionKind | str', alpha: float, x: float, y: float, n_terms: int,
                 opts: EvalOptions | None = None) -> SeriesValue:
    """Right-hand side of the addition formula F(x+y) = Σ xʲ/j! F⁽ʲ⁾(y), truncated.

    n_terms counts the outer index of each sub-sum: E uses j < n_terms, C and S pair the
    even and odd sums so j < 2·n_terms.
    """
    kind = SpecialFunctionKind.parse(kind)
    if n_terms < 1:
        raise ValueError('n_terms must be >= 1')
    limit = n_terms if kind is SpecialFunctionKind.EXP_LIKE else 2 * n_terms
    return _taylor_shift(kind, alpha, x, y, range(limit), 1.0, opts)


def addition_split(kind: 'SpecialFunctionKind | str', alpha: float, x: float, y: float, n_terms: int,
                   sign: int, opts: EvalOptions | None = None) -> SeriesValue:
    """F(x+y) + sign·F(x−y) from the Taylor shift about y, doubled.

    C is even, so sign=+1 keeps the even powers of x. S is odd, so F(x−y) = −F(y−x) and the
    parities swap: sign=+1 keeps the odd powers.
    """
    kind = SpecialFunctionKind.parse(kind)
    if kind not in (SpecialFunctionKind.COS_LIKE, SpecialFunctionKind.SIN_LIKE):
        raise ValueError(f'split addition forms exist for C and S only, not {kind.value}')
    if sign not in (1, -1):
        raise ValueError('sign must be +1 or -1')
    if n_terms < 1:
        raise ValueError('n_terms must be >= 1')
    keep_even = (sign == 1) != (kind is SpecialFunctionKind.SIN_LIKE)
    start = 0 if keep_even else 1
    return _taylor_shift(kind, alpha, x, y, range(start, 2 * n_terms, 2), 2.0, opts)


def _taylor_shift(kind: SpecialFunctionKind, alpha: float, x: float, y: float, orders: Sequence[int],
                  weight: float, opts: EvalOptions | None) -> SeriesValue:
    alpha = check_alpha(alpha)
    acc = CompensatedSum(0.0)
    err = 0.0
    used = 0
    last = 0.0
    for j in orders:
        coeff = weight * x ** j / math.factorial(j)
        inner = eval_derivative(kind, j, alpha, y, opts)
        last = coeff * inner.value
        acc.add(last)
        err += abs(coeff) * inner.abs_error_estimate
        used += 1
    # prochain terme omis comme estimation de la troncature
    j_next = orders[-1] + (orders[1] - orders[0] if len(orders) > 1 else 1)
    factor, _, _ = derivative_form(kind, j_next, alpha)
    nxt = weight * abs(x) ** j_next / math.factorial(j_next) * abs(factor)
    value = acc.value
    return SeriesValue(value=value, abs_error_estimate=err + nxt + EPS * abs(value), terms_used=used)


def growth_profile(kind: 'SpecialFunctionKind | str', alpha: float, radii: Sequence[float],
                   samples: int = 200, opts: EvalOptions | None = None) -> List[float]:
    """Running maximum of |F| over [0, R] for increasing R (weak unboundedness check)."""
    kind = SpecialFunctionKind.parse(kind)
    profile: List[float] = []
    running = 0.0
    lower = 0.0
    for radius in sorted(radii):
        for x in np.linspace(lower, radius, samples):
            running = max(running, abs(eval(kind, alpha, float(x), opts).value))
        profile.append(running)
        lower = radius
    return profile
