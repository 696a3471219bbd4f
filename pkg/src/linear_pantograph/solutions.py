"""Solution value objects shared by the solvers, the classifiers and the oracle."""
from __future__ import annotations
import math
from typing import Annotated, Any, Callable, Iterable, List, Sequence

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, PrivateAttr

from .core_special import (
    CompensatedSum,
    EvalOptions,
    SpecialFunctionKind,
    check_alpha,
    default_options,
    derivative_form,
    evaluate_at,
)
from .errors import TruncationFailure

EPS = np.finfo(float).eps


def _parse_complex(value: Any) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(value.replace(' ', ''))
    return complex(value)


def _dump_complex(value: complex) -> Any:
    return value.real if value.imag == 0.0 else [value.real, value.imag]


# réel en JSON quand la partie imaginaire est nulle, [re, im] sinon
ComplexNumber = Annotated[complex, BeforeValidator(_parse_complex), PlainSerializer(_dump_complex)]


class BasisTerm(BaseModel):
    """coeff · xᵏ · F_α(rate · αᵏ · x)."""
    model_config = ConfigDict(frozen=True)

    coeff: ComplexNumber = 1.0
    power: int = Field(0, ge=0)
    rate: ComplexNumber = 0.0
    kind: SpecialFunctionKind = SpecialFunctionKind.EXP_LIKE

    @property
    def is_complex(self) -> bool:
        return self.coeff.imag != 0.0 or self.rate.imag != 0.0

    def scaled(self, factor: complex) -> 'BasisTerm':
        return self.model_copy(update={'coeff': self.coeff * factor})

    def derivative(self, alpha: float, x: float, order: int = 0, opts: EvalOptions | None = None) -> complex:
        """Leibniz rule on xᵏ·g(x) with g(x) = F(γx), g⁽ʲ⁾(x) = γʲF⁽ʲ⁾(γx)."""
        k = self.power
        gamma = self.rate * alpha ** k
        if gamma.imag == 0.0:
            gamma = gamma.real
        total = 0.0
        for i in range(min(order, k) + 1):
            j = order - i
            falling = math.factorial(k) / math.factorial(k - i)
            xpow = x ** (k - i)
            if xpow == 0.0:
                continue
            inner = evaluate_at(self.kind, j, alpha, gamma * x, opts)
            total += math.comb(order, i) * falling * xpow * gamma ** j * inner
        return self.coeff * total

    def taylor(self, alpha: float, count: int) -> np.ndarray:
        """First `count` Taylor coefficients at 0 (complex)."""
        out = np.zeros(count, dtype=complex)
        gamma = self.rate * alpha ** self.power
        for m in range(count - self.power):
            factor, inner, _ = derivative_form(self.kind, m, alpha)
            at_zero = 0.0 if inner is SpecialFunctionKind.SIN_LIKE else 1.0
            if at_zero == 0.0:
                continue
            out[self.power + m] = self.coeff * gamma ** m * factor / math.factorial(m)
        return out


def _same_shape(a: BasisTerm, b: BasisTerm) -> bool:
    return a.kind == b.kind and a.power == b.power and a.rate == b.rate


def realify(terms: Iterable[BasisTerm], tol: float = 1e-12) -> List[BasisTerm]:
    """Fold conjugate-rate pairs into one real-valued representation.

    a·E(βx) + ā·E(β̄x) becomes 2a·E(βx) read through its real part; a purely imaginary
    rate iω is rewritten as 2Re(a)·C(ωx) − 2Im(a)·S(ωx).
    """
    pending = merge_terms(terms)
    out: List[BasisTerm] = []
    used = [False] * len(pending)
    for i, term in enumerate(pending):
        if used[i]:
            continue
        used[i] = True
        rate = term.rate
        if abs(rate.imag) <= tol * max(1.0, abs(rate)):
            coeff = term.coeff
            if abs(coeff.imag) <= tol * max(1.0, abs(coeff)):
                coeff = complex(coeff.real, 0.0)
            out.append(term.model_copy(update={'rate': complex(rate.real, 0.0), 'coeff': coeff}))
            continue
        partner = None
        for j in range(i + 1, len(pending)):
            other = pending[j]
            if used[j] or other.kind != term.kind or other.power != term.power:
                continue
            if abs(other.rate - rate.conjugate()) <= tol * max(1.0, abs(rate)):
                partner = j
                break
        if partner is None:
            out.append(term)
            continue
        used[partner] = True
        lead = term if rate.imag > 0 else pending[partner]
        a = lead.coeff
        omega = lead.rate.imag
        if abs(lead.rate.real) <= tol * abs(lead.rate) and term.kind is SpecialFunctionKind.EXP_LIKE:
            out.append(BasisTerm(coeff=2 * a.real, power=term.power, rate=omega, kind=SpecialFunctionKind.COS_LIKE))
            out.append(BasisTerm(coeff=-2 * a.imag, power=term.power, rate=omega, kind=SpecialFunctionKind.SIN_LIKE))
        else:
            out.append(BasisTerm(coeff=2 * a, power=term.power, rate=lead.rate, kind=term.kind))
    return [t for t in out if t.coeff != 0]


def merge_terms(terms: Iterable[BasisTerm]) -> List[BasisTerm]:
    merged: List[BasisTerm] = []
    for term in terms:
        for idx, existing in enumerate(merged):
            if _same_shape(existing, term):
                merged[idx] = existing.model_copy(update={'coeff': existing.coeff + term.coeff})
                break
        else:
            merged.append(term)
    return [t for t in merged if t.coeff != 0]


class ClosedFormSolution(BaseModel):
    """Finite combination of basis terms; complex terms contribute their real part."""
    model_config = ConfigDict(frozen=True)

    alpha: float
    terms: List[BasisTerm] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)

    @classmethod
    def zero(cls, alpha: float) -> 'ClosedFormSolution':
        return cls(alpha=check_alpha(alpha), terms=[])

    @classmethod
    def single(cls, alpha: float, coeff: complex, rate: complex, power: int = 0,
               kind: SpecialFunctionKind = SpecialFunctionKind.EXP_LIKE) -> 'ClosedFormSolution':
        return cls(alpha=check_alpha(alpha), terms=[BasisTerm(coeff=coeff, power=power, rate=rate, kind=kind)])

    def derivative(self, x: float, order: int = 1, opts: EvalOptions | None = None) -> float:
        opts = opts or default_options()
        acc = CompensatedSum(0.0)
        for term in self.terms:
            acc.add(complex(term.derivative(self.alpha, float(x), order, opts)).real)
        return float(acc.value)

    def evaluate(self, x: float, opts: EvalOptions | None = None) -> float:
        return self.derivative(x, 0, opts)

    def __call__(self, x: float) -> float:
        return self.evaluate(x)

    def sample(self, xs: Sequence[float], order: int = 0) -> np.ndarray:
        opts = default_options()
        return np.array([self.derivative(float(x), order, opts) for x in xs])

    def taylor_coefficients(self, count: int) -> np.ndarray:
        total = np.zeros(count, dtype=complex)
        for term in self.terms:
            total += term.taylor(self.alpha, count)
        return total.real

    def scaled(self, factor: complex) -> 'ClosedFormSolution':
        return self.model_copy(update={'terms': [t.scaled(factor) for t in self.terms]})

    def __add__(self, other: 'ClosedFormSolution') -> 'ClosedFormSolution':
        if not math.isclose(self.alpha, other.alpha, rel_tol=0, abs_tol=1e-15):
            raise ValueError('cannot add solutions with different alpha')
        return ClosedFormSolution(
            alpha=self.alpha,
            terms=merge_terms(list(self.terms) + list(other.terms)),
            warnings=list(self.warnings) + [w for w in other.warnings if w not in self.warnings],
        )

    def simplified(self) -> 'ClosedFormSolution':
        return self.model_copy(update={'terms': realify(self.terms)})

    def at_scaled_argument(self, factor: float) -> 'ClosedFormSolution':
        """x ↦ y(factor·x), still a closed form: coeff·factorᵏ, rate·factor."""
        terms = [
            t.model_copy(update={'coeff': t.coeff * factor ** t.power, 'rate': t.rate * factor})
            for t in self.terms
        ]
        return self.model_copy(update={'terms': terms})


class PowerSeriesSolution(BaseModel):
    """Coefficient stream of y' = βy(αx) + q(x), y(0) = a0: a_{n+1} = (βαⁿaₙ + qₙ)/(n+1)."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    alpha: float
    beta: float
    a0: float
    forcing_coeffs: List[float] = Field(default_factory=list)
    closed_form: ClosedFormSolution | None = None

    _generated: List[float] = PrivateAttr(default_factory=list)
    _generator: Callable[[int], float] | None = PrivateAttr(default=None)

    def attach_generator(self, generator: Callable[[int], float]) -> 'PowerSeriesSolution':
        self._generator = generator
        return self

    def forcing(self, n: int) -> float:
        if n < len(self.forcing_coeffs):
            return self.forcing_coeffs[n]
        if self._generator is not None:
            return float(self._generator(n))
        return 0.0

    def coefficient(self, n: int) -> float:
        if not self._generated:
            self._generated.append(float(self.a0))
        while len(self._generated) <= n:
            k = len(self._generated) - 1
            a_k = self._generated[k]
            self._generated.append((self.beta * self.alpha ** k * a_k + self.forcing(k)) / (k + 1))
        return self._generated[n]

    @property
    def generated_coeffs(self) -> List[float]:
        return list(self._generated)

    def coefficients(self, count: int) -> List[float]:
        self.coefficient(count - 1)
        return self._generated[:count]

    def evaluate(self, x: float, opts: EvalOptions | None = None) -> float:
        return self.derivative(x, 0, opts)

    def derivative(self, x: float, order: int = 0, opts: EvalOptions | None = None) -> float:
        """Term-by-term sum with the three-small-terms rule used by the special functions."""
        opts = opts or default_options()
        acc = CompensatedSum(0.0)
        small_run = 0
        settled = len(self.forcing_coeffs) + 2
        for n in range(order, opts.max_terms):
            term = self.coefficient(n) * math.perm(n, order) * x ** (n - order)
            acc.add(term)
            bound = opts.rel_tol * max(abs(acc.value), EPS)
            small_run = small_run + 1 if abs(term) <= bound else 0
            if small_run >= 3 and n > settled and self._forcing_settled(n, x, order, bound):
                return float(acc.value)
        raise TruncationFailure(f'power series did not settle within {opts.max_terms} terms', x=x)

    def _forcing_settled(self, n: int, x: float, order: int, bound: float, lookahead: int = 8) -> bool:
        """Generated forcing f_k feeds f_k/(k+1) into a_{k+1}; its next terms must be below `bound` too."""
        if self._generator is None:
            return True
        return all(
            abs(self.forcing(k)) / (k + 1) * math.perm(k + 1, order) * abs(x) ** (k + 1 - order) <= bound
            for k in range(n, n + lookahead)
        )

    def __call__(self, x: float) -> float:
        return self.evaluate(x)
