"""Closed-form and power-series solvers for linear pantograph IVPs posed at the origin.

Every solver returns immutable value objects from `solutions`. Complex characteristic
roots are handled with complex coefficients and folded back to real terms by `realify`.
"""
from __future__ import annotations
import cmath
import math
from typing import Callable, List, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly
from pydantic import BaseModel, ConfigDict, Field

from .config import get_settings
from .core_special import CompensatedSum, SpecialFunctionKind, check_alpha, eval_derivative
from .errors import (
    DefectiveWithoutStructure,
    IllConditionedInitialSystem,
    ResonantFrequency,
    RootFindingFailure,
    TruncationFailure,
    UnsupportedForcing,
)
from .logging_utils import get_logger
from .solutions import BasisTerm, ClosedFormSolution, ComplexNumber, PowerSeriesSolution, merge_terms, realify

logger = get_logger()

Forcing = Sequence[Tuple[float, float]]


class CharPoly(BaseModel):
    """Σ pⱼ α^{j(j-1)/2} βʲ = 0 with p_n = 1; roots carry their detected multiplicity."""
    model_config = ConfigDict(frozen=True)

    alpha: float
    coeffs: List[float]
    roots: List[Tuple[ComplexNumber, int]] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)

    @property
    def order(self) -> int:
        return len(self.coeffs)

    def transformed(self) -> np.ndarray:
        full = list(self.coeffs) + [1.0]
        return np.array([pj * self.alpha ** (j * (j - 1) / 2) for j, pj in enumerate(full)], dtype=float)


class JordanStructure(BaseModel):
    """User-declared A = P·J·P⁻¹, J block diagonal with upper Jordan blocks in `blocks` order."""
    model_config = ConfigDict(frozen=True)

    P: List[List[ComplexNumber]]
    blocks: List[Tuple[ComplexNumber, int]]

    def jordan_matrix(self) -> np.ndarray:
        n = sum(size for _, size in self.blocks)
        J = np.zeros((n, n), dtype=complex)
        offset = 0
        for eigenvalue, size in self.blocks:
            for i in range(size):
                J[offset + i, offset + i] = eigenvalue
                if i + 1 < size:
                    J[offset + i, offset + i + 1] = 1.0
            offset += size
        return J


def forcing_solution(alpha: float, forcing: Forcing, power: int = 0) -> ClosedFormSolution:
    """Σ A_k·x^power·E_α(r_k x) as a closed form (rate stored without the α^power factor)."""
    terms = [BasisTerm(coeff=A, power=power, rate=r / alpha ** power) for A, r in forcing]
    return ClosedFormSolution(alpha=check_alpha(alpha), terms=merge_terms(terms))


def _is_zero(value: complex, scale: float, tol: float) -> bool:
    return abs(value) <= tol * max(scale, 1.0)


def solve_first_order(alpha: float, beta: float, y0: float) -> ClosedFormSolution:
    alpha = check_alpha(alpha)
    if y0 == 0:
        return ClosedFormSolution.zero(alpha)
    return ClosedFormSolution.single(alpha, y0, beta)


def solve_first_order_series(alpha: float, beta: float, a0: float,
                             forcing: Sequence[float] | Callable[[int], float] = ()) -> PowerSeriesSolution:
    """Series solution of y' = βy(αx) + q(x); polynomial forcing also gets its rearranged closed form."""
    alpha = check_alpha(alpha)
    if callable(forcing):
        return PowerSeriesSolution(alpha=alpha, beta=beta, a0=a0).attach_generator(forcing)
    coeffs = [float(c) for c in forcing]
    series = PowerSeriesSolution(alpha=alpha, beta=beta, a0=a0, forcing_coeffs=coeffs)
    if beta == 0 or not coeffs:
        return series
    closed = polynomial_closed_form(alpha, beta, a0, coeffs)
    for x in (0.25, 0.5, 1.0):
        expected = series.evaluate(x)
        got = closed.evaluate(x)
        if abs(expected - got) > 1e-9 * max(1.0, abs(expected)):
            message = f'rearranged closed form disagrees with the series at x={x}: {got!r} vs {expected!r}'
            logger.warning(message)
            closed = closed.model_copy(update={'warnings': closed.warnings + [message]})
            break
    return series.model_copy(update={'closed_form': closed})


def polynomial_closed_form(alpha: float, beta: float, a0: float, q: Sequence[float]) -> ClosedFormSolution:
    """{a0 + ΣK_k}E_α(βx) − Σ_k K_k Σ_{n≤k} α^{n(n-1)/2}βⁿxⁿ/n!, K_k = k!q_k/(β^{k+1}α^{k(k+1)/2})."""
    alpha = check_alpha(alpha)
    if beta == 0:
        raise ValueError('the rearranged closed form needs beta != 0')
    K = [math.factorial(k) * qk / (beta ** (k + 1) * alpha ** (k * (k + 1) / 2)) for k, qk in enumerate(q)]
    poly = np.zeros(len(q))
    for k, Kk in enumerate(K):
        for n in range(k + 1):
            poly[n] += Kk * alpha ** (n * (n - 1) / 2) * beta ** n / math.factorial(n)
    terms = [BasisTerm(coeff=a0 + sum(K), rate=beta)]
    terms += [BasisTerm(coeff=-c, power=n, rate=0.0) for n, c in enumerate(poly) if c != 0]
    return ClosedFormSolution(alpha=alpha, terms=merge_terms(terms))


def solve_first_order_forced_exp(alpha: float, beta: float, y0: float, A: float, r: float,
                                 power: int = 0) -> ClosedFormSolution:
    """y' = βy(αx) + A·x^power·E_α(rx), y(0) = y0."""
    alpha = check_alpha(alpha)
    tol = get_settings().resonance_tol
    matching = alpha ** (power + 1) * beta
    resonant = _is_zero(r - matching, abs(r) + abs(matching), tol)
    if power > 0 and not resonant:
        raise UnsupportedForcing(
            f'x^{power} forcing has a closed form only for r = alpha^{power + 1}*beta', r=r, expected=matching,
        )
    if resonant:
        terms = [BasisTerm(coeff=y0, rate=beta), BasisTerm(coeff=A / (power + 1), power=power + 1, rate=beta)]
        return ClosedFormSolution(alpha=alpha, terms=merge_terms(terms))
    B = A * alpha / (r - alpha * beta)
    terms = [BasisTerm(coeff=y0 - B, rate=beta), BasisTerm(coeff=B, rate=r / alpha)]
    return ClosedFormSolution(alpha=alpha, terms=merge_terms(terms))


def _discriminant(alpha: float, p: float, q: float) -> Tuple[float, bool]:
    delta = p * p - 4 * alpha * q
    scale = max(p * p, 4 * alpha * abs(q))
    degenerate = abs(delta) <= get_settings().degenerate_tol * scale
    return delta, degenerate


def second_order_roots(alpha: float, p: float, q: float) -> Tuple[complex, complex, bool, float]:
    """Roots β₁, β₂ of αβ² + pβ + q = 0, plus the repeated-root flag and Δ."""
    delta, degenerate = _discriminant(alpha, p, q)
    if degenerate:
        beta = -p / (2 * alpha)
        return complex(beta), complex(beta), True, delta
    s = cmath.sqrt(delta)
    return (-p + s) / (2 * alpha), (-p - s) / (2 * alpha), False, delta


def solve_second_order(alpha: float, p: float, q: float, c1: float, c2: float) -> ClosedFormSolution:
    """y'' + p·y'(αx) + q·y(α²x) = 0, y(0) = c1, y'(0) = c2."""
    alpha = check_alpha(alpha)
    b1, b2, repeated, delta = second_order_roots(alpha, p, q)
    warnings: List[str] = []
    if repeated:
        if delta != 0:
            message = f'discriminant {delta:.3e} treated as zero (repeated root)'
            logger.warning(message)
            warnings.append(message)
        beta = b1.real
        terms = [BasisTerm(coeff=c1, rate=beta), BasisTerm(coeff=c2 - c1 * beta, power=1, rate=beta)]
        return ClosedFormSolution(alpha=alpha, terms=merge_terms(terms), warnings=warnings)
    a1 = (c1 * b2 - c2) / (b2 - b1)
    a2 = (c1 * b1 - c2) / (b1 - b2)
    terms = realify([BasisTerm(coeff=a1, rate=b1), BasisTerm(coeff=a2, rate=b2)])
    return ClosedFormSolution(alpha=alpha, terms=terms, warnings=warnings)


def solve_second_order_operator(alpha: float, p: float, q: float, c1: float, c2: float) -> ClosedFormSolution:
    """Factorised form (D − λ₁T_α)(D − λ₂T_α): λ₁ + αλ₂ = −p, λ₁λ₂ = q, basis E_α(λ₁x/α), E_α(λ₂x)."""
    alpha = check_alpha(alpha)
    _, lam2, repeated, _ = second_order_roots(alpha, p, q)
    if repeated:
        return solve_second_order(alpha, p, q, c1, c2)
    lam1 = -p - alpha * lam2
    # y(0) = a1 + a2, y'(0) = a1·λ₁/α + a2·λ₂
    M = np.array([[1.0, 1.0], [lam1 / alpha, lam2]], dtype=complex)
    a1, a2 = np.linalg.solve(M, np.array([c1, c2], dtype=complex))
    terms = realify([BasisTerm(coeff=a1, rate=lam1 / alpha), BasisTerm(coeff=a2, rate=lam2)])
    return ClosedFormSolution(alpha=alpha, terms=terms)


def solve_pure_second_order(gamma: float, A: float, c1: float, c2: float) -> ClosedFormSolution:
    """y'' = A·y(γx): α = √γ and the roots ±√(A/α)."""
    if not (0 < gamma <= 1):
        raise ValueError(f'gamma must lie in (0, 1], got {gamma}')
    return solve_second_order(math.sqrt(gamma), 0.0, -A, c1, c2)


def special_solution_second_order(alpha: float, p: float, q: float, forcing: Forcing) -> ClosedFormSolution:
    """Particular solution for Σ A_k E_α(r_k x), with the two resonance corrections."""
    alpha = check_alpha(alpha)
    tol = get_settings().resonance_tol
    terms: List[BasisTerm] = []
    for A, r in forcing:
        Q = r * r + p * r * alpha + q * alpha ** 3
        dQ = 2 * r + p * alpha
        if not _is_zero(Q, r * r + abs(p * r) * alpha + abs(q) * alpha ** 3, tol):
            terms.append(BasisTerm(coeff=A * alpha ** 3 / Q, rate=r / alpha ** 2))
        elif not _is_zero(dQ, 2 * abs(r) + abs(p) * alpha, tol):
            terms.append(BasisTerm(coeff=A * alpha / dQ, power=1, rate=r / alpha ** 2))
        else:
            terms.append(BasisTerm(coeff=A / 2, power=2, rate=r / alpha ** 2))
    return ClosedFormSolution(alpha=alpha, terms=merge_terms(terms))


def char_poly(alpha: float, p: Sequence[float]) -> CharPoly:
    """Roots by companion-matrix eigenvalues, multiplicities by clustering + derivative test."""
    alpha = check_alpha(alpha)
    if len(p) < 1:
        raise ValueError('at least one coefficient is required')
    settings = get_settings()
    proto = CharPoly(alpha=alpha, coeffs=[float(c) for c in p])
    c = proto.transformed()
    n = len(c) - 1
    raw = npoly.polyroots(c) if n > 1 else np.array([-c[0] / c[1]], dtype=complex)
    raw = np.asarray(raw, dtype=complex)
    scale_of = lambda z: float(np.sum(np.abs(c) * np.maximum(1.0, abs(z)) ** np.arange(n + 1)))
    for z in raw:
        if abs(npoly.polyval(z, c)) > 1e-8 * scale_of(z):
            raise RootFindingFailure('characteristic root failed the residual test', root=str(z))

    radius = max(settings.cluster_tol, 10 * np.finfo(float).eps ** (1.0 / n))
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(raw[i] - raw[j]) <= radius * max(1.0, abs(raw[i]), abs(raw[j])):
                parent[find(i)] = find(j)
    groups: dict[int, List[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)

    roots: List[Tuple[complex, int]] = []
    warnings: List[str] = []
    for members in groups.values():
        mean = complex(np.mean(raw[members]))
        m = len(members)
        if m > 1 and not _multiplicity_holds(c, mean, m, scale_of(mean)):
            message = f'root cluster near {mean:.6g} failed the derivative test, kept as distinct roots'
            logger.warning(message)
            warnings.append(message)
            roots.extend((_clean(complex(raw[i])), 1) for i in members)
            continue
        roots.append((_clean(mean), m))
    roots.sort(key=lambda item: (item[0].real, item[0].imag))
    return proto.model_copy(update={'roots': roots, 'warnings': warnings})


def _multiplicity_holds(c: np.ndarray, z: complex, m: int, scale: float) -> bool:
    deriv = c
    for k in range(m):
        if abs(npoly.polyval(z, deriv)) > 1e-6 * scale:
            return False
        deriv = npoly.polyder(deriv)
    return True


def _clean(z: complex) -> complex:
    if abs(z.imag) <= 1e-12 * max(1.0, abs(z)):
        return complex(z.real, 0.0)
    return z


def nth_order_basis(poly: CharPoly) -> List[BasisTerm]:
    return [BasisTerm(coeff=1.0, power=j, rate=root) for root, mult in poly.roots for j in range(mult)]


def solve_nth_order(alpha: float, p: Sequence[float], init: Sequence[float]) -> ClosedFormSolution:
    """y⁽ⁿ⁾ + Σ pⱼ y⁽ʲ⁾(α^{n-j}x) = 0 with y⁽ⁱ⁾(0) = cᵢ."""
    alpha = check_alpha(alpha)
    if len(init) != len(p):
        raise ValueError(f'expected {len(p)} initial values, got {len(init)}')
    settings = get_settings()
    poly = char_poly(alpha, p)
    basis = nth_order_basis(poly)
    n = len(basis)
    M = np.array([[term.derivative(alpha, 0.0, i) for term in basis] for i in range(n)], dtype=complex)
    cond = float(np.linalg.cond(M))
    if not math.isfinite(cond) or cond > settings.condition_limit:
        logger.warning('initial system condition number %.3e', cond)
        raise IllConditionedInitialSystem(
            f'initial-value system is ill-conditioned (cond={cond:.3e})', condition_number=cond,
        )
    coeffs = np.linalg.solve(M, np.asarray(init, dtype=complex))
    terms = realify([term.scaled(a) for term, a in zip(basis, coeffs)])
    solution = ClosedFormSolution(alpha=alpha, terms=terms, warnings=list(poly.warnings))
    residual = max(abs(apply_operator(solution, p, x)) for x in (0.25, 0.5, 1.0))
    if residual > 1e-6 * max(1.0, sum(abs(t.coeff) for t in terms)):
        message = f'operator residual {residual:.3e} at sample points'
        logger.warning(message)
        solution = solution.model_copy(update={'warnings': solution.warnings + [message]})
    return solution


def special_solution_nth(alpha: float, p: Sequence[float], forcing: Forcing) -> ClosedFormSolution:
    """Σ B_k E_α(r_k x/αⁿ) with B_k = A_k / Σⱼ pⱼ r_kʲ α^{-j(2n-j+1)/2}."""
    alpha = check_alpha(alpha)
    tol = get_settings().resonance_tol
    full = list(p) + [1.0]
    n = len(p)
    terms: List[BasisTerm] = []
    for index, (A, r) in enumerate(forcing):
        parts = [pj * r ** j * alpha ** (-j * (2 * n - j + 1) / 2) for j, pj in enumerate(full)]
        denominator = sum(parts)
        if _is_zero(denominator, sum(abs(v) for v in parts), tol):
            raise ResonantFrequency(f'forcing rate r={r} is a resonance frequency', index=index, r=r)
        terms.append(BasisTerm(coeff=A / denominator, rate=r / alpha ** n))
    return ClosedFormSolution(alpha=alpha, terms=merge_terms(terms))


def apply_operator(solution: ClosedFormSolution, p: Sequence[float], x: float) -> float:
    """P(D, T_α)y at x: Σⱼ pⱼ y⁽ʲ⁾(α^{n-j}x), p_n = 1."""
    full = list(p) + [1.0]
    n = len(p)
    alpha = solution.alpha
    return sum(pj * solution.derivative(alpha ** (n - j) * x, j) for j, pj in enumerate(full) if pj != 0)


def nth_order_to_system(alpha: float, p: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """First-order form X'(t) = K·X(αt) with x₁ = y, x_{i+1}(t) = x_i'(t/α).

    Returns K and the scales s with x_i(0) = s_i·y⁽ⁱ⁻¹⁾(0).
    """
    alpha = check_alpha(alpha)
    n = len(p)
    K = np.zeros((n, n))
    for i in range(n - 1):
        K[i, i + 1] = 1.0
    for j, pj in enumerate(p):
        K[n - 1, j] = -pj * alpha ** ((j * (j - 1) - n * (n - 1)) / 2)
    scales = np.array([alpha ** (-(i - 1) * (i - 2) / 2) for i in range(1, n + 1)])
    return K, scales


def solve_triangular_chain(alpha: float, beta: complex, init: Sequence[complex]) -> List[ClosedFormSolution]:
    """x_n' = βx_n(αt) + x_{n+1}(αt), x_{m+1} ≡ 0."""
    alpha = check_alpha(alpha)
    m = len(init)
    if m < 1:
        raise ValueError('the chain needs at least one component')
    components: List[ClosedFormSolution] = []
    for c in range(m):
        terms = [
            BasisTerm(coeff=init[c + j] * alpha ** (j * (j - 1) / 2) / math.factorial(j), power=j, rate=beta)
            for j in range(m - c)
        ]
        components.append(ClosedFormSolution(alpha=alpha, terms=merge_terms(terms)))
    return components


def solve_linear_system(alpha: float, A: Sequence[Sequence[float]], Y0: Sequence[float],
                        structure: JordanStructure | None = None) -> List[ClosedFormSolution]:
    """Y'(t) = A·Y(αt), Y(0) = Y0, by modal decomposition."""
    alpha = check_alpha(alpha)
    settings = get_settings()
    A = np.asarray(A, dtype=float)
    Y0 = np.asarray(Y0, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or Y0.shape != (n,):
        raise ValueError('A must be square and Y0 must match its size')

    if structure is not None:
        P = np.asarray(structure.P, dtype=complex)
        J = structure.jordan_matrix()
        if J.shape != (n, n) or P.shape != (n, n):
            raise ValueError('declared Jordan structure does not match the matrix size')
        if np.linalg.norm(P @ J @ np.linalg.inv(P) - A) > 1e-8 * max(1.0, np.linalg.norm(A)):
            raise ValueError('declared Jordan structure is inconsistent with A')
        Z0 = np.linalg.solve(P, Y0.astype(complex))
        modes: List[ClosedFormSolution] = []
        offset = 0
        for eigenvalue, size in structure.blocks:
            modes.extend(solve_triangular_chain(alpha, eigenvalue, Z0[offset:offset + size]))
            offset += size
        return _combine(alpha, P, modes)

    w, V = np.linalg.eig(A)
    scale = max(1.0, float(np.max(np.abs(w))))
    gap = min((abs(w[i] - w[j]) for i in range(n) for j in range(i + 1, n)), default=np.inf)
    if gap <= settings.jordan_tol * scale and np.linalg.cond(V) > 1e8:
        raise DefectiveWithoutStructure(
            'matrix is numerically defective; declare its Jordan structure', min_gap=float(gap),
        )
    Z0 = np.linalg.solve(V, Y0.astype(complex))
    modes = [ClosedFormSolution(alpha=alpha, terms=[BasisTerm(coeff=z, rate=lam)]) for z, lam in zip(Z0, w)]
    return _combine(alpha, V, modes)


def _combine(alpha: float, P: np.ndarray, modes: List[ClosedFormSolution]) -> List[ClosedFormSolution]:
    out = []
    for i in range(P.shape[0]):
        terms: List[BasisTerm] = []
        for col, mode in enumerate(modes):
            if P[i, col] != 0:
                terms.extend(t.scaled(P[i, col]) for t in mode.terms)
        out.append(ClosedFormSolution(alpha=alpha, terms=realify(terms)))
    return out


def conservation_invariant(alpha: float, q0: float, v0: float, t: float, n_terms: int) -> float:
    """I(t) = (q0²+v0²)⁻¹ Σₙ (−t)ⁿ/n! (q0·q⁽ⁿ⁾(t) + v0·p⁽ⁿ⁾(t)), q = q0C_α + v0S_α, p(t) = q'(t/α)."""
    alpha = check_alpha(alpha)
    norm = q0 * q0 + v0 * v0
    if norm == 0:
        raise ValueError('q0 and v0 cannot both vanish')

    def q_deriv(order: int, x: float) -> float:
        return (q0 * eval_derivative(SpecialFunctionKind.COS_LIKE, order, alpha, x).value
                + v0 * eval_derivative(SpecialFunctionKind.SIN_LIKE, order, alpha, x).value)

    total = CompensatedSum(0.0)
    last = 0.0
    for n in range(n_terms):
        p_n = alpha ** (-n) * q_deriv(n + 1, t / alpha)
        last = (-t) ** n / math.factorial(n) * (q0 * q_deriv(n, t) + v0 * p_n) / norm
        total.add(last)
    if abs(last) > 0.5:
        raise TruncationFailure(f'{n_terms} terms are not enough at t={t}', last_term=last)
    return float(total.value)


def variable_coeff_check(alpha: float, gamma: float, A: float, x: float) -> float:
    """Residual of y' = γAx^{γ-1}y(αx) for y = E_{α^γ}(Ax^γ)."""
    alpha = check_alpha(alpha)
    if gamma < 1 or x <= 0:
        raise ValueError('requires gamma >= 1 and x > 0')
    a = alpha ** gamma
    u = A * x ** gamma
    dy = eval_derivative(SpecialFunctionKind.EXP_LIKE, 1, a, u).value * A * gamma * x ** (gamma - 1)
    delayed = eval_derivative(SpecialFunctionKind.EXP_LIKE, 0, a, A * (alpha * x) ** gamma).value
    return abs(dy - gamma * A * x ** (gamma - 1) * delayed)
