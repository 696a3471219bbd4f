"""Initial value problems posed at x₀ ≠ 0: unique solution, solution family, or no solution.

Which branch applies depends on whether E_α vanishes at the relevant arguments. Vanishing is never
decided from a floating-point value alone: a zero verdict needs both a small value and a certified
zero of the table nearby (`zero_gate`). Everything in between is reported as ambiguous.
"""
from __future__ import annotations
from enum import Enum
from typing import Annotated, List, Literal, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from . import core_special
from .config import get_settings
from .core_special import SpecialFunctionKind, check_alpha
from .errors import AmbiguousNearZero, RankAmbiguous, UnenumeratedCase
from .logging_utils import get_logger
from .pantograph_solve import second_order_roots
from .solutions import BasisTerm, ClosedFormSolution, ComplexNumber, realify
from .zero_finder import ZeroTable

logger = get_logger()


class GateFlag(str, Enum):
    CLEAR = 'Clear'
    NEAR_ZERO = 'NearZero'
    AT_ZERO = 'AtZero'


class ZeroProximityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    argument: ComplexNumber
    tested_value: float
    abs_error: float
    threshold: float
    distance_to_nearest_tabulated_zero: float
    condition_flag: GateFlag


class Unique(BaseModel):
    variant: Literal['Unique'] = 'Unique'
    solution: List[ClosedFormSolution]
    case: str
    gates: List[ZeroProximityReport] = Field(default_factory=list)
    free_params: int = 0

    @property
    def scalar(self) -> ClosedFormSolution:
        return self.solution[0]


class InfiniteFamily(BaseModel):
    variant: Literal['InfiniteFamily'] = 'InfiniteFamily'
    particular: List[ClosedFormSolution]
    null_basis: List[List[ClosedFormSolution]]
    free_params: int
    case: str
    gates: List[ZeroProximityReport] = Field(default_factory=list)

    def member(self, params: Sequence[float]) -> List[ClosedFormSolution]:
        if len(params) != self.free_params:
            raise ValueError(f'expected {self.free_params} parameters, got {len(params)}')
        out = list(self.particular)
        for c, basis in zip(params, self.null_basis):
            out = [acc + part.scaled(c) for acc, part in zip(out, basis)]
        return out


class NoSolution(BaseModel):
    variant: Literal['NoSolution'] = 'NoSolution'
    witness: str
    obstruction: float
    target: float
    error_estimate: float
    case: str
    gates: List[ZeroProximityReport] = Field(default_factory=list)
    free_params: int = 0


Classification = Annotated[Union[Unique, InfiniteFamily, NoSolution], Field(discriminator='variant')]


def _E(alpha: float, z: complex | float) -> complex | float:
    return core_special.evaluate_at(SpecialFunctionKind.EXP_LIKE, 0, alpha, z)


def zero_gate(alpha: float, argument: complex | float, zeros: ZeroTable) -> ZeroProximityReport:
    """Decide whether E_α(argument) vanishes."""
    alpha = check_alpha(alpha)
    settings = get_settings()
    z = complex(argument)
    if z.imag != 0.0:
        value = core_special.eval_complex(alpha, z)
        magnitude, err = abs(value.value), value.abs_error_estimate
        threshold = max(settings.zero_gate_abs, 50 * err)
        # les zéros de E_α sont réels
        flag = GateFlag.NEAR_ZERO if magnitude < threshold else GateFlag.CLEAR
        return ZeroProximityReport(
            argument=z, tested_value=magnitude, abs_error=err, threshold=threshold,
            distance_to_nearest_tabulated_zero=float('inf'), condition_flag=flag,
        )
    x = z.real
    sv = core_special.eval(SpecialFunctionKind.EXP_LIKE, alpha, x)
    threshold = max(settings.zero_gate_abs, 50 * sv.abs_error_estimate)
    distance = min((abs(x - e) for e in zeros.e_neg), default=float('inf'))
    near = distance <= settings.zero_proximity * max(1.0, abs(x))
    small = abs(sv.value) < threshold
    if small and near:
        flag = GateFlag.AT_ZERO
    elif small:
        flag = GateFlag.NEAR_ZERO
    else:
        flag = GateFlag.CLEAR
    return ZeroProximityReport(
        argument=x, tested_value=sv.value, abs_error=sv.abs_error_estimate, threshold=threshold,
        distance_to_nearest_tabulated_zero=distance, condition_flag=flag,
    )


def _require_decided(*gates: ZeroProximityReport) -> None:
    for gate in gates:
        if gate.condition_flag is GateFlag.NEAR_ZERO:
            raise AmbiguousNearZero(
                f'E_alpha({gate.argument}) = {gate.tested_value:.3e} is small but no certified zero is nearby',
                report=gate,
            )


def _is_data_zero(value: complex | float, scale: float = 1.0) -> bool:
    return abs(value) <= get_settings().data_zero_tol * max(1.0, abs(scale))


def _closed(alpha: float, *terms: BasisTerm) -> ClosedFormSolution:
    return ClosedFormSolution(alpha=alpha, terms=realify(terms))


def _no_solution(witness: str, obstruction: complex | float, target: complex | float,
                 gate: ZeroProximityReport, case: str, gates: List[ZeroProximityReport]) -> NoSolution:
    return NoSolution(
        witness=witness, obstruction=float(abs(obstruction)), target=float(abs(target)),
        error_estimate=abs(gate.tested_value) + gate.abs_error, case=case, gates=gates,
    )


def _log_case(name: str, result: BaseModel) -> BaseModel:
    logger.info('%s: %s %s', name, result.variant, result.case)
    return result


def classify_first_order(alpha: float, k: float, x0: float, y0: float, zeros: ZeroTable) -> Classification:
    """y' = k·y(αx), y(x₀) = y₀."""
    alpha = check_alpha(alpha)
    if x0 == 0:
        raise ValueError('x0 must be nonzero (the origin is handled by pantograph_solve)')
    gate = zero_gate(alpha, k * x0, zeros)
    _require_decided(gate)
    if gate.condition_flag is GateFlag.CLEAR:
        result = Unique(solution=[_closed(alpha, BasisTerm(coeff=y0 / gate.tested_value, rate=k))],
                        case='(i) E(kx0) != 0', gates=[gate])
    elif _is_data_zero(y0):
        result = InfiniteFamily(
            particular=[ClosedFormSolution.zero(alpha)],
            null_basis=[[_closed(alpha, BasisTerm(rate=k))]],
            free_params=1, case='(ii) E(kx0) = 0, y0 = 0', gates=[gate],
        )
    else:
        result = _no_solution('every solution c*E(kx) vanishes at x0', 0.0, y0, gate,
                              '(iii) E(kx0) = 0, y0 != 0', [gate])
    return _log_case('classify_first_order', result)


def classify_first_order_forced(alpha: float, lam: float, forcing: Tuple[float, float], x0: float, y0: float,
                                zeros: ZeroTable) -> Classification:
    """y' = λ·y(αx) + A·E_α(rx), y(x₀) = y₀; the resonant rate r = αλ gets the x·E_α(λαx) particular."""
    alpha = check_alpha(alpha)
    if x0 == 0:
        raise ValueError('x0 must be nonzero (the origin is handled by pantograph_solve)')
    A, r = forcing
    resonant = abs(r - alpha * lam) <= get_settings().resonance_tol * max(1.0, abs(r), abs(alpha * lam))
    if resonant:
        particular = _closed(alpha, BasisTerm(coeff=A, power=1, rate=lam))
        label = 'resonant'
    else:
        particular = _closed(alpha, BasisTerm(coeff=A * alpha / (r - alpha * lam), rate=r / alpha))
        label = 'non-resonant'
    gate = zero_gate(alpha, lam * x0, zeros)
    _require_decided(gate)
    at_x0 = particular.evaluate(x0)
    if gate.condition_flag is GateFlag.CLEAR:
        c = (y0 - at_x0) / gate.tested_value
        solution = particular + _closed(alpha, BasisTerm(coeff=c, rate=lam))
        result = Unique(solution=[solution], case=f'{label} (i) E(lambda x0) != 0', gates=[gate])
    elif _is_data_zero(y0 - at_x0, y0):
        result = InfiniteFamily(
            particular=[particular], null_basis=[[_closed(alpha, BasisTerm(rate=lam))]],
            free_params=1, case=f'{label} (ii) E(lambda x0) = 0, y0 = particular(x0)', gates=[gate],
        )
    else:
        result = _no_solution('every solution takes the particular value at x0', at_x0, y0, gate,
                              f'{label} (iii) E(lambda x0) = 0, y0 != particular(x0)', [gate])
    return _log_case('classify_first_order_forced', result)


def classify_jordan_pair(alpha: float, lam: float, x0: float, y1_0: float, y2_0: float,
                         zeros: ZeroTable) -> Classification:
    """y₁' = λy₁(αx) + y₂(αx), y₂' = λy₂(αx) with data at x₀; components are (y₁, y₂)."""
    alpha = check_alpha(alpha)
    if x0 == 0:
        raise ValueError('x0 must be nonzero (the origin is handled by pantograph_solve)')
    zero = ClosedFormSolution.zero(alpha)
    g0 = zero_gate(alpha, lam * x0, zeros)
    _require_decided(g0)
    if g0.condition_flag is GateFlag.CLEAR:
        E0 = g0.tested_value
        E1 = _E(alpha, lam * alpha * x0)
        y1 = _closed(alpha,
                     BasisTerm(coeff=(y1_0 - y2_0 * x0 * E1 / E0) / E0, rate=lam),
                     BasisTerm(coeff=y2_0 / E0, power=1, rate=lam))
        y2 = _closed(alpha, BasisTerm(coeff=y2_0 / E0, rate=lam))
        return _log_case('classify_jordan_pair', Unique(solution=[y1, y2], case='(i) E(lambda x0) != 0', gates=[g0]))
    if not _is_data_zero(y2_0):
        result = _no_solution('y2 = c*E(lambda x) vanishes at x0', 0.0, y2_0, g0,
                              '(v) E(lambda x0) = 0, y2(x0) != 0', [g0])
        return _log_case('classify_jordan_pair', result)
    g1 = zero_gate(alpha, lam * alpha * x0, zeros)
    _require_decided(g1)
    gates = [g0, g1]
    if g1.condition_flag is GateFlag.CLEAR:
        c = y1_0 / (x0 * g1.tested_value)
        result = InfiniteFamily(
            particular=[_closed(alpha, BasisTerm(coeff=c, power=1, rate=lam)), _closed(alpha, BasisTerm(coeff=c, rate=lam))],
            null_basis=[[_closed(alpha, BasisTerm(rate=lam)), zero]],
            free_params=1, case='(ii) E(lambda x0) = 0, y2(x0) = 0, E(lambda alpha x0) != 0', gates=gates,
        )
    elif _is_data_zero(y1_0):
        result = InfiniteFamily(
            particular=[zero, zero],
            null_basis=[
                [_closed(alpha, BasisTerm(rate=lam)), zero],
                [_closed(alpha, BasisTerm(power=1, rate=lam)), _closed(alpha, BasisTerm(rate=lam))],
            ],
            free_params=2, case='(iii) both gates vanish, y1(x0) = 0', gates=gates,
        )
    else:
        result = _no_solution('y1(x0) = c1*E(lambda x0) + c2*x0*E(lambda alpha x0) vanishes', 0.0, y1_0, g1,
                              '(iv) both gates vanish, y1(x0) != 0', gates)
    return _log_case('classify_jordan_pair', result)


def _first_component(result: BaseModel, alpha: float, case: str) -> BaseModel:
    if isinstance(result, Unique):
        return Unique(solution=result.solution[:1], case=case, gates=result.gates)
    if isinstance(result, InfiniteFamily):
        return InfiniteFamily(
            particular=result.particular[:1], null_basis=[member[:1] for member in result.null_basis],
            free_params=result.free_params, case=case, gates=result.gates,
        )
    return result.model_copy(update={'case': case})


def classify_second_order_split(alpha: float, p: float, q: float, t0: float, A: float, B: float,
                                zeros: ZeroTable) -> Classification:
    """y'' + p·y'(αt) + q·y(α²t) = 0 with y(t₀) = A and y'(t₀/α) = B."""
    alpha = check_alpha(alpha)
    if t0 == 0:
        raise ValueError('t0 must be nonzero (the origin is handled by pantograph_solve)')
    lam1, lam2, repeated, _ = second_order_roots(alpha, p, q)
    if repeated:
        lam = lam1.real
        # P = [[1, 0], [λ, 1]] : z₁ = A, z₂ = B − λA et y = z₁
        inner = classify_jordan_pair(alpha, lam, t0, A, B - lam * A, zeros)
        result = _first_component(inner, alpha, f'Case 2 {inner.case}')
        return _log_case('classify_second_order_split', result)

    z1 = (A * lam2 - B) / (lam2 - lam1)
    z2 = (A * lam1 - B) / (lam1 - lam2)
    g1 = zero_gate(alpha, lam1 * t0, zeros)
    g2 = zero_gate(alpha, lam2 * t0, zeros)
    _require_decided(g1, g2)
    gates = [g1, g2]
    clear1 = g1.condition_flag is GateFlag.CLEAR
    clear2 = g2.condition_flag is GateFlag.CLEAR
    zero = ClosedFormSolution.zero(alpha)
    scale = max(abs(A), abs(B))

    if clear1 and clear2:
        E1, E2 = _E(alpha, lam1 * t0), _E(alpha, lam2 * t0)
        y = _closed(alpha, BasisTerm(coeff=z1 / E1, rate=lam1), BasisTerm(coeff=z2 / E2, rate=lam2))
        result = Unique(solution=[y], case='Case 1 (i) both gates clear', gates=gates)
    elif not clear1 and not _is_data_zero(z1, scale):
        result = _no_solution('z1(t0) = c*E(lambda1 t0) vanishes', 0.0, z1, g1,
                              'Case 1 (v) E(lambda1 t0) = 0, z1 != 0', gates)
    elif not clear2 and not _is_data_zero(z2, scale):
        result = _no_solution('z2(t0) = c*E(lambda2 t0) vanishes', 0.0, z2, g2,
                              'Case 1 (vi) E(lambda2 t0) = 0, z2 != 0', gates)
    elif clear1:
        E1 = _E(alpha, lam1 * t0)
        result = InfiniteFamily(
            particular=[_closed(alpha, BasisTerm(coeff=z1 / E1, rate=lam1))],
            null_basis=[[_closed(alpha, BasisTerm(rate=lam2))]],
            free_params=1, case='Case 1 (ii) E(lambda2 t0) = 0, z2 = 0', gates=gates,
        )
    elif clear2:
        E2 = _E(alpha, lam2 * t0)
        result = InfiniteFamily(
            particular=[_closed(alpha, BasisTerm(coeff=z2 / E2, rate=lam2))],
            null_basis=[[_closed(alpha, BasisTerm(rate=lam1))]],
            free_params=1, case='Case 1 (iii) E(lambda1 t0) = 0, z1 = 0', gates=gates,
        )
    elif _is_data_zero(z1, scale) and _is_data_zero(z2, scale):
        result = InfiniteFamily(
            particular=[zero],
            null_basis=[[_closed(alpha, BasisTerm(rate=lam1))], [_closed(alpha, BasisTerm(rate=lam2))]],
            free_params=2, case='Case 1 (iv) both gates vanish, A = B = 0', gates=gates,
        )
    else:
        raise UnenumeratedCase('gate and data combination outside the enumerated cases',
                               z1=str(z1), z2=str(z2), gates=[g.condition_flag.value for g in gates])
    return _log_case('classify_second_order_split', result)


def same_point_matrix(alpha: float, p: float, q: float, t0: float) -> np.ndarray:
    """Coefficient matrix of (c₁, c₂) for y(t₀) = A, y'(t₀) = B on the origin basis."""
    alpha = check_alpha(alpha)
    lam1, lam2, repeated, _ = second_order_roots(alpha, p, q)
    if repeated:
        lam = lam1.real
        M = [[_E(alpha, lam * t0), t0 * _E(alpha, lam * alpha * t0)],
             [lam * _E(alpha, alpha * lam * t0),
              _E(alpha, alpha * lam * t0) + lam * alpha * t0 * _E(alpha, alpha ** 2 * lam * t0)]]
        return np.array(M, dtype=float)
    M = [[_E(alpha, lam1 * t0), _E(alpha, lam2 * t0)],
         [lam1 * _E(alpha, alpha * lam1 * t0), lam2 * _E(alpha, alpha * lam2 * t0)]]
    out = np.array(M, dtype=complex)
    return out.real.copy() if not np.any(out.imag) else out


def _same_point_basis(alpha: float, p: float, q: float) -> List[BasisTerm]:
    lam1, lam2, repeated, _ = second_order_roots(alpha, p, q)
    if repeated:
        return [BasisTerm(rate=lam1.real), BasisTerm(power=1, rate=lam1.real)]
    return [BasisTerm(rate=lam1), BasisTerm(rate=lam2)]


def _rank_decision(ratio: float, singular_values: np.ndarray, what: str) -> bool:
    """True when the matrix is numerically rank deficient; RankAmbiguous inside the band."""
    settings = get_settings()
    if ratio <= settings.rank_tol / settings.rank_band:
        return True
    if ratio >= settings.rank_tol * settings.rank_band:
        return False
    raise RankAmbiguous(
        f'{what} singular-value ratio {ratio:.3e} inside the ambiguity band',
        singular_values=[float(s) for s in singular_values],
        condition_number=float(singular_values[0] / singular_values[-1]) if singular_values[-1] else float('inf'),
    )


def classify_second_order_same_point(alpha: float, p: float, q: float, t0: float, A: float, B: float,
                                     zeros: ZeroTable) -> Classification:
    """y'' + p·y'(αt) + q·y(α²t) = 0 with y(t₀) = A and y'(t₀) = B."""
    alpha = check_alpha(alpha)
    if t0 == 0:
        raise ValueError('t0 must be nonzero (the origin is handled by pantograph_solve)')
    lam1, lam2, repeated, _ = second_order_roots(alpha, p, q)
    gates = [zero_gate(alpha, lam1 * t0, zeros)]
    if not repeated:
        gates.append(zero_gate(alpha, lam2 * t0, zeros))
    M = same_point_matrix(alpha, p, q, t0)
    basis = _same_point_basis(alpha, p, q)
    b = np.array([A, B], dtype=M.dtype)
    U, s, Vh = np.linalg.svd(M)
    case_label = 'Case 2' if repeated else 'Case 1'
    if s[0] == 0.0:
        singular = True
    else:
        singular = _rank_decision(s[-1] / s[0], s, 'coefficient matrix')

    if not singular:
        c = np.linalg.solve(M, b)
        y = _closed(alpha, *(term.scaled(ci) for term, ci in zip(basis, c)))
        return _log_case('classify_second_order_same_point',
                         Unique(solution=[y], case=f'{case_label} (i) determinant != 0', gates=gates))

    augmented = np.column_stack([M, b])
    sa = np.linalg.svd(augmented, compute_uv=False)
    if sa[0] == 0.0:
        consistent = True
    else:
        consistent = _rank_decision(sa[-1] / sa[0], sa, 'augmented matrix')
    c = np.linalg.pinv(M) @ b
    if consistent:
        null = Vh[-1].conj()
        result = InfiniteFamily(
            particular=[_closed(alpha, *(term.scaled(ci) for term, ci in zip(basis, c)))],
            null_basis=[[_closed(alpha, *(term.scaled(vi) for term, vi in zip(basis, null)))]],
            free_params=1, case=f'{case_label} (ii) determinant = 0, augmented rank 1', gates=gates,
        )
    else:
        left = U[:, -1].conj()
        result = NoSolution(
            witness='left null vector of the coefficient matrix applied to the data',
            obstruction=float(abs(left @ (M @ c))), target=float(abs(left @ b)),
            error_estimate=float(s[-1] * np.linalg.norm(c) + np.finfo(float).eps * s[0]),
            case=f'{case_label} (iii) determinant = 0, augmented rank 2', gates=gates,
        )
    return _log_case('classify_second_order_same_point', result)


def first_order_residual(solution: ClosedFormSolution, k: float, xs: Sequence[float],
                         forcing: Tuple[float, float] | None = None) -> float:
    """max |y'(x) − k·y(αx) − A·E_α(rx)| over xs."""
    a = solution.alpha
    worst = 0.0
    for x in xs:
        g = forcing[0] * _E(a, forcing[1] * x) if forcing else 0.0
        worst = max(worst, abs(solution.derivative(x, 1) - k * solution.evaluate(a * x) - g))
    return worst


def jordan_pair_residual(components: Sequence[ClosedFormSolution], lam: float, xs: Sequence[float]) -> float:
    y1, y2 = components
    a = y1.alpha
    worst = 0.0
    for x in xs:
        r1 = y1.derivative(x, 1) - lam * y1.evaluate(a * x) - y2.evaluate(a * x)
        r2 = y2.derivative(x, 1) - lam * y2.evaluate(a * x)
        worst = max(worst, abs(r1), abs(r2))
    return worst
