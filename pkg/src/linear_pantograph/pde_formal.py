"""Truncated separated-variables solutions of the heat-like and wave-like pantograph PDEs.

Heat-like:  u_t(α²x, t) = u_xx(x, βt),   u(0,t) = u(1,t) = 0,  u(x,0) = φ(x)
Wave-like:  u_tt(α²x, t) = u_xx(x, β²t), u(0,t) = u(1,t) = 0,  u(x,0) = φ(x), u_t(x,0) = ψ(x)

Each mode is exact: X_n = S_α(ρ_n x) solves X'' = λ_n X(α²x) with λ_n = −αρ_n², and the time
factor solves T' = λ_n T(βt) (heat) or T'' = λ_n T(β²t) (wave). The series are formal; only
truncation at the basis size is used.
"""
from __future__ import annotations
import math
from enum import Enum
from typing import Callable, List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from . import core_special
from .bvp_eigen import ExpansionResult, OrthogonalBasis, expand_in_sine_like
from .core_special import SpecialFunctionKind, check_alpha
from .logging_utils import get_logger

logger = get_logger()

E, C, S = SpecialFunctionKind.EXP_LIKE, SpecialFunctionKind.COS_LIKE, SpecialFunctionKind.SIN_LIKE


class PDEKind(str, Enum):
    HEAT_LIKE = 'heat'
    WAVE_LIKE = 'wave'


class Normalization(str, Enum):
    PRINTED = 'printed'
    CORRECTED = 'corrected'


def _d(kind: SpecialFunctionKind, order: int, alpha: float, x: float) -> float:
    return core_special.eval_derivative(kind, order, alpha, x).value


class FormalPDESolution(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: PDEKind
    alpha: float
    beta: float
    N: int
    rho: List[float]
    coeffs: List[float]
    velocity_coeffs: List[float] = Field(default_factory=list)
    normalization: Normalization | None = None
    flags: List[str] = Field(default_factory=list)

    def _space(self, n: int, x: float, order: int = 0) -> float:
        rho = self.rho[n]
        return rho ** order * _d(S, order, self.alpha, rho * x)

    def _time(self, n: int, t: float, order: int = 0) -> float:
        """Time factor of mode n and its derivatives; velocity modes included for the wave kind."""
        a, b, rho = self.alpha, self.beta, self.rho[n]
        if self.kind is PDEKind.HEAT_LIKE:
            lam = -a * rho ** 2
            return self.coeffs[n] * lam ** order * _d(E, order, b, lam * t)
        vel = self.velocity_coeffs[n] if self.velocity_coeffs else 0.0
        if self.normalization is Normalization.PRINTED:
            w = -rho
            return (self.coeffs[n] * w ** order * _d(C, order, b, w * t)
                    - vel / rho ** 2 * w ** order * _d(S, order, b, w * t))
        kappa = rho * math.sqrt(a / b)
        return (self.coeffs[n] * kappa ** order * _d(C, order, b, kappa * t)
                + vel / kappa * kappa ** order * _d(S, order, b, kappa * t))

    def derivative(self, x: float, t: float, dx: int = 0, dt: int = 0) -> float:
        """∂^dx_x ∂^dt_t u at (x, t), mode by mode."""
        return sum(self._time(n, t, dt) * self._space(n, x, dx) for n in range(self.N))

    def __call__(self, x: float, t: float) -> float:
        return self.derivative(x, t)


def _checked(alpha: float, beta: float, basis: OrthogonalBasis, N: int) -> None:
    check_alpha(alpha)
    check_alpha(beta)
    if basis.N < N:
        raise ValueError(f'basis holds {basis.N} modes, {N} requested')
    if abs(basis.alpha - alpha) > 1e-15:
        raise ValueError('basis was built for a different alpha')


def _restricted(expansion: ExpansionResult, N: int) -> List[float]:
    return list(expansion.A[:N])


def heat_like_solution(alpha: float, beta: float, phi: Callable[[float], float], N: int,
                       basis: OrthogonalBasis, t_max: float | None = None) -> FormalPDESolution:
    """u = Σ A_n E_β(−αρ_n² t) S_α(ρ_n x) with A from the sine-like expansion of φ."""
    _checked(alpha, beta, basis, N)
    coeffs = _restricted(expand_in_sine_like(phi, basis), N)
    flags: List[str] = []
    if t_max is not None and beta < 1.0:
        from .zero_finder import negative_zeros
        (first_zero,), _ = negative_zeros(beta, 1)
        for n in range(N):
            if -alpha * basis.rho[n] ** 2 * t_max < first_zero:
                flags.append(f'mode {n + 1}: E_beta argument passes its first negative zero before t={t_max}')
    for flag in flags:
        logger.warning(flag)
    return FormalPDESolution(kind=PDEKind.HEAT_LIKE, alpha=alpha, beta=beta, N=N,
                             rho=basis.rho[:N], coeffs=coeffs, flags=flags)


def wave_like_solution(alpha: float, beta: float, phi: Callable[[float], float], psi: Callable[[float], float],
                       N: int, basis: OrthogonalBasis,
                       normalization: Normalization | str = Normalization.CORRECTED) -> FormalPDESolution:
    """Position and velocity coefficients from the sine-like expansions of φ and ψ."""
    _checked(alpha, beta, basis, N)
    normalization = Normalization(normalization)
    coeffs = _restricted(expand_in_sine_like(phi, basis), N)
    velocity = _restricted(expand_in_sine_like(psi, basis), N)
    return FormalPDESolution(kind=PDEKind.WAVE_LIKE, alpha=alpha, beta=beta, N=N, rho=basis.rho[:N],
                             coeffs=coeffs, velocity_coeffs=velocity, normalization=normalization)


def sampled_residual(u: FormalPDESolution, points: Sequence[Tuple[float, float]], h: float | None = None) -> List[float]:
    """|u_t(α²x,t) − u_xx(x,βt)| (heat) or |u_tt(α²x,t) − u_xx(x,β²t)| (wave) per point.

    Derivatives are analytic per mode; `h` is accepted for symmetry with fd_cross_check.
    """
    a, b = u.alpha, u.beta
    out = []
    for x, t in points:
        if u.kind is PDEKind.HEAT_LIKE:
            out.append(abs(u.derivative(a * a * x, t, dt=1) - u.derivative(x, b * t, dx=2)))
        else:
            out.append(abs(u.derivative(a * a * x, t, dt=2) - u.derivative(x, b * b * t, dx=2)))
    return out


def fd_cross_check(u: FormalPDESolution, points: Sequence[Tuple[float, float]], h: float = 1e-4) -> float:
    """Largest gap between analytic and central-difference u_t, u_xx over the points."""
    worst = 0.0
    for x, t in points:
        ut = (u(x, t + h) - u(x, t - h)) / (2 * h)
        uxx = (u(x + h, t) - 2 * u(x, t) + u(x - h, t)) / h ** 2
        worst = max(worst, abs(ut - u.derivative(x, t, dt=1)), abs(uxx - u.derivative(x, t, dx=2)))
    return worst


def initial_velocity_gap(u: FormalPDESolution, basis: OrthogonalBasis, xs: Sequence[float]) -> float:
    """max |∂u/∂t(x,0) − Σ V_n f_n(x)|: zero for the corrected normalization."""
    if u.kind is not PDEKind.WAVE_LIKE:
        raise ValueError('initial velocity is defined for wave-like solutions only')
    return max(abs(u.derivative(x, 0.0, dt=1) - sum(v * basis.f(n + 1, x) for n, v in enumerate(u.velocity_coeffs)))
               for x in xs)


def sample_grid(u: FormalPDESolution, xs: Sequence[float], ts: Sequence[float]) -> List[Tuple[float, float, float]]:
    return [(float(x), float(t), u(x, t)) for t in ts for x in xs]
