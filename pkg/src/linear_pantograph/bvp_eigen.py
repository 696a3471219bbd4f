"""Two-point eigenproblem y'' = λ·y(α²x) and the non-orthogonal sine-like expansion.

The eigenfunctions S_α(ρ_n x) are not orthogonal on [0, 1]. Expansions go through a Gram-Schmidt
basis e_n = Σ_m H_nm f_m built in coefficient space from the Gram matrix of the f_n.
"""
from __future__ import annotations
import math
from functools import lru_cache
from typing import Callable, List, Sequence, Tuple

import mpmath
import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from . import core_special
from .config import get_settings
from .core_special import SpecialFunctionKind, check_alpha
from .errors import NearLinearDependence, QuadratureFailure
from .logging_utils import get_logger
from .solutions import ClosedFormSolution
from .zero_finder import ZeroTable

logger = get_logger()


class Eigenpair(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    index: int = Field(ge=1)
    eigenvalue: float = Field(alias='lambda', lt=0)
    eigenfunction: ClosedFormSolution
    kind: SpecialFunctionKind = SpecialFunctionKind.SIN_LIKE


def _check_rho(zeros: ZeroTable, count: int, family: str = 'rho') -> List[float]:
    values = zeros.family(family)
    if len(values) < count:
        raise ValueError(f'the zero table holds {len(values)} {family} entries, {count} needed')
    return values[:count]


def eigenpairs_unit_interval(alpha: float, count: int, zeros: ZeroTable) -> List[Eigenpair]:
    """λ_n = −αρ_n², y_n = S_α(ρ_n x) / max|S_α(ρ_n ·)| on [0, 1] with y(0) = y(1) = 0."""
    alpha = check_alpha(alpha)
    return [
        Eigenpair(
            index=n, eigenvalue=-alpha * rho ** 2,
            eigenfunction=ClosedFormSolution.single(
                alpha, 1.0 / mode_scale(SpecialFunctionKind.SIN_LIKE, alpha, rho), rho, kind=SpecialFunctionKind.SIN_LIKE,
            ),
        )
        for n, rho in enumerate(_check_rho(zeros, count), start=1)
    ]


def eigenpairs_symmetric(alpha: float, l: float, count: int, zeros: ZeroTable) -> List[Eigenpair]:
    """Eigenpairs on [−l, l]: cosine-like modes C_α(η_n x/l) interleaved with sine-like S_α(ρ_n x/l).

    Each eigenfunction has unit sup-norm on [−l, l].
    """
    alpha = check_alpha(alpha)
    if l <= 0:
        raise ValueError('l must be positive')
    n_cos = (count + 1) // 2
    n_sin = count // 2
    etas = _check_rho(zeros, n_cos, 'eta')
    rhos = _check_rho(zeros, n_sin, 'rho')
    pairs: List[Eigenpair] = []
    for index in range(1, count + 1):
        if index % 2:
            root, kind = etas[(index - 1) // 2], SpecialFunctionKind.COS_LIKE
        else:
            root, kind = rhos[index // 2 - 1], SpecialFunctionKind.SIN_LIKE
        pairs.append(Eigenpair(
            index=index, eigenvalue=-alpha * root ** 2 / l ** 2, kind=kind,
            eigenfunction=ClosedFormSolution.single(alpha, 1.0 / mode_scale(kind, alpha, root), root / l, kind=kind),
        ))
    return pairs


def eigen_residual(pair: Eigenpair, alpha: float, xs: Sequence[float]) -> List[float]:
    """|y''(x) − λ·y(α²x)| at each x, with exact derivative closed forms."""
    y = pair.eigenfunction
    return [abs(y.derivative(x, 2) - pair.eigenvalue * y.evaluate(alpha ** 2 * x)) for x in xs]


def eigen_residual_series(pair: Eigenpair, alpha: float, xs: Sequence[float]) -> List[float]:
    """Same residual, with y'' summed termwise from the series instead of the closed-form chain."""
    term = pair.eigenfunction.terms[0]
    coeff, rate = complex(term.coeff).real, complex(term.rate).real
    y = pair.eigenfunction
    return [
        abs(coeff * rate ** 2 * core_special.series_derivative(term.kind, 2, alpha, rate * x)
            - pair.eigenvalue * y.evaluate(alpha ** 2 * x))
        for x in xs
    ]


def negativity_certificate(alpha: float, n_coeffs: int) -> Tuple[List[mpmath.mpf], List[mpmath.mpf]]:
    """Series coefficients of E_α(x) − E_α(−x) and E_α(x) + E_α(−x).

    Both follow b_{n+2} = b_n α^{2n+1}/((n+2)(n+1)); the recurrence runs in mpmath because
    the coefficients leave the double exponent range long before n = 200.
    """
    alpha = check_alpha(alpha)
    if n_coeffs < 4:
        raise ValueError('n_coeffs must be >= 4')
    a = mpmath.mpf(alpha)

    def run(b0: int, b1: int) -> List[mpmath.mpf]:
        b = [mpmath.mpf(b0), mpmath.mpf(b1)]
        for n in range(n_coeffs - 2):
            b.append(b[n] * a ** (2 * n + 1) / ((n + 2) * (n + 1)))
        return b

    return run(0, 2), run(2, 0)


def certificate_holds(h_minus: Sequence[mpmath.mpf], h_plus: Sequence[mpmath.mpf]) -> bool:
    """Odd coefficients of h₋ and even coefficients of h₊ all strictly positive."""
    return all(c > 0 for c in h_minus[1::2]) and all(c > 0 for c in h_plus[0::2])


@lru_cache(maxsize=65536)
def _mode(kind: SpecialFunctionKind, alpha: float, rate: float, x: float) -> float:
    return core_special.eval(kind, alpha, rate * x).value


@lru_cache(maxsize=4096)
def mode_scale(kind: SpecialFunctionKind, alpha: float, rate: float, samples: int = 201) -> float:
    """max |F_α(rate·u)| over u ∈ [0, 1]: grid maximum polished by a bounded 1-D search.

    The modes span many orders of magnitude at small α (|S_0.5(ρ₅x)| reaches 1e15 on [0, 1]),
    so boundary values and inner products are measured against this scale.
    """
    us = np.linspace(0.0, 1.0, samples)
    values = np.array([abs(_mode(kind, alpha, rate, float(u))) for u in us])
    i = int(np.argmax(values))
    best = float(values[i])
    lo, hi = us[max(i - 1, 0)], us[min(i + 1, samples - 1)]
    polished = minimize_scalar(lambda u: -abs(_mode(kind, alpha, rate, float(u))), bounds=(lo, hi),
                               method='bounded', options={'xatol': 1e-12})
    best = max(best, float(-polished.fun))
    if best == 0.0:
        raise ValueError(f'{kind.value} mode with rate {rate} vanishes on [0, 1]')
    return best


def _inner(f: Callable[[float], float], g: Callable[[float], float], quad_tol: float) -> float:
    value, abserr = quad(lambda x: f(x) * g(x), 0.0, 1.0, epsabs=quad_tol / 10, epsrel=1e-12, limit=200)
    if abserr > quad_tol:
        raise QuadratureFailure(f'inner product error {abserr:.3e} above {quad_tol:.3e}', abserr=abserr)
    return float(value)


def _sup_on_grid(phi: Callable[[float], float], samples: int = 101) -> float:
    return max(1.0, max(abs(float(phi(float(x)))) for x in np.linspace(0.0, 1.0, samples)))


class OrthogonalBasis(BaseModel):
    """e_n = Σ_{m≤n} H_nm f_m with f_m = S_α(ρ_m x); H is unit lower-triangular.

    Quadrature runs on the unit-sup modes f̂_m = f_m / s_m; `H_hat`, `gram_hat` and `diag_hat`
    are the same objects in that scaling, `H`, `gram` and `gram_diag` are in terms of the f_m.
    """
    model_config = ConfigDict(frozen=True)

    alpha: float
    N: int
    rho: List[float]
    scales: List[float]
    H: List[List[float]]
    gram: List[List[float]]
    gram_diag: List[float]
    H_hat: List[List[float]]
    gram_hat: List[List[float]]
    diag_hat: List[float]
    quad_tol: float
    orthogonality_error: float = 0.0

    def f(self, m: int, x: float) -> float:
        """f_m(x), m counted from 1."""
        return _mode(SpecialFunctionKind.SIN_LIKE, self.alpha, self.rho[m - 1], float(x))

    def f_hat(self, m: int, x: float) -> float:
        return self.f(m, x) / self.scales[m - 1]

    def e(self, n: int, x: float) -> float:
        row = self.H[n - 1]
        return sum(row[m] * self.f(m + 1, x) for m in range(n) if row[m] != 0.0)


def gram_schmidt_basis(alpha: float, N: int, zeros: ZeroTable, quad_tol: float | None = None) -> OrthogonalBasis:
    """Modified Gram-Schmidt on f₁…f_N with inner products ∫₀¹ f g dx."""
    alpha = check_alpha(alpha)
    if N < 1:
        raise ValueError('N must be >= 1')
    quad_tol = quad_tol or get_settings().quad_tol
    rho = _check_rho(zeros, N)
    s = np.array([mode_scale(SpecialFunctionKind.SIN_LIKE, alpha, r) for r in rho])
    fs = [lambda x, r=r, sc=sc: _mode(SpecialFunctionKind.SIN_LIKE, alpha, r, float(x)) / sc for r, sc in zip(rho, s)]

    G = np.zeros((N, N))
    for i in range(N):
        for j in range(i + 1):
            G[i, j] = G[j, i] = _inner(fs[i], fs[j], quad_tol)

    H = np.eye(N)
    diag = np.zeros(N)
    for n in range(N):
        for j in range(n):
            H[n] -= (H[n] @ G @ H[j]) / diag[j] * H[j]
        diag[n] = H[n] @ G @ H[n]
        if diag[n] < 1e-12 * G[n, n]:
            raise NearLinearDependence(
                f'e_{n + 1} has norm² {diag[n]:.3e}, below 1e-12 of <f,f>', index=n + 1, norm=float(diag[n]),
            )

    worst = 0.0
    for i in range(N):
        ei = lambda x, i=i: float(H[i, :i + 1] @ [f(x) for f in fs[:i + 1]])
        for j in range(i):
            ej = lambda x, j=j: float(H[j, :j + 1] @ [f(x) for f in fs[:j + 1]])
            worst = max(worst, abs(_inner(ei, ej, quad_tol)))
    scale = max(1.0, float(np.max(np.abs(H))) ** 2)
    logger.info('Gram-Schmidt basis alpha=%s N=%d: max |<e_i,e_j>| = %.3e (unit-sup modes)', alpha, N, worst)
    if worst > 10 * quad_tol * scale:
        raise QuadratureFailure(f'orthogonality check failed: {worst:.3e}', worst=worst)

    # e_n = s_n ê_n garde la diagonale unité dans la base des f_m
    H_f = H * s[:, None] / s[None, :]
    return OrthogonalBasis(
        alpha=alpha, N=N, rho=list(rho), scales=s.tolist(),
        H=H_f.tolist(), gram=(G * np.outer(s, s)).tolist(), gram_diag=(diag * s ** 2).tolist(),
        H_hat=H.tolist(), gram_hat=G.tolist(), diag_hat=diag.tolist(),
        quad_tol=quad_tol, orthogonality_error=worst,
    )


class ExpansionResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    A: List[float]
    B: List[float]
    B_printed: List[float]
    printed_discrepancy: float
    reconstruction_error: float
    # max_k |⟨φ − ΣA_m f_m, f̂_k⟩| / max(1, sup|φ|)
    projection_residual: float

    def evaluate(self, basis: OrthogonalBasis, x: float) -> float:
        return sum(a * basis.f(m, x) for m, a in enumerate(self.A, start=1))


def expand_in_sine_like(phi: Callable[[float], float], basis: OrthogonalBasis) -> ExpansionResult:
    """A_m = Σ_{n≥m} B_n H_nm with B_n = ⟨φ, e_n⟩/⟨e_n, e_n⟩."""
    N = basis.N
    s = np.asarray(basis.scales)
    H = np.asarray(basis.H_hat)
    G = np.asarray(basis.gram_hat)
    diag = np.asarray(basis.diag_hat)
    size = _sup_on_grid(phi)
    unit_phi = lambda x: phi(x) / size
    b = np.array([_inner(unit_phi, lambda x, m=m: basis.f_hat(m, x), basis.quad_tol) for m in range(1, N + 1)])
    B_hat = (H @ b) / diag
    A_hat = H.T @ B_hat
    A = size * A_hat / s
    B = size * B_hat / s

    # forme développée imprimée : Σ_k ⟨φ,f_k⟩ / Σ_k H²_nk ⟨f_k,f_k⟩
    printed = np.array([
        size * float(s[:n + 1] @ b[:n + 1]) / (s[n] ** 2 * float((H[n, :n + 1] ** 2) @ np.diag(G)[:n + 1]))
        for n in range(N)
    ])
    discrepancy = float(np.max(np.abs(printed - B)))

    projection_residual = float(np.max(np.abs(b - G @ A_hat)))
    rest = lambda x: unit_phi(x) - sum(a * basis.f_hat(m, x) for m, a in enumerate(A_hat, start=1))
    residual_sq = _inner(rest, rest, basis.quad_tol)
    logger.debug('expansion N=%d: printed-formula discrepancy %.3e', N, discrepancy)
    return ExpansionResult(
        A=A.tolist(), B=B.tolist(), B_printed=printed.tolist(), printed_discrepancy=discrepancy,
        reconstruction_error=size * math.sqrt(max(residual_sq, 0.0)), projection_residual=projection_residual,
    )
