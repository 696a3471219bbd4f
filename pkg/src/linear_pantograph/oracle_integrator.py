"""Fixed-step dense-output integrator for X'(t) = A·X(αt) + g(t), used as an independent oracle.

Marching away from the origin, αt always lies inside the already computed range, so each stage
query of X(α·) is answered by the cubic Hermite interpolant of the stored nodes. Near the origin,
where αt may still be ahead of the front, the Taylor polynomial given by the series recurrence is
used instead.
"""
from __future__ import annotations
import math
from bisect import bisect_right
from enum import Enum
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq
from tqdm import tqdm

from .config import get_settings
from .core_special import check_alpha
from .errors import StepTooLarge
from .logging_utils import get_logger
from .pantograph_solve import nth_order_to_system
from .solutions import ClosedFormSolution

logger = get_logger()


class Direction(str, Enum):
    FORWARD = 'forward'
    BACKWARD = 'backward'

    @property
    def sign(self) -> int:
        return 1 if self is Direction.FORWARD else -1


class PantographSystemSpec(BaseModel):
    """X'(t) = A·X(αt) + g(t), X(0) = y0; g is given per component as a closed form (or absent)."""
    model_config = ConfigDict(frozen=True)

    alpha: float
    A: List[List[float]]
    y0: List[float]
    forcing: List[ClosedFormSolution | None] | None = None
    direction: Direction = Direction.FORWARD

    @model_validator(mode='after')
    def _check_shapes(self) -> 'PantographSystemSpec':
        check_alpha(self.alpha)
        n = len(self.y0)
        if len(self.A) != n or any(len(row) != n for row in self.A):
            raise ValueError(f'A must be {n}x{n} to match y0')
        if self.forcing is not None and len(self.forcing) != n:
            raise ValueError('forcing must list one entry (or None) per component')
        return self

    @property
    def dimension(self) -> int:
        return len(self.y0)

    def matrix(self) -> np.ndarray:
        return np.asarray(self.A, dtype=float)

    def forcing_at(self, t: float) -> np.ndarray:
        out = np.zeros(self.dimension)
        if self.forcing:
            for i, g in enumerate(self.forcing):
                if g is not None:
                    out[i] = g.evaluate(t)
        return out

    def taylor_coefficients(self, count: int) -> np.ndarray:
        """Rows X_m of X(t) = Σ X_m t^m from X_{m+1} = (α^m A X_m + g_m)/(m+1)."""
        n = self.dimension
        g = np.zeros((count, n))
        if self.forcing:
            for i, f in enumerate(self.forcing):
                if f is not None:
                    g[:, i] = f.taylor_coefficients(count)
        A = self.matrix()
        X = np.zeros((count, n))
        X[0] = self.y0
        for m in range(count - 1):
            X[m + 1] = (self.alpha ** m * (A @ X[m]) + g[m]) / (m + 1)
        return X

    def with_direction(self, direction: Direction) -> 'PantographSystemSpec':
        return self.model_copy(update={'direction': direction})


class DenseTrajectory(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    alpha: float
    direction: Direction
    times: np.ndarray
    states: np.ndarray
    derivatives: np.ndarray
    step: float

    _spline: CubicHermiteSpline | None = PrivateAttr(default=None)

    def model_post_init(self, __context) -> None:
        # CubicHermiteSpline veut des abscisses croissantes
        order = np.argsort(self.times)
        self._spline = CubicHermiteSpline(
            self.times[order], self.states[order], self.derivatives[order], axis=0,
        )

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def __call__(self, t: float) -> np.ndarray:
        lo, hi = sorted((0.0, self.t_end))
        if not (lo - 1e-12 <= t <= hi + 1e-12):
            raise ValueError(f't={t} outside the integrated range [{lo}, {hi}]')
        return np.asarray(self._spline(t))

    def component(self, index: int) -> np.ndarray:
        return self.states[:, index]

    def sign_changes(self, component: int = 0) -> List[Tuple[float, float]]:
        values = self.states[:, component]
        out = []
        for k in range(len(values) - 1):
            if values[k] == 0.0:
                continue
            if values[k] * values[k + 1] < 0:
                out.append((float(self.times[k]), float(self.times[k + 1])))
        return out

    def roots(self, component: int = 0) -> List[float]:
        """Zeros of one component, ordered away from the origin."""
        f = lambda t: float(self._spline(t)[component])
        return [float(brentq(f, min(a, b), max(a, b), xtol=1e-14, rtol=4 * np.finfo(float).eps))
                for a, b in self.sign_changes(component)]

    def rows(self) -> List[List[float]]:
        return [[float(t)] + [float(v) for v in state] for t, state in zip(self.times, self.states)]

    def to_csv(self, path: str | Path) -> Path:
        from .export import write_csv
        header = ['t'] + [f'x{i + 1}' for i in range(self.states.shape[1])]
        return write_csv(path, header, self.rows())


class _Front:
    """Stored nodes plus the query X(τ) used by the stages."""

    def __init__(self, spec: PantographSystemSpec, bootstrap: np.ndarray):
        self.times: List[float] = [0.0]
        self.radii: List[float] = [0.0]
        self.states: List[np.ndarray] = [np.asarray(spec.y0, dtype=float)]
        self.derivs: List[np.ndarray] = []
        self.bootstrap = bootstrap

    def push(self, t: float, state: np.ndarray) -> None:
        self.times.append(t)
        self.radii.append(abs(t))
        self.states.append(state)

    def taylor(self, tau: float) -> np.ndarray:
        powers = tau ** np.arange(len(self.bootstrap))
        return powers @ self.bootstrap

    def query(self, tau: float) -> np.ndarray:
        r = abs(tau)
        if len(self.derivs) < 2 or r > self.radii[len(self.derivs) - 1]:
            # encore dans la zone d'amorçage
            return self.taylor(tau)
        i = min(bisect_right(self.radii, r) - 1, len(self.derivs) - 2)
        t0, t1 = self.times[i], self.times[i + 1]
        h = t1 - t0
        s = (tau - t0) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return (h00 * self.states[i] + h10 * h * self.derivs[i]
                + h01 * self.states[i + 1] + h11 * h * self.derivs[i + 1])


def integrate(spec: PantographSystemSpec, t_end: float, h: float, tol: float | None = None) -> DenseTrajectory:
    """March from 0 to t_end with fixed steps of size ≤ h.

    With α < 1 the right-hand side does not depend on the current state, and the RK4 stages
    reduce to Simpson's rule on f(s) = A·X(αs) + g(s). With α = 1 the classical stage states are
    used. When `tol` is given, a half-step run estimates the error and StepTooLarge is raised
    above it.
    """
    sign = spec.direction.sign
    if t_end * sign <= 0:
        raise ValueError(f't_end={t_end} does not match the {spec.direction.value} direction')
    if h <= 0:
        raise ValueError('h must be positive')
    settings = get_settings()
    steps = max(1, math.ceil(abs(t_end) / h - 1e-9))
    dt = sign * abs(t_end) / steps
    A = spec.matrix()
    alpha = spec.alpha
    front = _Front(spec, spec.taylor_coefficients(max(settings.bootstrap_terms, 2)))

    def f(t: float, delayed: np.ndarray) -> np.ndarray:
        return A @ delayed + spec.forcing_at(t)

    state = front.states[0]
    front.derivs.append(f(0.0, state))
    classical = alpha == 1.0
    logger.debug('integrating %d steps of %.3e (alpha=%s)', steps, dt, alpha)
    for k in tqdm(range(steps), disable=not settings.progress, desc='oracle', leave=False):
        t = k * dt
        k1 = front.derivs[k]
        if classical:
            k2 = f(t + dt / 2, state + dt / 2 * k1)
            k3 = f(t + dt / 2, state + dt / 2 * k2)
            k4 = f(t + dt, state + dt * k3)
            state = state + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t_next = (k + 1) * dt
            front.push(t_next, state)
            front.derivs.append(f(t_next, state))
            continue
        k2 = f(t + dt / 2, front.query(alpha * (t + dt / 2)))
        k4 = f(t + dt, front.query(alpha * (t + dt)))
        state = state + dt / 6 * (k1 + 4 * k2 + k4)
        t_next = (k + 1) * dt
        front.push(t_next, state)
        front.derivs.append(f(t_next, front.query(alpha * t_next)))

    trajectory = DenseTrajectory(
        alpha=alpha,
        direction=spec.direction,
        times=np.array(front.times),
        states=np.vstack(front.states),
        derivatives=np.vstack(front.derivs),
        step=abs(dt),
    )
    if tol is not None:
        finer = integrate(spec, t_end, h / 2)
        estimate = float(np.max(np.abs(trajectory.states[-1] - finer.states[-1]))) * 16 / 15
        if estimate > tol:
            raise StepTooLarge(f'Richardson error estimate {estimate:.3e} exceeds {tol:.3e}', estimate=estimate, h=h)
    return trajectory


def richardson_order_check(spec: PantographSystemSpec, t_end: float, h: float) -> float:
    """log₂(err(h)/err(h/2)) with err(h) = |X_h − X_{h/2}| at t_end."""
    x1 = integrate(spec, t_end, h).states[-1]
    x2 = integrate(spec, t_end, h / 2).states[-1]
    x3 = integrate(spec, t_end, h / 4).states[-1]
    e1 = float(np.max(np.abs(x1 - x2)))
    e2 = float(np.max(np.abs(x2 - x3)))
    if e2 == 0.0:
        return math.inf
    order = math.log2(e1 / e2)
    logger.debug('Richardson order %.3f (errors %.3e, %.3e)', order, e1, e2)
    return order


def comparison_system(alpha: float, k: float) -> PantographSystemSpec:
    """y'' = −k·y(α²x), y(0) = 1, y'(0) = 0 with x₁ = y, x₂(t) = y'(t/α)."""
    alpha = check_alpha(alpha)
    return PantographSystemSpec(alpha=alpha, A=[[0.0, 1.0], [-k / alpha, 0.0]], y0=[1.0, 0.0])


def from_nth_order(alpha: float, p: Sequence[float], init: Sequence[float],
                   forcing: ClosedFormSolution | None = None) -> PantographSystemSpec:
    """System form of y⁽ⁿ⁾ + Σ pⱼ y⁽ʲ⁾(α^{n-j}x) = f(x); the first component is y."""
    K, scales = nth_order_to_system(alpha, p)
    n = len(p)
    y0 = [float(s * c) for s, c in zip(scales, init)]
    forcing_list = None
    if forcing is not None:
        last = forcing.at_scaled_argument(alpha ** -(n - 1)).scaled(alpha ** (-n * (n - 1) / 2))
        forcing_list = [None] * (n - 1) + [last]
    return PantographSystemSpec(alpha=alpha, A=K.tolist(), y0=y0, forcing=forcing_list)


def sup_distance(trajectory: DenseTrajectory, solution: ClosedFormSolution, component: int = 0,
                 samples: int = 201) -> float:
    """Sup-norm gap between one trajectory component and a closed form, on the covered range."""
    ts = np.linspace(0.0, trajectory.t_end, samples)
    return float(max(abs(trajectory(t)[component] - solution.evaluate(t)) for t in ts))
