"""Intrinsic heat semigroup on a frozen curve.

The density ``rho`` (with respect to arclength) obeys ``rho' = Delta rho``.
Writing ``Delta = W^{-1} K`` with ``W = diag(w)`` and ``K`` the symmetric
flux stiffness from :mod:`morphosplit.geometry`, one theta-scheme substep is

    (W - theta dt K) rho_new = (W + (1 - theta) dt K) rho_old.

Columns of ``K`` sum to zero, so ``sum(W rho)`` (the total mass) is invariant
up to the accuracy of the cyclic tridiagonal solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .geometry import EmbeddedCurve, laplacian_bands
from .measure import SignalMeasure


class HeatSolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class HeatStepConfig:
    """``tau`` split into ``n_substeps`` theta-scheme steps (0.5 = Crank-Nicolson)."""

    tau: float
    n_substeps: int = 1
    theta_scheme: float = 0.5

    def __post_init__(self):
        if not self.tau >= 0:
            raise ValueError("tau must be nonnegative")
        if int(self.n_substeps) != self.n_substeps or self.n_substeps < 1:
            raise ValueError("n_substeps must be a positive integer")
        if not 0.5 <= self.theta_scheme <= 1.0:
            raise ValueError("theta_scheme must lie in [1/2, 1]")

    @property
    def dt(self) -> float:
        return self.tau / self.n_substeps


class CyclicTridiagonal:
    """Factorised periodic tridiagonal matrix, solved by a rank-one correction.

    ``lower[i] = A[i, i-1]``, ``diag[i] = A[i, i]``, ``upper[i] = A[i, i+1]``,
    indices modulo ``N``; so ``lower[0]`` and ``upper[-1]`` are the corners.
    """

    def __init__(self, lower, diag, upper):
        lower, diag, upper = (np.asarray(a, dtype=float) for a in (lower, diag, upper))
        n = diag.size
        if n < 3:
            raise ValueError("need at least 3 unknowns")
        gamma = -diag[0]
        alpha = upper[-1]  # A[N-1, 0]
        beta = lower[0]  # A[0, N-1]
        d = diag.copy()
        d[0] -= gamma
        d[-1] -= alpha * beta / gamma
        dl, dd, du, du2, ipiv, info = lapack.dgttrf(lower[1:].copy(), d, upper[:-1].copy())
        if info != 0:
            raise HeatSolverError(f"tridiagonal factorisation failed (info={info})")
        self._lu = (dl, dd, du, du2, ipiv)
        self._v = np.zeros(n)
        self._v[0], self._v[-1] = 1.0, beta / gamma
        u = np.zeros(n)
        u[0], u[-1] = gamma, alpha
        self._z = self._tri_solve(u)
        self._denom = 1.0 + self._v @ self._z
        if self._denom == 0:
            raise HeatSolverError("singular rank-one correction")

    def _tri_solve(self, b):
        x, info = lapack.dgttrs(*self._lu, b)
        if info != 0:
            raise HeatSolverError(f"tridiagonal solve failed (info={info})")
        return x

    def solve(self, b) -> np.ndarray:
        y = self._tri_solve(np.array(b, dtype=float))
        return y - (self._v @ y / self._denom) * self._z


def _implicit_bands(weights, diag_k, upper_k, coef):
    """Bands of ``W - coef * K`` as (lower, diag, upper)."""
    upper = -coef * upper_k
    lower = np.roll(upper, 1)
    return lower, weights - coef * diag_k, upper


def _check_dominance(lower, diag, upper):
    margin = np.abs(diag) - np.abs(lower) - np.abs(upper)
    if not np.all(margin > 0):
        raise HeatSolverError("implicit matrix lost strict diagonal dominance")


def heat_stepper(curve: EmbeddedCurve, config: HeatStepConfig):
    """Return ``advance(rho) -> rho`` performing all substeps of ``config``."""
    w = curve.weights
    diag_k, upper_k = laplacian_bands(curve)
    dt, th = config.dt, config.theta_scheme
    bands = _implicit_bands(w, diag_k, upper_k, th * dt)
    _check_dominance(*bands)
    system = CyclicTridiagonal(*bands)
    explicit = (1.0 - th) * dt

    def apply_k(rho):
        return diag_k * rho + upper_k * np.roll(rho, -1) + np.roll(upper_k * rho, 1)

    def advance(rho):
        rho = np.asarray(rho, dtype=float)
        for _ in range(config.n_substeps):
            rhs = w * rho
            if explicit:
                rhs = rhs + explicit * apply_k(rho)
            rho = system.solve(rhs)
        return rho

    return advance


def heat_step(measure: SignalMeasure, config: HeatStepConfig) -> SignalMeasure:
    """Diffuse ``measure`` for time ``config.tau`` on its own (frozen) curve."""
    if config.tau == 0:
        return measure
    curve = measure.curve
    rho = heat_stepper(curve, config)(measure.density)
    if not np.all(np.isfinite(rho)):
        raise HeatSolverError("non-finite density after heat step")
    return SignalMeasure(curve, rho * curve.weights)


def heat_semigroup(measure: SignalMeasure, tau_total: float, substep_size: float,
                   theta_scheme: float = 0.5) -> SignalMeasure:
    """``exp(tau_total * Delta)`` with substeps no longer than ``substep_size``."""
    if not substep_size > 0:
        raise ValueError("substep_size must be positive")
    if tau_total < 0:
        raise ValueError("tau_total must be nonnegative")
    if tau_total == 0:
        return measure
    n = max(1, math.ceil(tau_total / substep_size - 1e-9))
    return heat_step(measure, HeatStepConfig(tau_total, n, theta_scheme))
