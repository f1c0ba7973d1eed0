"""Growth vector fields, their flows, and push-forward / pull-back of measures."""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from .geometry import EmbeddedCurve
from .measure import SignalMeasure, rebind

MONOMIALS = ("1", "x", "y", "x^2", "xy", "y^2")


class FlowError(RuntimeError):
    """Non-finite velocity encountered while integrating a flow."""


class GrowthField:
    """A (possibly measure-dependent) vector field on the plane.

    Parameters
    ----------
    velocity : callable
        ``velocity(points)`` -> ``(N, 2)`` array, or ``velocity(points, measure)``
        when ``measure_dependent`` is true.
    jacobian : callable, optional
        Analytic Jacobian with the same calling convention, returning
        ``(N, 2, 2)`` with ``J[n, i, j] = d v_i / d x_j``. Falls back to
        central differences with step ``fd_step``.
    lipschitz_bound : float, optional
        Claimed Lipschitz constant in the space variable, see
        :func:`check_lipschitz`.
    """

    def __init__(
        self,
        velocity: Callable,
        jacobian: Optional[Callable] = None,
        *,
        measure_dependent: bool = False,
        lipschitz_bound: Optional[float] = None,
        fd_step: float = 1e-5,
        name: str = "custom",
    ):
        self._velocity = velocity
        self._jacobian = jacobian
        self.measure_dependent = measure_dependent
        self.lipschitz_bound = lipschitz_bound
        self.fd_step = fd_step
        self.name = name

    def __repr__(self):
        return f"GrowthField({self.name!r})"

    def __call__(self, points, measure: Optional[SignalMeasure] = None) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self.measure_dependent:
            if measure is None:
                raise ValueError(f"field {self.name!r} needs the current measure")
            out = self._velocity(points, measure)
        else:
            out = self._velocity(points)
        return np.broadcast_to(np.asarray(out, dtype=float), points.shape)

    @property
    def has_analytic_jacobian(self) -> bool:
        return self._jacobian is not None

    def jacobian(self, points, measure: Optional[SignalMeasure] = None) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self._jacobian is not None:
            args = (points, measure) if self.measure_dependent else (points,)
            jac = np.asarray(self._jacobian(*args), dtype=float)
            return np.broadcast_to(jac, points.shape[:-1] + (2, 2))
        return self.fd_jacobian(points, measure)

    def fd_jacobian(self, points, measure: Optional[SignalMeasure] = None) -> np.ndarray:
        """Central-difference Jacobian with step ``fd_step``."""
        points = np.asarray(points, dtype=float)
        h = self.fd_step
        jac = np.empty(points.shape[:-1] + (2, 2))
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            jac[..., :, j] = (self(points + e, measure) - self(points - e, measure)) / (2 * h)
        return jac

    def frozen(self, measure: Optional[SignalMeasure]) -> "GrowthField":
        """Measure-independent field ``v[measure]``."""
        if not self.measure_dependent:
            return self
        vel, jac = self._velocity, self._jacobian
        return GrowthField(
            lambda p: vel(p, measure),
            None if jac is None else (lambda p: jac(p, measure)),
            lipschitz_bound=self.lipschitz_bound,
            fd_step=self.fd_step,
            name=f"{self.name}[frozen]",
        )

    def reversed(self) -> "GrowthField":
        """The field ``-v`` (same measure dependence)."""
        vel, jac = self._velocity, self._jacobian
        return GrowthField(
            lambda *a: -np.asarray(vel(*a)),
            None if jac is None else (lambda *a: -np.asarray(jac(*a))),
            measure_dependent=self.measure_dependent,
            lipschitz_bound=self.lipschitz_bound,
            fd_step=self.fd_step,
            name=f"-{self.name}",
        )


def polynomial_field(coefficients, name: str = "polynomial") -> GrowthField:
    """Field whose components are quadratic polynomials.

    ``coefficients`` has shape ``(2, 6)``; row ``k`` holds the coefficients of
    component ``k`` on the monomials ``1, x, y, x^2, xy, y^2``. Shorter rows
    are zero-padded, so a ``(2, 3)`` table is an affine field.
    """
    c = np.asarray(coefficients, dtype=float)
    if c.ndim != 2 or c.shape[0] != 2 or c.shape[1] > 6:
        raise ValueError("coefficients must have shape (2, k) with k <= 6")
    c = np.pad(c, ((0, 0), (0, 6 - c.shape[1])))

    def velocity(p):
        x, y = p[..., 0], p[..., 1]
        basis = np.stack([np.ones_like(x), x, y, x * x, x * y, y * y], axis=-1)
        return basis @ c.T

    def jacobian(p):
        x, y = p[..., 0], p[..., 1]
        one, zero = np.ones_like(x), np.zeros_like(x)
        dx = np.stack([zero, one, zero, 2 * x, y, zero], axis=-1)
        dy = np.stack([zero, zero, one, zero, x, 2 * y], axis=-1)
        return np.stack([dx @ c.T, dy @ c.T], axis=-1)

    quadratic = np.any(c[:, 3:] != 0)
    bound = None if quadratic else float(np.linalg.norm(c[:, 1:3], 2))
    return GrowthField(velocity, jacobian, lipschitz_bound=bound, name=name)


_NAMED = {
    "paper": [[-1.0, 1.0, 0.0], [0.0, 0.0, 2.0]],
    "rotation": [[0.0, 0.0, -1.0], [0.0, 1.0, 0.0]],
    "zero": [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
    "radial": [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
}


def named_field(name: str) -> GrowthField:
    """Built-in fields: ``paper`` (x-1, 2y), ``rotation`` (-y, x), ``zero``, ``radial`` (x, y)."""
    try:
        coeffs = _NAMED[name]
    except KeyError:
        raise ValueError(f"unknown field {name!r}; expected one of {sorted(_NAMED)}") from None
    return polynomial_field(coeffs, name=name)


def check_lipschitz(field: GrowthField, points, measure=None) -> float:
    """Largest sampled difference quotient ``|v(x) - v(y)| / |x - y|``.

    Raises ``ValueError`` if the field declares a bound that the samples
    exceed.
    """
    points = np.asarray(points, dtype=float)
    v = field(points, measure)
    dx = np.linalg.norm(points[:, None] - points[None], axis=-1)
    dv = np.linalg.norm(v[:, None] - v[None], axis=-1)
    mask = dx > 0
    q = float(np.max(dv[mask] / dx[mask])) if mask.any() else 0.0
    if field.lipschitz_bound is not None and q > field.lipschitz_bound * (1 + 1e-12):
        raise ValueError(f"sampled quotient {q} exceeds declared bound {field.lipschitz_bound}")
    return q


def flow_points(field: GrowthField, points, duration: float, dt: float,
                frozen_measure: Optional[SignalMeasure] = None) -> np.ndarray:
    """Integrate ``x' = v(x)`` for ``duration`` with classical RK4.

    The step is ``duration / ceil(duration / dt)`` so the endpoint is hit
    exactly. Measure-dependent fields are frozen at ``frozen_measure``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if duration < 0:
        raise ValueError("duration must be nonnegative")
    x = np.array(points, dtype=float)
    if duration == 0:
        return x
    v = field.frozen(frozen_measure)
    n_steps = max(1, math.ceil(duration / dt - 1e-9))
    h = duration / n_steps
    # overflow is reported as FlowError below, not as a numpy warning
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(n_steps):
            k1 = v(x)
            k2 = v(x + 0.5 * h * k1)
            k3 = v(x + 0.5 * h * k2)
            k4 = v(x + h * k3)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(x)):
                raise FlowError(f"non-finite state while integrating {field!r}")
    return x


def pushforward(measure: SignalMeasure, field: GrowthField, duration: float,
                dt: float, frozen_measure: Optional[SignalMeasure] = None) -> SignalMeasure:
    """Flow the nodes of ``measure.curve`` and carry the masses along.

    The returned measure is bound to the image curve; masses are untouched,
    so the total is preserved exactly. A measure-dependent field is frozen at
    ``frozen_measure`` (default: ``measure`` itself).
    """
    frozen = measure if frozen_measure is None else frozen_measure
    pos = flow_points(field, measure.curve.positions, duration, dt, frozen_measure=frozen)
    if duration == 0:
        return measure
    return rebind(measure, EmbeddedCurve.from_positions(pos))


def pullback(measure: SignalMeasure, field: GrowthField, duration: float,
             dt: float, frozen_measure: Optional[SignalMeasure] = None) -> SignalMeasure:
    """Transport back along ``-v`` for ``duration``.

    ``frozen_measure`` defaults to ``measure``; pass the measure at which the
    forward flow was frozen to invert a measure-dependent push-forward.
    """
    frozen = measure if frozen_measure is None else frozen_measure
    back = field.frozen(frozen).reversed()
    pos = flow_points(back, measure.curve.positions, duration, dt)
    if duration == 0:
        return measure
    return rebind(measure, EmbeddedCurve.from_positions(pos))
