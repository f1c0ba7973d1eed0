"""Weak-form bracket between diffusion and transport, evaluated on the grid.

The first-order change of the Laplace-Beltrami operator under the flow of
``v`` is the operator

    D f = <grad f, grad a> - div(B(f, v) + (Jv grad f)_M),

where ``a = Tr(Jv)_M`` is the tangential trace. On a curve,
``B(f, v) = <grad f, Jv t> t`` and ``(Jv grad f)_M = <Jv grad f, t> t``.
The bracket acts on a measure ``mu`` weakly, ``f -> int D f dmu``; its
density with respect to arclength is the weighted adjoint ``W^{-1} D^T W rho``.

All pieces use the half-node stencils of :mod:`morphosplit.geometry`, so
``D`` is tridiagonal (cyclic) and kills constants exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import (
    EmbeddedCurve,
    _central_difference,
    _check_paired,
    flux_conductance,
    tangential_trace,
    unit_tangent,
)
from .measure import SignalMeasure


def b_field(curve: EmbeddedCurve, field, f) -> np.ndarray:
    """Tangential component ``<grad f, Jv t>`` of ``B(f, v)`` at the nodes.

    ``grad f = (f' / sqrt_g) t`` with ``f'`` a central difference.
    """
    f = _check_paired(curve, f)
    grad = _central_difference(f, curve.dtheta) / curve.sqrt_g
    t = unit_tangent(curve)
    jac = field.jacobian(curve.positions)
    return grad * np.einsum("ni,nij,nj->n", t, jac, t)


def projected_gradient_image(curve: EmbeddedCurve, field, f) -> np.ndarray:
    """Tangential component of ``(Jv grad f)_M`` at the nodes."""
    f = _check_paired(curve, f)
    grad = _central_difference(f, curve.dtheta) / curve.sqrt_g
    t = unit_tangent(curve)
    jv_grad = np.einsum("nij,nj->ni", field.jacobian(curve.positions), grad[:, None] * t)
    return np.einsum("ni,ni->n", jv_grad, t)


@dataclass(frozen=True, eq=False)
class PerturbationOperator:
    """Cyclic tridiagonal operator ``(D f)_i = lo_i f_{i-1} + di_i f_i + up_i f_{i+1}``."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    weights: np.ndarray

    def __call__(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        return self.lower * np.roll(f, 1) + self.diag * f + self.upper * np.roll(f, -1)

    def transpose_apply(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return self.diag * y + np.roll(self.upper * y, 1) + np.roll(self.lower * y, -1)

    def adjoint_apply(self, rho) -> np.ndarray:
        """``W^{-1} D^T W rho``: adjoint for the weighted inner product."""
        return self.transpose_apply(self.weights * np.asarray(rho, dtype=float)) / self.weights

    def matrix(self) -> np.ndarray:
        n = self.diag.size
        m = np.diag(self.diag)
        i = np.arange(n)
        m[i, (i + 1) % n] += self.upper
        m[i, (i - 1) % n] += self.lower
        return m


def perturbation_operator(curve: EmbeddedCurve, field) -> PerturbationOperator:
    """Assemble ``D`` for ``field`` on ``curve``.

    Half-node quantities: gradient ``G_{i+1/2} = c_{i+1/2} (f_{i+1} - f_i)``
    and trace ``a_{i+1/2}``, the mean of the nodal traces. On a curve both
    ``B(f, v)`` and ``(Jv grad f)_M`` equal ``a G`` along the tangent (the
    same identity :func:`b_field` and :func:`projected_gradient_image`
    evaluate at the nodes), so their sum is ``2 a G``.
    """
    c = flux_conductance(curve)
    w = curve.weights
    a = tangential_trace(curve, field)
    grad_a = c * (np.roll(a, -1) - a)
    s = a + np.roll(a, -1)

    # <grad f, grad a> -> average of edge products onto node i
    # -div(s G) -> -(s_{+} G_{+} - s_{-} G_{-}) / w_i
    cp, cm = c, np.roll(c, 1)
    gp, gm = grad_a, np.roll(grad_a, 1)
    sp, sm = s, np.roll(s, 1)
    upper = 0.5 * gp * cp - sp * cp / w
    lower = -0.5 * gm * cm - sm * cm / w
    diag = -0.5 * gp * cp + 0.5 * gm * cm + (sp * cp + sm * cm) / w
    return PerturbationOperator(lower, diag, upper, w.copy())


def bracket_weak(curve: EmbeddedCurve, field, measure: SignalMeasure, f) -> float:
    """Pairing ``int D f dmu`` of the bracket with a test function ``f``."""
    op = perturbation_operator(curve, field)
    return float(np.sum(op(_check_paired(curve, f)) * measure.density * curve.weights))


def bracket_density(curve: EmbeddedCurve, field, measure: SignalMeasure) -> np.ndarray:
    """Density (w.r.t. arclength) of the bracket measure, ``W^{-1} D^T W rho``."""
    return perturbation_operator(curve, field).adjoint_apply(measure.density)


class SignalKind(Enum):
    CONSTANT = "constant"
    COSINE = "cosine"


def reference_s1(kind, scale: float, theta) -> np.ndarray:
    """Closed-form bracket densities on the unit circle for ``v = (x - 1, 2y)``.

    ``CONSTANT``: density ``c``        -> ``2 c cos(2 theta)``
    ``COSINE``:   density ``c (1 + cos theta)`` -> ``c (12 cos^3 + 4 cos^2 - 6 cos - 2)``
    """
    kind = SignalKind(kind)
    theta = np.asarray(theta, dtype=float)
    if kind is SignalKind.CONSTANT:
        return 2.0 * scale * np.cos(2.0 * theta)
    c = np.cos(theta)
    return scale * (12.0 * c**3 + 4.0 * c**2 - 6.0 * c - 2.0)
