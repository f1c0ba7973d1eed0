"""
Closed plane curves on a uniform Lagrangian grid and their intrinsic operators.

A curve is sampled at ``N`` nodes ``theta_i = 2*pi*i/N``. Every stencil is
periodic: node ``N`` is node ``0``. The Laplace-Beltrami operator is written
in flux form,

.. math::

    (\\Delta f)_i = \\frac{1}{w_i}\\left(F_{i+1/2} - F_{i-1/2}\\right),
    \\qquad F_{i+1/2} = \\frac{f_{i+1} - f_i}{\\sqrt{g}_{i+1/2}\\,\\Delta\\theta},

with quadrature weights ``w_i = sqrt_g_i * dtheta`` and half-node metric
``sqrt_g_{i+1/2} = (sqrt_g_i + sqrt_g_{i+1}) / 2``. The operator is therefore
self-adjoint for the ``w``-weighted inner product and annihilates constants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_NODES = 8


class DegenerateCurveError(ValueError):
    """Raised when the discrete metric is not strictly positive."""


@dataclass(frozen=True, eq=False)
class EmbeddedCurve:
    """Closed curve in the plane sampled on a uniform parameter grid.

    Attributes
    ----------
    positions : ndarray, shape (N, 2)
        Node positions.
    sqrt_g : ndarray, shape (N,)
        Metric density ``|d x / d theta|`` at each node.
    """

    positions: np.ndarray
    sqrt_g: np.ndarray

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        sg = np.array(self.sqrt_g, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError(f"positions must have shape (N, 2), got {pos.shape}")
        if pos.shape[0] < MIN_NODES:
            raise ValueError(f"need at least {MIN_NODES} nodes, got {pos.shape[0]}")
        if sg.shape != (pos.shape[0],):
            raise ValueError("sqrt_g must have one entry per node")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        if not np.all(sg > 0):
            raise DegenerateCurveError("metric density must be strictly positive")
        pos.setflags(write=False)
        sg.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "sqrt_g", sg)

    @classmethod
    def from_positions(cls, positions) -> "EmbeddedCurve":
        positions = np.asarray(positions, dtype=float)
        return cls(positions, metric_from_positions(positions))

    @property
    def n_nodes(self) -> int:
        return self.positions.shape[0]

    @property
    def dtheta(self) -> float:
        return 2.0 * np.pi / self.n_nodes

    @property
    def theta(self) -> np.ndarray:
        return parameter_grid(self.n_nodes)

    @property
    def weights(self) -> np.ndarray:
        """Quadrature weights ``sqrt_g_i * dtheta`` (arclength per node)."""
        return self.sqrt_g * self.dtheta

    @property
    def length(self) -> float:
        return float(self.weights.sum())

    def reversed(self) -> "EmbeddedCurve":
        """Same curve traversed in the opposite direction (node i -> node -i)."""
        idx = (-np.arange(self.n_nodes)) % self.n_nodes
        return EmbeddedCurve(self.positions[idx], self.sqrt_g[idx])


def parameter_grid(n_nodes: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n_nodes) / n_nodes


def _central_difference(values: np.ndarray, dtheta: float) -> np.ndarray:
    return (np.roll(values, -1, axis=0) - np.roll(values, 1, axis=0)) / (2.0 * dtheta)


def metric_from_positions(positions) -> np.ndarray:
    """Metric density ``|d x / d theta|`` by periodic central differences.

    Raises
    ------
    DegenerateCurveError
        If any node has a vanishing tangent (colliding neighbours).
    """
    positions = np.asarray(positions, dtype=float)
    n = positions.shape[0]
    if n < MIN_NODES:
        raise ValueError(f"need at least {MIN_NODES} nodes, got {n}")
    tangent = _central_difference(positions, 2.0 * np.pi / n)
    sqrt_g = np.hypot(tangent[:, 0], tangent[:, 1])
    if not np.all(sqrt_g > 0):
        bad = np.flatnonzero(~(sqrt_g > 0))
        raise DegenerateCurveError(f"degenerate metric at nodes {bad[:10].tolist()}")
    return sqrt_g


def build_circle(n_nodes: int, radius: float = 1.0, center=(0.0, 0.0)) -> EmbeddedCurve:
    """Circle ``center + radius * (cos theta, sin theta)`` on ``n_nodes`` nodes."""
    if n_nodes < MIN_NODES:
        raise ValueError(f"n_nodes must be >= {MIN_NODES}, got {n_nodes}")
    if not radius > 0:
        raise ValueError("radius must be positive")
    theta = parameter_grid(n_nodes)
    pos = np.column_stack([np.cos(theta), np.sin(theta)]) * radius + np.asarray(center, float)
    return EmbeddedCurve.from_positions(pos)


def build_ellipse(n_nodes: int, a: float, b: float, center=(0.0, 0.0)) -> EmbeddedCurve:
    """Axis-aligned ellipse ``center + (a cos theta, b sin theta)``."""
    if n_nodes < MIN_NODES:
        raise ValueError(f"n_nodes must be >= {MIN_NODES}, got {n_nodes}")
    theta = parameter_grid(n_nodes)
    pos = np.column_stack([a * np.cos(theta), b * np.sin(theta)]) + np.asarray(center, float)
    return EmbeddedCurve.from_positions(pos)


def unit_tangent(curve: EmbeddedCurve) -> np.ndarray:
    """Unit tangents from the same central stencil that defines ``sqrt_g``."""
    tangent = _central_difference(curve.positions, curve.dtheta)
    return tangent / curve.sqrt_g[:, None]


def half_node_metric(curve: EmbeddedCurve) -> np.ndarray:
    """``sqrt_g`` at ``i + 1/2``, the mean of the two adjacent nodes."""
    return 0.5 * (curve.sqrt_g + np.roll(curve.sqrt_g, -1))


def flux_conductance(curve: EmbeddedCurve) -> np.ndarray:
    """Edge coefficients ``c_{i+1/2} = 1 / (sqrt_g_{i+1/2} dtheta)``."""
    return 1.0 / (half_node_metric(curve) * curve.dtheta)


def tangential_gradient_half(curve: EmbeddedCurve, f) -> np.ndarray:
    """Tangential gradient component of ``f`` at half nodes ``i + 1/2``."""
    f = _check_paired(curve, f)
    return (np.roll(f, -1) - f) * flux_conductance(curve)


def divergence_from_half(curve: EmbeddedCurve, flux) -> np.ndarray:
    """Divergence at nodes of a tangential field given at half nodes."""
    flux = np.asarray(flux, dtype=float)
    return (flux - np.roll(flux, 1)) / curve.weights


def laplace_beltrami(curve: EmbeddedCurve, f) -> np.ndarray:
    """Flux-form Laplace-Beltrami operator applied to a node function."""
    return divergence_from_half(curve, tangential_gradient_half(curve, f))


def laplacian_bands(curve: EmbeddedCurve):
    """Stiffness bands of ``-w * Delta``: ``(K f)_i = F_{i+1/2} - F_{i-1/2}``.

    Returns
    -------
    diag, upper : ndarray
        ``K[i, i] = diag[i]`` and ``K[i, i+1] = K[i+1, i] = upper[i]`` (cyclic).
    """
    c = flux_conductance(curve)
    return -(c + np.roll(c, 1)), c


def tangential_trace(curve: EmbeddedCurve, field) -> np.ndarray:
    """Tangential trace ``<Jv t, t>`` of a growth field's Jacobian at every node.

    ``field`` is anything with a ``jacobian(points)`` method returning an
    ``(N, 2, 2)`` array (see :class:`morphosplit.flow.GrowthField`).
    """
    jac = np.asarray(field.jacobian(curve.positions), dtype=float)
    t = unit_tangent(curve)
    return np.einsum("ni,nij,nj->n", t, jac, t)


def weighted_norm(curve: EmbeddedCurve, values, p: float = 2.0) -> float:
    """``(sum |f_i|^p w_i)^(1/p)``; ``p = inf`` gives the max norm."""
    values = _check_paired(curve, values)
    if np.isinf(p):
        return float(np.max(np.abs(values)))
    if p < 1:
        raise ValueError("p must be >= 1")
    return float(np.sum(np.abs(values) ** p * curve.weights) ** (1.0 / p))


def integrate(curve: EmbeddedCurve, values) -> float:
    return float(np.dot(_check_paired(curve, values), curve.weights))


def _check_paired(curve: EmbeddedCurve, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (curve.n_nodes,):
        raise ValueError(f"node function has shape {f.shape}, curve has {curve.n_nodes} nodes")
    return f
