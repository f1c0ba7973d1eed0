"""Signal measures carried by curve nodes (Lagrangian mass representation)."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .geometry import EmbeddedCurve

CSV_COLUMNS = ("theta", "x", "y", "sqrt_g", "mass", "density")


@dataclass(frozen=True, eq=False)
class SignalMeasure:
    """Node masses bound to a curve.

    The density with respect to arclength is derived, never stored, so the
    two descriptions cannot drift apart.
    """

    curve: EmbeddedCurve
    masses: np.ndarray

    def __post_init__(self):
        m = np.array(self.masses, dtype=float)
        if m.shape != (self.curve.n_nodes,):
            raise ValueError(f"masses have shape {m.shape}, curve has {self.curve.n_nodes} nodes")
        if not np.all(np.isfinite(m)):
            raise ValueError("masses must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)

    @property
    def density(self) -> np.ndarray:
        return self.masses / self.curve.weights

    @property
    def total(self) -> float:
        return float(np.sum(self.masses))

    @property
    def is_probability_like(self) -> bool:
        """Nonnegative with positive total mass."""
        return bool(np.all(self.masses >= 0) and self.total > 0)

    def scaled(self, factor: float) -> "SignalMeasure":
        return SignalMeasure(self.curve, factor * self.masses)


def from_density(curve: EmbeddedCurve, density_values) -> SignalMeasure:
    """Measure with the given density with respect to the Riemannian volume."""
    rho = np.asarray(density_values, dtype=float)
    if rho.ndim == 0:
        rho = np.full(curve.n_nodes, float(rho))
    if not np.all(np.isfinite(rho)):
        raise ValueError("density must be finite")
    return SignalMeasure(curve, rho * curve.weights)


def uniform(curve: EmbeddedCurve, value: float) -> SignalMeasure:
    return from_density(curve, value)


def cosine(curve: EmbeddedCurve, scale: float) -> SignalMeasure:
    """Density ``scale * (1 + cos theta)``."""
    return from_density(curve, scale * (1.0 + np.cos(curve.theta)))


def require_nonnegative(measure: SignalMeasure) -> SignalMeasure:
    """Guard for initial data of simulations (signed measures are rejected)."""
    if np.any(measure.masses < 0):
        raise ValueError("initial signal must be nonnegative")
    return measure


def rebind(measure: SignalMeasure, new_curve: EmbeddedCurve) -> SignalMeasure:
    """Move the node masses onto ``new_curve`` unchanged.

    When ``new_curve`` is the flow image of ``measure.curve`` this is the
    push-forward of the measure by that flow.
    """
    if new_curve.n_nodes != measure.curve.n_nodes:
        raise ValueError(
            f"node count mismatch: {measure.curve.n_nodes} vs {new_curve.n_nodes}"
        )
    return SignalMeasure(new_curve, measure.masses)


def lp_distance(measure_a: SignalMeasure, measure_b: SignalMeasure, p: float = 2.0) -> float:
    """Weighted l^p norm of the density difference, weights from ``measure_a``'s curve."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if measure_a.curve.n_nodes != measure_b.curve.n_nodes:
        raise ValueError("measures are bound to curves with different node counts")
    if not np.array_equal(measure_a.curve.positions, measure_b.curve.positions):
        raise ValueError("measures must be bound to the same curve")
    diff = np.abs(measure_a.density - measure_b.density)
    if np.isinf(p):
        return float(diff.max())
    return float(np.sum(diff**p * measure_a.curve.weights) ** (1.0 / p))


def entropy(measure: SignalMeasure) -> float:
    """Discrete ``sum rho log rho w`` for strictly positive densities."""
    rho = measure.density
    if np.any(rho <= 0):
        raise ValueError("entropy needs a strictly positive density")
    return float(np.sum(rho * np.log(rho) * measure.curve.weights))


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def measure_rows(measure: SignalMeasure):
    """Rows ``theta, x, y, sqrt_g, mass, density`` as numbers."""
    c = measure.curve
    rho = measure.density
    for i in range(c.n_nodes):
        yield (c.theta[i], c.positions[i, 0], c.positions[i, 1], c.sqrt_g[i],
               measure.masses[i], rho[i])


def to_csv(measure: SignalMeasure) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in measure_rows(measure):
        writer.writerow([format_float(v) for v in row])
    return buf.getvalue()


def from_csv(text: str) -> SignalMeasure:
    """Inverse of :func:`to_csv`; the curve is rebuilt from ``x, y``.

    The stored ``sqrt_g`` column must agree with the stencil recomputed from
    positions, and masses are read verbatim.
    """
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"expected columns {CSV_COLUMNS}, got {reader.fieldnames}")
    rows = list(reader)
    pos = np.array([[float(r["x"]), float(r["y"])] for r in rows])
    masses = np.array([float(r["mass"]) for r in rows])
    curve = EmbeddedCurve.from_positions(pos)
    stored = np.array([float(r["sqrt_g"]) for r in rows])
    if not np.allclose(stored, curve.sqrt_g, rtol=1e-12, atol=0):
        raise ValueError("sqrt_g column is inconsistent with positions")
    return SignalMeasure(curve, masses)
