import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from morphosplit.geometry import (
    DegenerateCurveError, EmbeddedCurve, build_circle, build_ellipse, divergence_from_half,
    integrate, laplace_beltrami, laplacian_bands, metric_from_positions, parameter_grid,
    tangential_gradient_half, tangential_trace, unit_tangent, weighted_norm,
)
from morphosplit.flow import named_field


def discrete_circle_eigenvalue(n, radius, k):
    # flux stencil on a circle: sqrt_g = r sin(h)/h everywhere
    h = 2 * math.pi / n
    g = radius * math.sin(h) / h
    return -4.0 * math.sin(k * h / 2) ** 2 / (g * h) ** 2


def test_parameter_grid():
    th = parameter_grid(16)
    assert th[0] == 0.0 and th.size == 16
    assert np.allclose(np.diff(th), 2 * np.pi / 16)


@pytest.mark.parametrize("n,r", [(64, 1.0), (256, 2.0), (33, 0.5)])
def test_circle_length_exact_stencil(n, r):
    # the central-difference metric is r sin(h)/h, so the quadrature length is exact in closed form
    c = build_circle(n, r)
    h = 2 * np.pi / n
    assert c.length == pytest.approx(2 * np.pi * r * np.sin(h) / h, rel=1e-13)
    assert abs(c.length - 2 * np.pi * r) <= 2 * np.pi * r * h**2 / 6 * 1.001


def test_ellipse_metric_second_order():
    errs = []
    for n in (64, 128, 256):
        c = build_ellipse(n, 2.0, 0.5)
        exact = np.hypot(2.0 * np.sin(c.theta), 0.5 * np.cos(c.theta))
        errs.append(np.max(np.abs(c.sqrt_g - exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.95)


def test_metric_rejects_degenerate():
    pts = np.zeros((16, 2))
    with pytest.raises(DegenerateCurveError):
        metric_from_positions(pts)
    with pytest.raises(ValueError):
        build_circle(4)


def test_curve_arrays_read_only():
    c = build_circle(16)
    with pytest.raises(ValueError):
        c.positions[0, 0] = 3.0


def test_unit_tangent_on_circle():
    c = build_circle(64)
    t = unit_tangent(c)
    assert np.allclose(np.linalg.norm(t, axis=1), 1.0)
    assert np.allclose(t, np.column_stack([-np.sin(c.theta), np.cos(c.theta)]), atol=1e-14)


@pytest.mark.parametrize("k", [1, 2, 3, 7])
def test_laplacian_circle_eigenvalue_exact(k):
    c = build_circle(128, 1.5)
    f = np.cos(k * c.theta)
    lam = discrete_circle_eigenvalue(128, 1.5, k)
    assert np.allclose(laplace_beltrami(c, f), lam * f, atol=1e-10 * abs(lam))
    assert lam == pytest.approx(-k * k / 1.5**2, rel=2 * (k * 2 * np.pi / 128) ** 2)


def test_laplacian_grid_order_cos3():
    def err(n):
        c = build_circle(n)
        f = np.cos(3 * c.theta)
        return weighted_norm(c, laplace_beltrami(c, f) + 9 * f) / weighted_norm(c, 9 * f)

    assert err(256) <= 1e-3
    assert np.log(err(128) / err(512)) / np.log(4) >= 1.8


def test_laplacian_flux_composition():
    c = build_ellipse(40, 1.3, 0.7)
    f = np.sin(c.theta) + np.cos(2 * c.theta) ** 2
    direct = laplace_beltrami(c, f)
    assert np.allclose(direct, divergence_from_half(c, tangential_gradient_half(c, f)))
    diag, upper = laplacian_bands(c)
    k = np.diag(diag) + np.diag(upper[:-1], 1) + np.diag(upper[:-1], -1)
    k[0, -1] = k[-1, 0] = upper[-1]
    assert np.allclose(k @ f / c.weights, direct)


def test_laplacian_annihilates_constants():
    c = build_ellipse(50, 1.3, 0.7)
    assert np.max(np.abs(laplace_beltrami(c, np.full(50, 3.0)))) < 1e-12


positive = st.floats(0.3, 3.0)


@settings(max_examples=40, deadline=None)
@given(a=positive, b=positive, n=st.integers(8, 80), seed=st.integers(0, 2**31))
def test_laplacian_self_adjoint_and_mass_neutral(a, b, n, seed):
    c = build_ellipse(n, a, b)
    rng = np.random.default_rng(seed)
    f, h = rng.normal(size=(2, n))
    lf, lh = laplace_beltrami(c, f), laplace_beltrami(c, h)
    scale = np.sum(np.abs(lf * h * c.weights)) + 1e-300
    assert abs(integrate(c, lf * h) - integrate(c, f * lh)) <= 1e-12 * scale + 1e-14
    assert abs(integrate(c, lf)) <= 1e-12 * np.sum(np.abs(lf) * c.weights) + 1e-14
    # negative semidefinite
    assert integrate(c, f * lf) <= 1e-12 * scale


def test_tangential_trace_affine_field_on_circle():
    # J = diag(1, 2), t = (-sin, cos)  ->  sin^2 + 2 cos^2 = 1 + cos^2
    c = build_circle(64)
    a = tangential_trace(c, named_field("paper"))
    assert np.allclose(a, 1 + np.cos(c.theta) ** 2)


def test_tangential_trace_rotation_vanishes():
    c = build_ellipse(64, 2.0, 1.0)
    assert np.max(np.abs(tangential_trace(c, named_field("rotation")))) < 1e-15


def test_weighted_norm():
    c = build_circle(64)
    ones = np.ones(64)
    assert weighted_norm(c, ones, 1) == pytest.approx(c.length)
    assert weighted_norm(c, ones, 2) == pytest.approx(np.sqrt(c.length))
    assert weighted_norm(c, -2 * ones, np.inf) == 2.0
    with pytest.raises(ValueError):
        weighted_norm(c, ones, 0.5)
    with pytest.raises(ValueError):
        weighted_norm(c, np.ones(10))


def test_reversed_curve_keeps_length():
    c = build_ellipse(32, 1.2, 0.4)
    assert c.reversed().length == pytest.approx(c.length)


def test_from_positions_roundtrip():
    c = build_ellipse(32, 1.2, 0.4, center=(1.0, -2.0))
    c2 = EmbeddedCurve.from_positions(np.array(c.positions))
    assert np.array_equal(c.sqrt_g, c2.sqrt_g)
