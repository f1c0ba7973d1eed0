import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from morphosplit.bracket_analytic import (
    SignalKind, b_field, bracket_density, bracket_weak, perturbation_operator,
    projected_gradient_image, reference_s1,
)
from morphosplit.flow import named_field, polynomial_field
from morphosplit.geometry import build_circle, build_ellipse, weighted_norm
from morphosplit.measure import cosine, from_density, uniform

PAPER = named_field("paper")


def continuous_d(theta, k):
    # unit circle, a = 1 + cos^2: D f = -2 a f'' - a' f'  for f = cos(k theta)
    a = 1 + np.cos(theta) ** 2
    da = -np.sin(2 * theta)
    f1 = -k * np.sin(k * theta)
    f2 = -k * k * np.cos(k * theta)
    return -2 * a * f2 - da * f1


@pytest.mark.parametrize("k", [1, 2, 3])
def test_operator_matches_continuum(k):
    errs = []
    for n in (128, 256):
        c = build_circle(n)
        d = perturbation_operator(c, PAPER)(np.cos(k * c.theta))
        errs.append(np.max(np.abs(d - continuous_d(c.theta, k))))
    assert errs[1] < 1e-2 * k * k
    assert errs[0] / errs[1] > 3.5


def test_operator_kills_constants():
    c = build_ellipse(64, 1.3, 0.6)
    assert np.max(np.abs(perturbation_operator(c, PAPER)(np.ones(64)))) < 1e-11


def test_matrix_and_transpose():
    c = build_ellipse(24, 1.3, 0.6)
    op = perturbation_operator(c, PAPER)
    rng = np.random.default_rng(0)
    f, y = rng.normal(size=(2, 24))
    m = op.matrix()
    assert np.allclose(m @ f, op(f))
    assert np.allclose(m.T @ y, op.transpose_apply(y))


def test_nodal_b_field_identity():
    # on a curve both tangential pieces reduce to a * grad f
    c = build_ellipse(64, 1.3, 0.6)
    f = np.sin(2 * c.theta)
    assert np.allclose(b_field(c, PAPER, f), projected_gradient_image(c, PAPER, f))


def test_constant_signal_closed_form():
    c = build_circle(512)
    d = bracket_density(c, PAPER, uniform(c, 0.1))
    ref = 0.2 * np.cos(2 * c.theta)
    assert weighted_norm(c, d - ref) / weighted_norm(c, ref) < 1e-9


def test_cosine_signal_closed_form():
    c = build_circle(512)
    d = bracket_density(c, PAPER, cosine(c, 0.1))
    ref = reference_s1(SignalKind.COSINE, 0.1, c.theta)
    assert weighted_norm(c, d - ref) / weighted_norm(c, ref) < 1e-4


def test_weak_pairing_against_quadrature():
    # int (D f) rho dtheta with D from the continuum formula, integrated by quad
    c = build_circle(512)
    mu = cosine(c, 1.0)
    f = np.cos(2 * c.theta)
    exact, _ = quad(lambda t: continuous_d(t, 2) * (1 + np.cos(t)), 0, 2 * np.pi, limit=200)
    assert bracket_weak(c, PAPER, mu, f) == pytest.approx(exact, rel=1e-4)


def test_reference_values():
    th = np.array([0.0, np.pi / 2, np.pi])
    assert np.allclose(reference_s1("constant", 0.1, th), [0.2, -0.2, 0.2])
    assert np.allclose(reference_s1("cosine", 1.0, th), [8.0, -2.0, -4.0])


def test_rotation_bracket_vanishes():
    c = build_ellipse(64, 1.0, 1.0)
    d = bracket_density(c, named_field("rotation"), cosine(c, 0.3))
    assert np.max(np.abs(d)) < 1e-12


def test_total_bracket_mass_zero():
    c = build_ellipse(64, 1.6, 0.8)
    d = bracket_density(c, PAPER, from_density(c, 1 + np.sin(c.theta) ** 2))
    assert abs(np.sum(d * c.weights)) < 1e-11


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(8, 64), s=st.floats(-3, 3),
       coeffs=st.lists(st.floats(-1, 1), min_size=6, max_size=6))
def test_linearity_and_adjointness(seed, n, s, coeffs):
    v = polynomial_field(np.reshape(coeffs, (2, 3)))
    c = build_ellipse(n, 1.2, 0.9)
    rng = np.random.default_rng(seed)
    r1, r2, f = rng.normal(size=(3, n))
    m1, m2 = from_density(c, r1), from_density(c, r2)
    combo = from_density(c, r1 + s * r2)
    lhs = bracket_density(c, v, combo)
    rhs = bracket_density(c, v, m1) + s * bracket_density(c, v, m2)
    scale = np.max(np.abs(lhs)) + np.max(np.abs(rhs)) + 1e-12
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * scale
    paired = np.sum(f * bracket_density(c, v, m1) * c.weights)
    assert paired == pytest.approx(bracket_weak(c, v, m1, f), rel=1e-9, abs=1e-9)
