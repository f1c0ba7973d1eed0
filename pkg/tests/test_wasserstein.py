import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from morphosplit.flow import named_field
from morphosplit.geometry import build_circle, build_ellipse
from morphosplit.measure import cosine, from_density, uniform
from morphosplit.splitting import SplitSchedule, run_scheme
from morphosplit.wasserstein import (
    DiscreteMeasure, circular_w2, circular_w2_lp, circular_wasserstein, curve_arclength,
    geodesic_distance, holder_certificate, solve_transport, wasserstein_exact,
)


def quantile_w2(x, a, y, b, grid=200_001):
    # 1-d oracle on the real line: integrate |F^-1 - G^-1|^2 on a fine level grid
    ox, oy = np.argsort(x), np.argsort(y)
    ca, cb = np.cumsum(a[ox]) / a.sum(), np.cumsum(b[oy]) / b.sum()
    u = (np.arange(grid) + 0.5) / grid
    qa = x[ox][np.searchsorted(ca, u).clip(max=x.size - 1)]
    qb = y[oy][np.searchsorted(cb, u).clip(max=y.size - 1)]
    return np.sqrt(np.mean((qa - qb) ** 2))


def test_hand_computed_values():
    mu = DiscreteMeasure([[0.0, 0.0]], [1.0])
    nu = DiscreteMeasure([[2.0, 0.0], [0.0, 0.0]], [0.25, 0.75])
    assert wasserstein_exact(mu, nu) == pytest.approx(1.0, abs=1e-12)
    assert wasserstein_exact(mu, nu, p=1) == pytest.approx(0.5, abs=1e-12)
    sq = DiscreteMeasure([[0, 0], [1, 0]], [1, 1])
    up = DiscreteMeasure([[0, 1], [1, 1]], [1, 1])
    assert wasserstein_exact(sq, up) == pytest.approx(1.0, abs=1e-12)


def test_assignment_and_lp_agree():
    rng = np.random.default_rng(3)
    x, y = rng.normal(size=(2, 12, 2))
    cost = np.sum((x[:, None] - y[None]) ** 2, axis=-1)
    v_assign, plan = solve_transport(np.full(12, 1 / 12), np.full(12, 1 / 12), cost)
    # perturb one weight to force the LP path, then undo in the limit
    a = np.full(12, 1 / 12)
    v_lp, plan_lp = solve_transport(a * (1 + 1e-14 * np.arange(12)) / np.sum(a * (1 + 1e-14 * np.arange(12))),
                                    np.full(12, 1 / 12), cost)
    assert v_lp == pytest.approx(v_assign, rel=1e-8)
    assert np.allclose(plan.sum(axis=1), 1 / 12) and np.allclose(plan_lp.sum(axis=0), 1 / 12)


def test_line_oracle():
    rng = np.random.default_rng(5)
    x, y = rng.normal(size=(2, 15))
    a, b = rng.random(15) + 0.1, rng.random(15) + 0.1
    b *= a.sum() / b.sum()
    mu = DiscreteMeasure(np.column_stack([x, 0 * x]), a)
    nu = DiscreteMeasure(np.column_stack([y, 0 * y]), b)
    assert wasserstein_exact(mu, nu) == pytest.approx(quantile_w2(x, a, y, b), rel=1e-4)


def test_mass_mismatch_and_size_limit():
    with pytest.raises(ValueError):
        wasserstein_exact(DiscreteMeasure([[0, 0]], [1.0]), DiscreteMeasure([[0, 0]], [2.0]))
    big = DiscreteMeasure(np.zeros((513, 2)), np.ones(513))
    with pytest.raises(ValueError):
        wasserstein_exact(big, big)
    with pytest.raises(ValueError):
        DiscreteMeasure([[0, 0]], [-1.0])


def test_circle_rotation_by_one_node():
    c = build_circle(32)
    s, length = curve_arclength(c)
    h = length / 32
    # a uniform measure is invariant under a one-node rotation
    assert circular_wasserstein(s, np.ones(32), s + h, np.ones(32), length) < 1e-12
    assert circular_wasserstein([s[3]], [1.0], [s[4]], [1.0], length) == pytest.approx(h, rel=1e-12)
    # half a turn of a single atom
    assert circular_wasserstein([0.0], [1.0], [length / 2], [1.0], length) == pytest.approx(length / 2)


def test_geodesic_distance():
    d = geodesic_distance(np.array([0.0, 1.0, 9.0]), 10.0)
    assert np.allclose(d, [[0, 1, 1], [1, 0, 2], [1, 2, 0]])


@pytest.mark.parametrize("n", [8, 16, 33, 64])
def test_circular_matches_lp(n):
    rng = np.random.default_rng(n)
    for kind in range(3):
        c = build_circle(n) if kind < 2 else build_ellipse(n, 1.5, 0.7)
        a = rng.random(n) + (0.0 if kind == 1 else 0.1)
        b = rng.random(n) ** 3
        b *= np.sum(a * c.weights) / np.sum(b * c.weights)
        assert abs(circular_w2(c, a, b) - circular_w2_lp(c, a, b)) <= 1e-6


densities = st.lists(st.floats(0.0, 1.0), min_size=12, max_size=12).filter(lambda v: sum(v) > 0.1)


@settings(max_examples=100, deadline=None)
@given(x=densities, y=densities, z=densities)
def test_metric_axioms(x, y, z):
    c = build_circle(12)
    dens = []
    for v in (x, y, z):
        v = np.asarray(v)
        dens.append(v / np.sum(v * c.weights))
    dxy, dyz, dxz = (circular_w2(c, dens[i], dens[j]) for i, j in ((0, 1), (1, 2), (0, 2)))
    assert dxy >= 0
    assert circular_w2(c, dens[0], dens[0]) == 0.0
    assert dxy == pytest.approx(circular_w2(c, dens[1], dens[0]), abs=1e-10)
    assert dxz <= dxy + dyz + 1e-8


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), shift=st.tuples(st.floats(-2, 2), st.floats(-2, 2)))
def test_translation_invariance(seed, shift):
    rng = np.random.default_rng(seed)
    p = rng.normal(size=(6, 2))
    w = rng.random(6) + 0.05
    assert wasserstein_exact(DiscreteMeasure(p, w), DiscreteMeasure(p + shift, w)) == \
        pytest.approx(np.hypot(*shift), abs=1e-7)


def test_holder_zero_field_uniform():
    c = build_circle(32)
    traj = run_scheme(uniform(c, 0.1), named_field("zero"), SplitSchedule(0.25, 4))
    fit = holder_certificate(traj, 40)
    assert np.all(fit.pairs[:, 2] <= 1e-12)
    assert fit.lipschitz == 0.0 and fit.holder == 0.0


def test_holder_pure_transport_has_no_sqrt_term():
    c = build_circle(64)
    traj = run_scheme(cosine(c, 0.1), named_field("paper"), SplitSchedule(0.25, 5, heat_substeps=0))
    fit = holder_certificate(traj, 64, seed=1)
    assert fit.holder <= 2 * fit.holder_stderr + 1e-9
    assert fit.lipschitz > 0
    assert fit.pairs.shape == (64, 3)


def test_holder_requires_states():
    c = build_circle(16)
    traj = run_scheme(uniform(c, 0.1), named_field("paper"), SplitSchedule(0.1, 1))
    with pytest.raises(ValueError):
        holder_certificate(traj)


def test_holder_model_and_determinism():
    c = build_circle(32)
    traj = run_scheme(cosine(c, 0.1), named_field("paper"), SplitSchedule(0.25, 4))
    f1, f2 = holder_certificate(traj, 30, seed=7), holder_certificate(traj, 30, seed=7)
    assert np.array_equal(f1.pairs, f2.pairs)
    gap = np.abs(f1.pairs[:, 1] - f1.pairs[:, 0])
    fitted = f1.model(gap)
    assert np.max((f1.pairs[:, 2] - fitted) / fitted) == pytest.approx(f1.max_violation)
