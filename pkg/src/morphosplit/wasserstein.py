"""
Exact Wasserstein distances for small discrete measures.

General supports are solved as a transport linear program (HiGHS through
:func:`scipy.optimize.linprog`), equal-size uniform measures as an assignment
problem. Measures on a closed curve also have a dedicated 1-d solver that
matches cumulative functions up to a level shift.

All distances are between normalised measures: weights are divided by their
common total before solving.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog, nnls
from scipy.sparse import coo_matrix

from .geometry import EmbeddedCurve

MAX_ATOMS = 512
MASS_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Weighted atoms in the plane (``support`` has shape ``(n, 2)``)."""

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.support, dtype=float))
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if s.shape[0] != w.shape[0]:
            raise ValueError("support and weights have different lengths")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        if not w.sum() > 0:
            raise ValueError("total weight must be positive")
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_signal(cls, measure) -> "DiscreteMeasure":
        """Atoms at the curve nodes carrying the node masses."""
        return cls(measure.curve.positions, measure.masses)

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def __len__(self):
        return self.weights.shape[0]


def _check_totals(ta: float, tb: float):
    if abs(ta - tb) > MASS_RTOL * max(abs(ta), abs(tb)):
        raise ValueError(f"total mass mismatch: {ta!r} vs {tb!r}")


def solve_transport(a, b, cost) -> tuple[float, np.ndarray]:
    """Minimal ``sum(P * cost)`` over plans with marginals ``a``, ``b``.

    Returns the optimal value and the plan.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape
    if n == m and np.all(a == a[0]) and np.all(b == b[0]) and a[0] == b[0]:
        rows, cols = linear_sum_assignment(cost)
        plan = np.zeros_like(cost)
        plan[rows, cols] = a[0]
        return float(cost[rows, cols].sum() * a[0]), plan
    # drop empty atoms; they carry no constraint
    ia, ib = np.flatnonzero(a > 0), np.flatnonzero(b > 0)
    sub = cost[np.ix_(ia, ib)]
    p, q = ia.size, ib.size
    r = np.arange(p * q)
    a_eq = coo_matrix(
        (np.ones(2 * p * q), (np.r_[r // q, p + r % q], np.r_[r, r])), shape=(p + q, p * q)
    ).tocsr()
    res = linprog(
        sub.ravel(), A_eq=a_eq, b_eq=np.r_[a[ia], b[ib]], bounds=(0, None), method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise RuntimeError(f"transport LP failed: {res.message}")
    plan = np.zeros_like(cost)
    plan[np.ix_(ia, ib)] = res.x.reshape(p, q)
    return float(res.fun), plan


def wasserstein_exact(mu: DiscreteMeasure, nu: DiscreteMeasure, p: float = 2.0,
                      distance=None) -> float:
    """Exact ``W_p`` between two discrete measures.

    Parameters
    ----------
    distance : ndarray, optional
        Ground distance matrix ``(len(mu), len(nu))``. Defaults to Euclidean
        distances between the supports.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if len(mu) > MAX_ATOMS or len(nu) > MAX_ATOMS:
        raise ValueError(f"at most {MAX_ATOMS} atoms per measure")
    _check_totals(mu.total, nu.total)
    if distance is None:
        distance = np.linalg.norm(mu.support[:, None, :] - nu.support[None, :, :], axis=-1)
    distance = np.asarray(distance, dtype=float)
    if distance.shape != (len(mu), len(nu)):
        raise ValueError("distance matrix has the wrong shape")
    value, _ = solve_transport(mu.weights / mu.total, nu.weights / nu.total, distance**p)
    return max(value, 0.0) ** (1.0 / p)


def curve_arclength(curve: EmbeddedCurve) -> tuple[np.ndarray, float]:
    """Node positions along the closed polygon through the nodes, and its length."""
    chords = np.linalg.norm(np.roll(curve.positions, -1, axis=0) - curve.positions, axis=1)
    s = np.concatenate([[0.0], np.cumsum(chords)[:-1]])
    return s, float(chords.sum())


def geodesic_distance(s, length: float) -> np.ndarray:
    """Pairwise distance along a closed curve of total ``length``."""
    s = np.asarray(s, dtype=float)
    d = np.abs(s[:, None] - s[None, :]) % length
    return np.minimum(d, length - d)


def _shift_cost(xa, cum_a, xb, cum_b, length, alpha, p):
    """Cost of the monotone coupling pairing level ``u`` of a with level ``u + alpha`` of b."""
    brk = np.concatenate([[0.0, 1.0], cum_a[:-1], (np.r_[0.0, cum_b[:-1]] - alpha) % 1.0])
    brk = np.unique(np.clip(brk, 0.0, 1.0))
    mid = 0.5 * (brk[1:] + brk[:-1])
    widths = np.diff(brk)
    qa = xa[np.searchsorted(cum_a, mid, side="right").clip(max=xa.size - 1)]
    ub = mid + alpha
    turns = np.floor(ub)
    qb = xb[np.searchsorted(cum_b, ub - turns, side="right").clip(max=xb.size - 1)] + turns * length
    return float(np.sum(widths * np.abs(qa - qb) ** p))


def circular_wasserstein(xa, wa, xb, wb, length: float, p: float = 2.0) -> float:
    """``W_p`` between weighted atoms on a circle of circumference ``length``.

    Atoms are given by their arclength coordinates in ``[0, length)``. The
    cost of pairing the cumulative functions up to a level shift ``alpha`` is
    convex and piecewise linear in ``alpha``, with kinks where a jump of one
    cumulative meets a jump of the other. Golden-section search on the sorted
    kinks in ``[-1, 1]`` locates the minimum, then neighbouring kinks are
    checked.
    """
    xa, wa, xb, wb = (np.asarray(v, dtype=float) for v in (xa, wa, xb, wb))
    _check_totals(wa.sum(), wb.sum())
    oa, ob = np.argsort(xa % length), np.argsort(xb % length)
    xa, wa = xa[oa] % length, wa[oa] / wa.sum()
    xb, wb = xb[ob] % length, wb[ob] / wb.sum()
    if xa.shape == xb.shape and np.array_equal(xa, xb) and np.array_equal(wa, wb):
        # W ~ sqrt(cost), so a rounding-level shift would show up as ~1e-8
        return 0.0
    cum_a, cum_b = np.cumsum(wa), np.cumsum(wb)
    cum_a[-1] = cum_b[-1] = 1.0

    levels_a = np.concatenate([[0.0], cum_a[:-1]])
    levels_b = np.concatenate([[0.0], cum_b[:-1]])
    base = (levels_b[None, :] - levels_a[:, None]).ravel()
    cand = np.concatenate([base - 1.0, base, base + 1.0])
    cand = np.unique(cand[(cand >= -1.0) & (cand <= 1.0)])

    def cost(k):
        return _shift_cost(xa, cum_a, xb, cum_b, length, cand[k], p)

    lo, hi = 0, cand.size - 1
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    cache = {}

    def c(k):
        if k not in cache:
            cache[k] = cost(k)
        return cache[k]

    while hi - lo > 3:
        m1 = hi - int(round((hi - lo) * invphi))
        m2 = lo + int(round((hi - lo) * invphi))
        if m1 >= m2:
            m1, m2 = (lo + hi) // 2, (lo + hi) // 2 + 1
        if c(m1) <= c(m2):
            hi = m2
        else:
            lo = m1
    best = min(range(max(0, lo - 2), min(cand.size, hi + 3)), key=c)
    return c(best) ** (1.0 / p)


def circular_w2(curve: EmbeddedCurve, density_a, density_b) -> float:
    """``W_2`` along the curve between two node densities on the same curve."""
    s, length = curve_arclength(curve)
    ma = np.asarray(density_a, dtype=float) * curve.weights
    mb = np.asarray(density_b, dtype=float) * curve.weights
    if np.any(ma < 0) or np.any(mb < 0):
        raise ValueError("densities must be nonnegative")
    return circular_wasserstein(s, ma, s, mb, length, p=2.0)


def circular_w2_lp(curve: EmbeddedCurve, density_a, density_b) -> float:
    """Same quantity as :func:`circular_w2`, solved as a transport LP on the node atoms."""
    s, length = curve_arclength(curve)
    mu = DiscreteMeasure(curve.positions, np.asarray(density_a, float) * curve.weights)
    nu = DiscreteMeasure(curve.positions, np.asarray(density_b, float) * curve.weights)
    return wasserstein_exact(mu, nu, 2.0, distance=geodesic_distance(s, length))


@dataclass
class HolderFit:
    """Fit of ``W(t, s) <= L |t - s| + C sqrt|t - s|`` over sampled state pairs."""

    lipschitz: float
    holder: float
    max_violation: float
    pairs: np.ndarray  # columns t, s, W2
    holder_stderr: float

    def model(self, gap) -> np.ndarray:
        gap = np.abs(np.asarray(gap, dtype=float))
        return self.lipschitz * gap + self.holder * np.sqrt(gap)


def holder_certificate(trajectory, pair_sample_count: int = 64, seed: int = 0) -> HolderFit:
    """Empirical Hoelder-1/2 certificate for a split trajectory.

    Distances are exact ``W_2`` between node atoms in the plane. The two
    coefficients are fitted by nonnegative least squares on relative
    residuals, so ``max_violation`` (the largest ``(W - model) / model``) is
    the quantity being controlled. If the trajectory is stationary all
    distances vanish and the fit is ``L = C = 0``.
    """
    states = trajectory.states
    n = len(states)
    if n < 5:
        raise ValueError("need a trajectory with at least 5 states")
    i, j = np.triu_indices(n, k=1)
    if pair_sample_count < i.size:
        rng = np.random.default_rng(seed)
        pick = np.sort(rng.choice(i.size, size=pair_sample_count, replace=False))
        i, j = i[pick], j[pick]
    atoms = [DiscreteMeasure.from_signal(s.measure) for s in states]
    times = np.array([s.time for s in states])
    w2 = np.array([wasserstein_exact(atoms[a], atoms[b], 2.0) for a, b in zip(i, j)])
    gap = np.abs(times[j] - times[i])
    if not np.any(gap > 0):
        raise ValueError("degenerate fit: all sampled pairs have identical times")
    pairs = np.column_stack([times[i], times[j], w2])

    use = (w2 > 0) & (gap > 0)
    if not use.any():
        return HolderFit(0.0, 0.0, 0.0, pairs, 0.0)
    design = np.column_stack([gap, np.sqrt(gap)])[use] / w2[use, None]
    target = np.ones(use.sum())
    coef, _ = nnls(design, target)
    # unconstrained fit for the spread of the Hoelder coefficient
    ols = np.linalg.lstsq(design, target, rcond=None)[0]
    dof = max(use.sum() - 2, 1)
    resid = target - design @ ols
    cov = np.linalg.pinv(design.T @ design) * (resid @ resid) / dof
    fit_all = coef[0] * gap + coef[1] * np.sqrt(gap)
    with np.errstate(divide="ignore", invalid="ignore"):
        viol = np.where(fit_all > 0, (w2 - fit_all) / fit_all, np.where(w2 > 0, np.inf, 0.0))
    return HolderFit(float(coef[0]), float(coef[1]), float(max(viol.max(), 0.0)), pairs,
                     float(np.sqrt(max(cov[1, 1], 0.0))))
