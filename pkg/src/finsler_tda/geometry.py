"""Finsler balls, convexity probes and the minimax enclosing-radius solver.

The enclosing radius of a vertex set is ``min_w max_i F(p_i, w - p_i)`` (forward)
or ``min_w max_i F(p_i, p_i - w)`` (backward).  Each term is convex in ``w``,
so the problem is a small convex minimax.  It is solved on the log-sum-exp
smoothing ``(1/t) log sum_i exp(t phi_i(w))`` with ``t`` escalating by factors
of ten; each stage runs damped Newton with Armijo backtracking, warm-started
from the previous stage.  Many problems of equal size are solved together as
one batch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import logsumexp, softmax

from .errors import ConvergenceError, DegenerateGradient, DimensionMismatch, SamplingError
from .metrics import (FORWARD, POSITIVE_ORTHANT, MetricSpec, _check_orientation,
                      evaluate)

ORIENTATIONS = ("forward", "backward")

_STEPS = 0.5 ** np.arange(40)


@dataclass
class FinslerBall:
    center: np.ndarray
    radius: float
    metric: MetricSpec
    orientation: str = FORWARD

    def __post_init__(self):
        self.center = self.metric.check_points(self.center)
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        _check_orientation(self.orientation)

    def __contains__(self, w) -> bool:
        return ball_membership(self, w)

    def boundary(self, u) -> np.ndarray:
        """Boundary points along the unit directions ``u`` (shape (m, n)).

        By positive homogeneity the forward boundary along ``u`` sits at
        ``center + radius / F(center, u) * u``.
        """
        u = np.atleast_2d(np.asarray(u, float))
        sign = _check_orientation(self.orientation)
        Fu = self.metric.func(np.broadcast_to(self.center, u.shape), sign * u)
        return self.center + (self.radius / Fu)[:, None] * u


def ball_membership(ball: FinslerBall, w) -> bool:
    """Exact test ``F(c, w - c) <= r`` (forward) or ``F(c, c - w) <= r`` (backward)."""
    w = np.asarray(w, float)
    if w.shape != ball.center.shape:
        raise DimensionMismatch("point dimension does not match the ball")
    sign = _check_orientation(ball.orientation)
    return evaluate(ball.metric, ball.center, sign * (w - ball.center)) <= ball.radius


@dataclass
class MinimaxResult:
    witness: np.ndarray
    radius: float
    iterations: int
    converged: bool
    gap_estimate: float


def _objective_terms(metric, P, sign, offsets, W):
    """phi_i(w) for batch W of shape (B, n); P is (B, k, n), returns (B, k)."""
    V = sign * (W[:, None, :] - P)
    return metric.func(P, V) - offsets


def solve_minimax(metric: MetricSpec, centers, offsets=None, orientation: str = FORWARD,
                  tol: float = 1e-9, max_iter: int = 400, raise_on_failure: bool = True,
                  candidates=None):
    """Batched minimiser of ``max_i F(c_i, +-(w - c_i)) - r_i``.

    ``centers`` has shape (B, k, n) (or (k, n) for one problem); ``offsets``
    (B, k) defaults to zero.  ``candidates`` (B, m, n) are extra feasible
    witnesses to compare against.  Returns a list of :class:`MinimaxResult`;
    the reported radius is the exact objective at the returned witness, the
    best of the solver's iterates, the barycentre, the centres and the
    candidates.
    """
    sign = _check_orientation(orientation)
    P = np.asarray(centers, float)
    single = P.ndim == 2
    if single:
        P = P[None]
    B, k, n = P.shape
    if n != metric.dimension:
        raise DimensionMismatch(f"points have dimension {n}, metric {metric.dimension}")
    metric.check_points(P)
    R = np.zeros((B, k)) if offsets is None else np.broadcast_to(np.asarray(offsets, float), (B, k))

    # candidate witnesses that cost nothing: barycentre and the centres themselves
    W = P.mean(axis=1)
    if metric.domain == POSITIVE_ORTHANT:
        W = np.maximum(W, 1e-9)
    parts = [W[:, None, :], P]
    if candidates is not None:
        parts.append(np.asarray(candidates, float).reshape(B, -1, n))
    cand = np.concatenate(parts, axis=1)  # (B, m, n)
    m = cand.shape[1]
    cand_val = np.max(
        metric.func(np.broadcast_to(P[:, None], (B, m, k, n)),
                    sign * (cand[:, :, None, :] - P[:, None])) - R[:, None, :], axis=-1)
    best = np.argmin(cand_val, axis=1)
    best_W = cand[np.arange(B), best].copy()
    best_val = cand_val[np.arange(B), best]

    if k == 1:
        results = [MinimaxResult(P[b, 0].copy(), float(-R[b, 0]), 0, True, 0.0) for b in range(B)]
        return results[0] if single else results

    # scale for the smoothing parameter: spread of objective at the barycentre
    phi0 = _objective_terms(metric, P, sign, R, W)
    scale = np.maximum(np.max(phi0 + R, axis=1), 1e-300)
    logk = math.log(k)

    T = 10.0
    total_iter = np.zeros(B, dtype=int)
    gap = np.full(B, np.inf)
    done = np.zeros(B, dtype=bool)
    it_budget = max_iter
    while True:
        t = T / scale
        decrement = np.full(B, np.inf)
        active = ~done
        for _ in range(60):
            idx = np.nonzero(active)[0]
            if idx.size == 0 or it_budget <= 0:
                break
            it_budget -= 1
            total_iter[idx] += 1
            Pb, Rb, Wb, tb = P[idx], R[idx], W[idx], t[idx]
            V = sign * (Wb[:, None, :] - Pb)
            phi = metric.func(Pb, V) - Rb
            pi = softmax(tb[:, None] * phi, axis=1)
            G = sign * metric.gradient(Pb, V)                    # (b, k, n)
            with np.errstate(over="ignore", invalid="ignore"):
                H = metric.hessian(Pb, V)                        # (b, k, n, n); inf at v = 0
            g = np.einsum("bk,bkn->bn", pi, G)
            with np.errstate(invalid="ignore"):
                Hs = np.einsum("bk,bkij->bij", pi, H)
            cov = np.einsum("bk,bki,bkj->bij", pi, G, G) - g[:, :, None] * g[:, None, :]
            Hs = Hs + tb[:, None, None] * cov
            reg = 1e-12 * (np.trace(Hs, axis1=1, axis2=2) / n + 1e-300)
            Hs = Hs + np.where(np.isfinite(reg), reg, 0.0)[:, None, None] * np.eye(n)
            Hs[~np.all(np.isfinite(Hs), axis=(1, 2))] = np.eye(n)
            try:
                d = -np.linalg.solve(Hs, g[..., None])[..., 0]
            except np.linalg.LinAlgError:
                d = -g
            slope = np.einsum("bn,bn->b", g, d)
            bad = ~(slope < 0) | ~np.all(np.isfinite(d), axis=1)
            d[bad] = -g[bad]
            slope[bad] = -np.einsum("bn,bn->b", g[bad], g[bad])
            lam2 = -slope
            decrement[idx] = lam2 / 2.0
            f0 = logsumexp(tb[:, None] * phi, axis=1) / tb
            # Armijo: try the full step, then a vectorised ladder for the rest
            step, true_val = _line_search(metric, Pb, Rb, sign, Wb, d, tb, f0, slope)
            # near a cone tip the Newton model can be useless: fall back to steepest descent
            retry = np.nonzero((step == 0) & ~bad)[0]
            if retry.size:
                gr = g[retry]
                s2, v2 = _line_search(metric, Pb[retry], Rb[retry], sign, Wb[retry], -gr, tb[retry],
                                      f0[retry], -np.einsum("bn,bn->b", gr, gr))
                step[retry], true_val[retry], d[retry] = s2, v2, -gr
            moved = step > 0
            W[idx] = Wb + step[:, None] * d
            # track the best exact objective seen
            better = moved & (true_val < best_val[idx])
            best_val[idx[better]] = true_val[better]
            best_W[idx[better]] = W[idx[better]]
            stalled = ~moved | (lam2 / 2.0 <= 1e-3 * np.minimum(tol, logk / t[idx]))
            active[idx[stalled]] = False
        gap_stage = logk / t + np.where(np.isfinite(decrement), decrement, 0.0)
        gap = np.where(done, gap, gap_stage)
        done |= gap <= tol
        if done.all() or it_budget <= 0 or T > 1e15:
            break
        T *= 10.0

    # recompute at the returned witness
    final = np.max(_objective_terms(metric, P, sign, R, best_W), axis=1)
    results = [MinimaxResult(best_W[b], float(final[b]), int(total_iter[b]), bool(done[b]),
                             float(gap[b])) for b in range(B)]
    failed = [b for b in range(B) if not done[b]]
    if failed and raise_on_failure:
        b = failed[0]
        raise ConvergenceError(f"minimax solver stopped with gap {gap[b]:.3e} > tol {tol:.3e}",
                               result=results[b] if single else results)
    return results[0] if single else results


def _line_search(metric, P, R, sign, W, d, t, f0, slope):
    """Largest step in {1, 1/2, 1/4, ...} meeting the Armijo condition (0 if none)."""
    b = len(W)
    step = np.zeros(b)
    true_val = np.full(b, np.inf)
    todo = np.arange(b)
    for ladder in (_STEPS[:1], _STEPS[1:]):
        if todo.size == 0:
            break
        Pb, Rb = P[todo], R[todo]
        trial = W[todo, None, :] + ladder[None, :, None] * d[todo, None, :]
        Vt = sign * (trial[:, :, None, :] - Pb[:, None])
        phit = metric.func(np.broadcast_to(Pb[:, None], Vt.shape), Vt) - Rb[:, None, :]
        ft = logsumexp(t[todo, None, None] * phit, axis=2) / t[todo, None]
        ok = ft <= f0[todo, None] + 1e-4 * ladder[None, :] * slope[todo, None]
        hit = ok.any(axis=1)
        first = ok.argmax(axis=1)
        rows = todo[hit]
        step[rows] = ladder[first[hit]]
        true_val[rows] = np.max(phit[np.nonzero(hit)[0], first[hit]], axis=1)
        todo = todo[~hit]
    return step, true_val


def enclosing_radius(metric: MetricSpec, points, orientation: str = FORWARD,
                     tol: float = 1e-9, max_iter: int = 400) -> MinimaxResult:
    """Smallest radius ``eps`` for which the balls of radius eps about ``points`` meet.

    This is the entry value of the simplex on ``points`` in the Čech filtration.
    """
    P = np.atleast_2d(np.asarray(points, float))
    if tol <= 0:
        raise ValueError("tol must be positive")
    return solve_minimax(metric, P, orientation=orientation, tol=tol, max_iter=max_iter)


def intersection_nonempty(balls: Sequence[FinslerBall], tol: float = 1e-9):
    """Decide whether the balls share a point; returns ``(flag, witness or None)``."""
    if not balls:
        raise ValueError("need at least one ball")
    metric, orientation = balls[0].metric, balls[0].orientation
    if any(b.metric is not metric or b.orientation != orientation for b in balls):
        raise ValueError("balls must share metric and orientation")
    C = np.array([b.center for b in balls])
    r = np.array([b.radius for b in balls])
    res = solve_minimax(metric, C, r[None], orientation, tol=tol)
    if res.radius <= tol:
        return True, res.witness
    return False, None


# ---------------------------------------------------------------------------
# convexity


@dataclass
class ConvexityReport:
    pairs: int
    violations: int
    witness: Optional[tuple] = None
    acceptance_rate: float = 1.0

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _batched(member: Callable, vectorized: bool) -> Callable:
    if vectorized:
        return lambda X: np.asarray(member(X), dtype=bool)
    return lambda X: np.fromiter((bool(member(x)) for x in X), dtype=bool, count=len(X))


def _ray_extents(test: Callable, center, directions, iters: int = 60, max_extent: float = 1e6):
    """Largest ``t`` with ``center + t u`` inside, per row ``u``, by doubling then bisection.

    Returns ``(inside, outside)`` brackets.
    """
    m = len(directions)
    step = np.ones(m)
    grow = np.ones(m, dtype=bool)
    while grow.any():
        idx = np.nonzero(grow)[0]
        inside = test(center + step[idx, None] * directions[idx])
        step[idx[inside]] *= 2.0
        grow[idx[~inside]] = False
        grow &= step < max_extent
    a, b = np.zeros(m), step
    for _ in range(iters):
        mid = 0.5 * (a + b)
        inside = test(center + mid[:, None] * directions)
        a = np.where(inside, mid, a)
        b = np.where(inside, b, mid)
    return a, b


def bounding_box(member: Callable, center, pad: float = 0.25, vectorized: bool = False):
    """Axis-aligned box around ``center`` from bisection on ``member``.

    Extents are found along the coordinate axes and 4n random directions
    through ``center``, then padded by ``pad`` times the box width.
    """
    c = np.asarray(center, float)
    n = len(c)
    rng = np.random.default_rng(12345)
    U = rng.standard_normal((4 * n, n))
    dirs = np.vstack([np.eye(n), -np.eye(n), U / np.linalg.norm(U, axis=1, keepdims=True)])
    _, b = _ray_extents(_batched(member, vectorized), c, dirs)
    X = c + b[:, None] * dirs
    lo, hi = np.minimum(c, X.min(axis=0)), np.maximum(c, X.max(axis=0))
    width = hi - lo
    return lo - pad * width, hi + pad * width


def convexity_probe(member: Callable, center, pairs: int = 10_000, seed: int = 0,
                    box: Optional[tuple] = None, lower_bound=None,
                    max_draws: Optional[int] = None, boundary_fraction: float = 0.5,
                    shrink: float = 1e-7, vectorized: bool = False) -> ConvexityReport:
    """Search for a segment with both ends inside a set and an interior point outside.

    A ``boundary_fraction`` of the pairs join two points just inside the
    boundary, found by bisection along random rays from ``center`` (the set
    must be star-shaped about it) and pulled in by the relative ``shrink``;
    these chords are the most sensitive to small dents.  The other pairs are
    drawn by rejection from an axis-aligned box (found by bisection unless
    given; ``lower_bound`` clips it, e.g. to the positive orthant).  Nine
    interior points of each segment are tested.  With ``vectorized`` the
    membership test takes an (m, n) array and returns m booleans.
    """
    if pairs < 1:
        raise ValueError("pairs must be >= 1")
    if not 0.0 <= boundary_fraction <= 1.0:
        raise ValueError("boundary_fraction must lie in [0, 1]")
    test = _batched(member, vectorized)
    rng = np.random.default_rng(seed)
    c = np.asarray(center, float)
    n_edge = int(round(boundary_fraction * pairs))
    n_box = pairs - n_edge
    ends = []
    if n_edge:
        if not test(c[None])[0]:
            raise ValueError("center must belong to the set")
        U = rng.standard_normal((2 * n_edge, len(c)))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        a, _ = _ray_extents(test, c, U)
        ends.append(c + (a * (1.0 - shrink))[:, None] * U)
    rate = 1.0
    if n_box:
        lo, hi = box if box is not None else bounding_box(member, c, vectorized=vectorized)
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        if lower_bound is not None:
            lo = np.maximum(lo, lower_bound)
        need = 2 * n_box
        max_draws = max_draws or max(100 * need, 10_000)
        members, found, drawn = [], 0, 0
        while found < need and drawn < max_draws:
            batch = rng.uniform(lo, hi, size=(min(4 * need, 200_000), len(lo)))
            drawn += len(batch)
            keep = batch[test(batch)]
            members.append(keep)
            found += len(keep)
        rate = found / max(drawn, 1)
        if found < need and rate < 1e-4:
            raise SamplingError(f"rejection acceptance rate {rate:.2e} below 1e-4")
        pool = np.concatenate(members)[:need]
        ends.append(pool[: len(pool) - len(pool) % 2])
    pts = np.concatenate(ends)
    A, B = pts[0::2], pts[1::2]
    lam = np.arange(1, 10) / 10.0
    X = (1 - lam)[None, :, None] * A[:, None, :] + lam[None, :, None] * B[:, None, :]
    inside = test(X.reshape(-1, len(c))).reshape(len(A), len(lam))
    bad = ~inside.all(axis=1)
    witness = None
    if bad.any():
        i = int(np.argmax(bad))
        witness = (A[i], B[i], float(lam[int(np.argmin(inside[i]))]))
    return ConvexityReport(len(A), int(bad.sum()), witness, rate)


def levelset_curvature_sign(f: Callable, point, h: float = 1e-4, zero_tol: float = 1e-6) -> float:
    """``det(H_f) / ||grad f||^4`` at ``point`` by central differences.

    Hessian entries below ``zero_tol`` times the largest entry are treated as
    finite-difference noise and zeroed before the determinant.
    """
    x = np.asarray(point, float)
    n = len(x)
    eye = np.eye(n)
    step = h * (1.0 + np.abs(x))
    grad = np.array([(f(x + step[i] * eye[i]) - f(x - step[i] * eye[i])) / (2 * step[i])
                     for i in range(n)])
    gnorm = float(np.linalg.norm(grad))
    if gnorm <= 1e-8:
        raise DegenerateGradient(f"gradient norm {gnorm:.2e} too small at {x}")
    H = np.empty((n, n))
    f0 = f(x)
    for i in range(n):
        for j in range(i, n):
            if i == j:
                H[i, i] = (f(x + step[i] * eye[i]) - 2 * f0 + f(x - step[i] * eye[i])) / step[i] ** 2
            else:
                ei, ej = step[i] * eye[i], step[j] * eye[j]
                H[i, j] = H[j, i] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej)
                                     + f(x - ei - ej)) / (4 * step[i] * step[j])
    H[np.abs(H) <= zero_tol * np.max(np.abs(H))] = 0.0
    return float(np.linalg.det(H) / gnorm**4)


def ball_boundary_polyline(ball: FinslerBall, samples: int = 360, plane=None) -> np.ndarray:
    """Boundary of a ball sampled by an angle sweep.

    In 2-D the sweep covers the plane; in higher dimension it covers the slice
    spanned by the orthonormal pair ``plane`` (shape (2, n)).
    """
    theta = 2 * np.pi * np.arange(samples) / samples
    n = ball.center.shape[0]
    if plane is None:
        if n != 2:
            raise ValueError("plane basis required for dimension > 2")
        plane = np.eye(2)
    plane = np.asarray(plane, float)
    u = np.cos(theta)[:, None] * plane[0] + np.sin(theta)[:, None] * plane[1]
    return ball.boundary(u)
