"""Finsler metrics on open subsets of R^n.

A metric is a function ``F(p, v)`` of a base point ``p`` and a tangent vector
``v``.  All built-in metrics evaluate on stacked arrays: ``p`` and ``v`` may
carry any number of leading batch axes as long as they broadcast, and the last
axis is the coordinate axis.  The scalar entry point for users is
:func:`evaluate`, which also checks the domain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from .errors import DimensionMismatch, DomainError

ALL_OF_RN = "all_of_Rn"
POSITIVE_ORTHANT = "strictly_positive_orthant"

FORWARD = "forward"
BACKWARD = "backward"

HOMOGENEITY_FACTORS = (0.5, 2.0, 10.0)


def _check_orientation(orientation: str) -> int:
    if orientation == FORWARD:
        return 1
    if orientation == BACKWARD:
        return -1
    raise ValueError(f"orientation must be 'forward' or 'backward', got {orientation!r}")


@dataclass(frozen=True)
class OneFormSpec:
    """Coefficients ``b(p)`` of the linear drift term of a Randers-type metric.

    ``kind`` is ``"figure4"`` for ``b_i(p) = scale * p_i / (1 + ||p||_beta)``
    or ``"constant"`` for a fixed vector ``params["b"]`` (times ``scale``).
    """

    kind: str
    beta: float
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("figure4", "constant"):
            raise ValueError(f"unknown one-form kind {self.kind!r}")
        if not self.beta > 1.0:
            raise ValueError("conjugate exponent beta must exceed 1")

    @property
    def scale(self) -> float:
        return float(self.params.get("scale", 1.0))

    def coefficients(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.kind == "constant":
            b = np.asarray(self.params["b"], dtype=float)
            return self.scale * np.broadcast_to(b, p.shape)
        pnorm = np.sum(np.abs(p) ** self.beta, axis=-1, keepdims=True) ** (1.0 / self.beta)
        return self.scale * p / (1.0 + pnorm)

    def norm(self, p) -> np.ndarray:
        """``||b(p)||_beta``; must stay below 1 for a valid metric."""
        b = self.coefficients(p)
        return np.sum(np.abs(b) ** self.beta, axis=-1) ** (1.0 / self.beta)

    def scaled(self, factor: float) -> "OneFormSpec":
        params = dict(self.params)
        params["scale"] = self.scale * factor
        return OneFormSpec(self.kind, self.beta, params)

    def to_config(self) -> dict:
        params = {k: (list(map(float, v)) if isinstance(v, (list, tuple, np.ndarray)) else v)
                  for k, v in self.params.items()}
        return {"kind": self.kind, "params": params}


@dataclass(frozen=True, eq=False)
class MetricSpec:
    """A named Finsler metric with batched evaluation.

    ``func(p, v)`` must accept broadcastable arrays of shape ``(..., n)`` and
    return shape ``(...)``.  ``grad`` and ``hess`` are derivatives with respect
    to ``v``; when absent, solvers fall back to central differences.
    """

    name: str
    dimension: int
    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    params: Mapping = field(default_factory=dict)
    is_symmetric: bool = False
    is_position_independent: bool = False
    domain: str = ALL_OF_RN
    grad: Optional[Callable] = None
    hess: Optional[Callable] = None
    one_form: Optional[OneFormSpec] = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if self.domain not in (ALL_OF_RN, POSITIVE_ORTHANT):
            raise ValueError(f"unknown domain constraint {self.domain!r}")

    def __call__(self, p, v):
        return evaluate(self, p, v)

    def __repr__(self):
        return f"MetricSpec({self.name!r}, dimension={self.dimension}, params={dict(self.params)!r})"

    def check_points(self, p) -> np.ndarray:
        """Return ``p`` as a float array after checking dimension and domain."""
        p = np.asarray(p, dtype=float)
        if p.shape[-1:] != (self.dimension,):
            raise DimensionMismatch(
                f"{self.name} metric has dimension {self.dimension}, got shape {p.shape}")
        if not np.all(np.isfinite(p)):
            raise DomainError("non-finite coordinates")
        if self.domain == POSITIVE_ORTHANT and not np.all(p > 0):
            raise DomainError(f"{self.name} metric requires strictly positive coordinates")
        return p

    def in_domain(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(np.isfinite(p)) and (self.domain == ALL_OF_RN or np.all(p > 0)))

    def gradient(self, p, v) -> np.ndarray:
        """Gradient of ``F(p, .)`` at ``v``; zero at ``v = 0`` by convention."""
        if self.grad is not None:
            return self.grad(p, v)
        return _fd_gradient(self.func, p, v)

    def hessian(self, p, v) -> np.ndarray:
        if self.hess is not None:
            return self.hess(p, v)
        return _fd_hessian(self.func, p, v)

    def to_config(self) -> dict:
        cfg = {"name": self.name, "dimension": self.dimension, "params": dict(self.params)}
        if self.one_form is not None:
            cfg["one_form"] = self.one_form.to_config()
        return cfg


# ---------------------------------------------------------------------------
# built-in metrics

def _weighted_euclidean(weight: Callable[[np.ndarray], np.ndarray]):
    """F(p, v) = sqrt(sum_i w_i(p) v_i^2) together with its v-derivatives."""

    def norm(p, v):
        # scaled by max|v| so that squaring neither underflows nor overflows
        m = np.max(np.abs(v), axis=-1)
        u = np.divide(v, m[..., None], out=np.zeros_like(v), where=m[..., None] > 0)
        return m * np.sqrt(np.sum(weight(p) * u * u, axis=-1))

    def func(p, v):
        p, v = np.broadcast_arrays(np.asarray(p, float), np.asarray(v, float))
        return norm(p, v)

    def grad(p, v):
        p, v = np.broadcast_arrays(np.asarray(p, float), np.asarray(v, float))
        wv = weight(p) * v
        f = norm(p, v)[..., None]
        return np.divide(wv, f, out=np.zeros_like(wv), where=f > 0)

    def hess(p, v):
        p, v = np.broadcast_arrays(np.asarray(p, float), np.asarray(v, float))
        w = weight(p)
        wv = w * v
        f = norm(p, v)[..., None, None]
        f = np.where(f > 0, f, np.finfo(float).tiny)
        g = (wv / f[..., 0])[..., :, None] * (wv / f[..., 0])[..., None, :]
        diag = w[..., :, None] * np.eye(w.shape[-1])
        return (diag - g) / f

    return func, grad, hess


def euclidean(dimension: int) -> MetricSpec:
    func, grad, hess = _weighted_euclidean(lambda p: np.ones_like(p))
    return MetricSpec("euclidean", dimension, func, {}, True, True, ALL_OF_RN, grad, hess)


def burg(dimension: int) -> MetricSpec:
    """F(p, v) = ||v / p||_2 on the positive orthant (log-isometric to E)."""
    func, grad, hess = _weighted_euclidean(lambda p: 1.0 / (p * p))
    return MetricSpec("burg", dimension, func, {}, True, False, POSITIVE_ORTHANT, grad, hess)


def fisher(dimension: int) -> MetricSpec:
    """F(p, v) = ||v / (2 sqrt(p))||_2 on the positive orthant (sqrt-isometric to E)."""
    func, grad, hess = _weighted_euclidean(lambda p: 0.25 / p)
    return MetricSpec("fisher", dimension, func, {}, True, False, POSITIVE_ORTHANT, grad, hess)


_WEIGHTS = {
    "square": lambda p: p * p,
    "unit": lambda p: np.ones_like(p),
}


def figure4_one_form(alpha: float = 3.0, scale: float = 1.0) -> OneFormSpec:
    beta = alpha / (alpha - 1.0)
    return OneFormSpec("figure4", beta, {"scale": scale})


def constant_one_form(b, alpha: float = 3.0) -> OneFormSpec:
    beta = alpha / (alpha - 1.0)
    return OneFormSpec("constant", beta, {"b": [float(x) for x in b]})


def alpha_randers(dimension: int, alpha: float = 3.0, weight: str = "square",
                  one_form: Optional[OneFormSpec] = None) -> MetricSpec:
    """Weighted alpha-norm plus a linear one-form term.

    F(p, v) = (sum_i f_i(p) |v_i|^alpha)^(1/alpha) + sum_i b_i(p) f_i(p)^(1/alpha) v_i

    The defaults (``f_i = p_i^2``, ``alpha = 3``, ``b_i = p_i / (1 + ||p||_{3/2})``)
    give the asymmetric example used throughout the package.  The metric is
    positive definite when ``||b(p)||_beta < 1`` with ``1/alpha + 1/beta = 1``.
    """
    if not 1.0 < alpha < math.inf:
        raise ValueError("alpha must lie in (1, inf)")
    if weight not in _WEIGHTS:
        raise ValueError(f"unknown weight {weight!r}; choose from {sorted(_WEIGHTS)}")
    if one_form is None:
        one_form = figure4_one_form(alpha)
    elif not math.isclose(1.0 / alpha + 1.0 / one_form.beta, 1.0, rel_tol=1e-12):
        raise ValueError("one-form exponent is not conjugate to alpha")
    fw = _WEIGHTS[weight]
    inv = 1.0 / alpha

    def parts(p, v):
        p, v = np.broadcast_arrays(np.asarray(p, float), np.asarray(v, float))
        f = fw(p)
        drift = one_form.coefficients(p) * f**inv
        # the alpha-norm term is evaluated on u = v / max|v| to avoid under/overflow
        m = np.max(np.abs(v), axis=-1, keepdims=True)
        u = np.divide(v, m, out=np.zeros_like(v), where=m > 0)
        return v, u, m, f, drift

    def func(p, v):
        v, u, m, f, drift = parts(p, v)
        s = np.sum(f * np.abs(u) ** alpha, axis=-1)
        return m[..., 0] * s**inv + np.sum(drift * v, axis=-1)

    def grad(p, v):
        _, u, _, f, drift = parts(p, v)
        su = f * np.abs(u) ** (alpha - 1.0) * np.sign(u)
        s = np.sum(f * np.abs(u) ** alpha, axis=-1)[..., None]
        coef = np.divide(1.0, s, out=np.zeros_like(s), where=s > 0) ** (1.0 - inv)
        return coef * su + drift

    def hess(p, v):
        _, u, m, f, _ = parts(p, v)
        au = np.abs(u)
        su = f * au ** (alpha - 1.0) * np.sign(u)
        s = np.sum(f * au**alpha, axis=-1)[..., None, None]
        s = np.where(s > 0, s, np.finfo(float).tiny)
        outer = su[..., :, None] * su[..., None, :]
        diag = (alpha - 1.0) * f * au ** (alpha - 2.0)
        H = (1.0 - alpha) * s ** (inv - 2.0) * outer + s ** (inv - 1.0) * (diag[..., :, None] * np.eye(u.shape[-1]))
        return H / m[..., None]

    params = {"alpha": float(alpha), "weight": weight}
    return MetricSpec("alpha_randers", dimension, func, params, False, False,
                      POSITIVE_ORTHANT, grad, hess, one_form)


def figure4_randers(dimension: int = 3) -> MetricSpec:
    """f_i(p) = p_i^2, alpha = 3, b_i(p) = p_i / (1 + ||p||_{3/2})."""
    return alpha_randers(dimension, 3.0, "square", figure4_one_form(3.0))


def custom(name: str, dimension: int, func, *, symmetric=False, position_independent=False,
           domain=ALL_OF_RN, grad=None, hess=None, params=None) -> MetricSpec:
    """Wrap a user-supplied batched ``func(p, v)`` as a metric."""
    return MetricSpec(name, dimension, func, dict(params or {}), symmetric,
                      position_independent, domain, grad, hess)


BUILTIN_NAMES = ("euclidean", "burg", "fisher", "alpha_randers")


def metric_from_config(cfg: Mapping) -> MetricSpec:
    """Build a metric from its JSON config object.

    ``{"name": ..., "dimension": n, "params": {...}, "one_form": {"kind": ..., "params": {...}}}``
    """
    try:
        name = cfg["name"]
        n = int(cfg["dimension"])
    except KeyError as exc:
        raise ValueError(f"metric config missing field {exc}") from None
    params = dict(cfg.get("params", {}))
    if name == "euclidean":
        return euclidean(n)
    if name == "burg":
        return burg(n)
    if name == "fisher":
        return fisher(n)
    if name == "alpha_randers":
        alpha = float(params.get("alpha", 3.0))
        weight = params.get("weight", "square")
        of = cfg.get("one_form")
        one_form = None
        if of is not None:
            beta = alpha / (alpha - 1.0)
            one_form = OneFormSpec(of["kind"], beta, dict(of.get("params", {})))
        return alpha_randers(n, alpha, weight, one_form)
    raise ValueError(f"unknown metric {name!r}; built-ins are {', '.join(BUILTIN_NAMES)}")


# ---------------------------------------------------------------------------
# evaluation and closed-form distances

def evaluate(metric: MetricSpec, p, v) -> float:
    """F(p, v) for a single base point and vector; exactly 0 when ``v = 0``."""
    p = metric.check_points(p)
    v = np.asarray(v, dtype=float)
    if v.shape != p.shape:
        raise DimensionMismatch(f"vector shape {v.shape} does not match point shape {p.shape}")
    if p.ndim != 1:
        raise DimensionMismatch("evaluate takes single vectors; use metric.func for batches")
    if not np.any(v):
        return 0.0
    return float(metric.func(p, v))


def pointwise_distance(metric: MetricSpec, base, x, y, orientation: str = FORWARD) -> float:
    """Quasi-distance measured with the norm ``F(base, .)``.

    Forward gives ``F(base, y - x)``, backward ``F(base, x - y)``; the usual
    point-to-point distance ``d_p(p, q)`` is ``base = x = p, y = q``.
    """
    sign = _check_orientation(orientation)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionMismatch("x and y must have the same shape")
    return evaluate(metric, base, sign * (y - x))


def distance_matrix(metric: MetricSpec, points, orientation: str = FORWARD) -> np.ndarray:
    """``D[i, j] = d_{p_i}(p_i, p_j)``, the quasi-distance from point i to point j."""
    sign = _check_orientation(orientation)
    pts = metric.check_points(np.atleast_2d(points))
    diff = sign * (pts[None, :, :] - pts[:, None, :])
    base = np.broadcast_to(pts[:, None, :], diff.shape)
    D = np.asarray(metric.func(base, diff), dtype=float)
    np.fill_diagonal(D, 0.0)
    return D


def _positive(*arrays):
    out = []
    for a in arrays:
        a = np.asarray(a, dtype=float)
        if not np.all(a > 0):
            raise DomainError("coordinates must be strictly positive")
        out.append(a)
    if len({a.shape for a in out}) > 1:
        raise DimensionMismatch("points must have the same shape")
    return out


def burg_distance(x, y) -> float:
    """Closed-form distance induced by the Burg metric: ||ln y - ln x||_2."""
    x, y = _positive(x, y)
    return float(np.sqrt(np.sum((np.log(y) - np.log(x)) ** 2)))


def fisher_distance(x, y) -> float:
    """Closed-form distance induced by the Fisher metric: ||sqrt y - sqrt x||_2."""
    x, y = _positive(x, y)
    return float(np.sqrt(np.sum((np.sqrt(y) - np.sqrt(x)) ** 2)))


def itakura_saito_divergence(x, y) -> float:
    """D(x || y) = sum_i ln(y_i / x_i) + x_i / y_i - 1.  Asymmetric, not a metric."""
    x, y = _positive(x, y)
    return float(np.sum(np.log(y / x) + x / y - 1.0))


# ---------------------------------------------------------------------------
# finite differences

def _fd_gradient(func, p, v, rel_step: float = 1e-6) -> np.ndarray:
    p, v = np.broadcast_arrays(np.asarray(p, float), np.asarray(v, float))
    n = v.shape[-1]
    h = rel_step * (1.0 + np.linalg.norm(v, axis=-1, keepdims=True))
    out = np.empty(v.shape)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        out[..., i] = (func(p, v + h * e) - func(p, v - h * e)) / (2.0 * h[..., 0])
    return out


def _fd_hessian(func, p, v, rel_step: float = 1e-4) -> np.ndarray:
    p, v = np.broadcast_arrays(np.asarray(p, float), np.asarray(v, float))
    n = v.shape[-1]
    h = rel_step * (1.0 + np.linalg.norm(v, axis=-1))
    hh = h[..., None]
    eye = np.eye(n)
    out = np.empty(v.shape + (n,))
    for i in range(n):
        for j in range(i, n):
            ei, ej = eye[i], eye[j]
            val = (func(p, v + hh * (ei + ej)) - func(p, v + hh * (ei - ej))
                   - func(p, v - hh * (ei - ej)) + func(p, v - hh * (ei + ej))) / (4.0 * h * h)
            out[..., i, j] = val
            out[..., j, i] = val
    return out


def fundamental_tensor(metric: MetricSpec, p, v, rel_step: float = 1e-4) -> np.ndarray:
    """Central-difference estimate of g_ij = 1/2 d^2 F^2 / dv_i dv_j.

    The step is ``rel_step * (1 + ||v||)``; each entry is the four-point
    mixed difference, so the estimate is symmetric up to rounding.
    """
    p = np.asarray(p, float)
    v = np.asarray(v, float)
    n = v.shape[-1]
    h = rel_step * (1.0 + np.linalg.norm(v))
    half_sq = lambda w: 0.5 * float(metric.func(p, w)) ** 2  # noqa: E731
    g = np.empty((n, n))
    eye = np.eye(n)
    for i in range(n):
        for j in range(n):
            ei, ej = h * eye[i], h * eye[j]
            g[i, j] = (half_sq(v + ei + ej) - half_sq(v + ei - ej)
                       - half_sq(v - ei + ej) + half_sq(v - ei - ej)) / (4.0 * h * h)
    return g


# ---------------------------------------------------------------------------
# validation

@dataclass
class FundamentalTensorProbe:
    point: np.ndarray
    direction: np.ndarray
    hessian: np.ndarray
    min_eigenvalue: float

    @property
    def asymmetry(self) -> float:
        scale = max(float(np.max(np.abs(self.hessian))), np.finfo(float).tiny)
        return float(np.max(np.abs(self.hessian - self.hessian.T))) / scale


@dataclass
class AxiomCheck:
    passed: bool
    worst: float
    point: Optional[np.ndarray] = None
    detail: str = ""


@dataclass
class ValidationReport:
    metric: str
    samples: int
    checks: dict = field(default_factory=dict)
    probes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failures(self) -> list:
        return [name for name, c in self.checks.items() if not c.passed]

    def merge(self, other: "ValidationReport") -> "ValidationReport":
        """Combine two shards; per-check worst values merge by maximum."""
        out = ValidationReport(self.metric, self.samples + other.samples, dict(self.checks),
                               self.probes + other.probes)
        for name, c in other.checks.items():
            mine = out.checks.get(name)
            if mine is None:
                out.checks[name] = c
                continue
            top = c if c.worst > mine.worst else mine
            out.checks[name] = AxiomCheck(mine.passed and c.passed, top.worst, top.point, top.detail)
        return out

    def summary(self) -> str:
        lines = [f"metric {self.metric}: {self.samples} samples"]
        for name, c in self.checks.items():
            status = "pass" if c.passed else "FAIL"
            lines.append(f"  {name:<20s} {status}  worst={c.worst:.3e} {c.detail}".rstrip())
        return "\n".join(lines)


def sample_domain(metric: MetricSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    """Random base points: log-uniform on [0.2, 20] per axis for the positive
    orthant, standard normal scaled by 3 otherwise."""
    n = metric.dimension
    if metric.domain == POSITIVE_ORTHANT:
        return np.exp(rng.uniform(np.log(0.2), np.log(20.0), size=(size, n)))
    return 3.0 * rng.standard_normal((size, n))


def _unit_rows(rng, size, n):
    v = rng.standard_normal((size, n))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    return v / np.where(norms > 0, norms, 1.0)


def _worst_direction(metric: MetricSpec, p: np.ndarray) -> np.ndarray:
    """Direction minimising F(p, .) on the weighted unit sphere for Randers-type
    metrics: the Hölder-extremal vector for the drift term."""
    of = metric.one_form
    alpha = float(metric.params.get("alpha", 3.0))
    f = _WEIGHTS[metric.params.get("weight", "square")](p)
    b = of.coefficients(p)
    u = -np.sign(b) * np.abs(b) ** (of.beta - 1.0)
    if not np.any(u):
        u = np.eye(len(p))[0]
    return u / f ** (1.0 / alpha)


def validate_metric(metric: MetricSpec, samples: int = 100, seed: int = 0,
                    points: Optional[np.ndarray] = None,
                    homogeneity_tol: float = 1e-9, psd_tol: float = -1e-7,
                    triangle_tol: float = 1e-9) -> ValidationReport:
    """Statistically check the Finsler axioms on seeded random samples.

    Checks positivity, positive 1-homogeneity at r in {0.5, 2, 10}, the
    triangle inequality of each F_p, symmetry when the metric claims it, the
    fundamental tensor (finite differences on F^2/2) and, for Randers-type
    metrics, the one-form norm condition.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    n = metric.dimension
    if points is None:
        P = sample_domain(metric, rng, samples)
    else:
        P = np.atleast_2d(np.asarray(points, float))
        samples = len(P)
    keep = np.array([metric.in_domain(p) for p in P])
    if not keep.any():
        raise DomainError("no sample point satisfies the domain constraint")
    P = P[keep]
    V = _unit_rows(rng, len(P), n) * np.exp(rng.uniform(-2.0, 2.0, size=(len(P), 1)))
    U = _unit_rows(rng, len(P), n) * np.exp(rng.uniform(-2.0, 2.0, size=(len(P), 1)))
    report = ValidationReport(metric.name, len(P))

    Fv = np.asarray(metric.func(P, V), float)
    fvals = [Fv]
    extra_points = [P]
    if metric.one_form is not None:
        W = np.array([_worst_direction(metric, p) for p in P])
        fvals.append(np.asarray(metric.func(P, W), float))
        extra_points.append(P)
    allF = np.concatenate(fvals)
    allP = np.concatenate(extra_points)
    i = int(np.argmin(allF))
    report.checks["positivity"] = AxiomCheck(bool(np.all(allF > 0)), max(0.0, -float(allF[i])),
                                             allP[i], f"min F={allF[i]:.3e}")

    worst, where = 0.0, None
    for r in HOMOGENEITY_FACTORS:
        lhs = np.asarray(metric.func(P, r * V), float)
        rel = np.abs(lhs - r * Fv) / np.maximum(r * np.abs(Fv), np.finfo(float).tiny)
        j = int(np.argmax(rel))
        if rel[j] > worst:
            worst, where = float(rel[j]), P[j]
    report.checks["homogeneity"] = AxiomCheck(worst <= homogeneity_tol, worst, where)

    Fu = np.asarray(metric.func(P, U), float)
    Fuv = np.asarray(metric.func(P, U + V), float)
    scale = np.abs(Fu) + np.abs(Fv)
    excess = (Fuv - Fu - Fv) / np.maximum(scale, np.finfo(float).tiny)
    j = int(np.argmax(excess))
    report.checks["triangle"] = AxiomCheck(bool(excess[j] <= triangle_tol), max(0.0, float(excess[j])), P[j])

    if metric.is_symmetric:
        Fm = np.asarray(metric.func(P, -V), float)
        rel = np.abs(Fm - Fv) / np.maximum(np.abs(Fv), np.finfo(float).tiny)
        j = int(np.argmax(rel))
        report.checks["symmetry"] = AxiomCheck(bool(rel[j] <= homogeneity_tol), float(rel[j]), P[j])

    min_eig, asym, where = math.inf, 0.0, None
    for p, v in zip(P, V):
        g = fundamental_tensor(metric, p, v)
        eig = float(np.linalg.eigvalsh(0.5 * (g + g.T))[0])
        probe = FundamentalTensorProbe(p, v, g, eig)
        report.probes.append(probe)
        asym = max(asym, probe.asymmetry)
        if eig < min_eig:
            min_eig, where = eig, p
    report.checks["fundamental_tensor"] = AxiomCheck(
        min_eig > psd_tol and asym <= 1e-6, max(0.0, -min_eig), where,
        f"min eig={min_eig:.3e} asym={asym:.1e}")

    if metric.one_form is not None:
        bn = metric.one_form.norm(P)
        j = int(np.argmax(bn))
        report.checks["one_form_norm"] = AxiomCheck(bool(np.all(bn < 1.0)), float(bn[j]), P[j],
                                                    f"max ||b||_beta={bn[j]:.4f}")
    return report


# ---------------------------------------------------------------------------
# isometries

@dataclass
class IsometryReport:
    max_residual: float
    passed: bool
    samples: int
    worst_point: np.ndarray
    worst_vector: np.ndarray


def check_isometry(metric: MetricSpec, phi: Callable, dphi: Optional[Callable] = None,
                   samples: int = 1000, seed: int = 0, tol: float = 1e-8,
                   points: Optional[np.ndarray] = None) -> IsometryReport:
    """Test ``F(p, v) = E(phi(p), dphi_p v)`` for a coordinatewise map ``phi``.

    ``dphi`` is the coordinatewise derivative; if omitted it is estimated by
    central differences with step ``1e-6 * (1 + |p_i|)``.  The report holds the
    largest relative residual over the samples.
    """
    rng = np.random.default_rng(seed)
    P = sample_domain(metric, rng, samples) if points is None else np.atleast_2d(points)
    if not all(metric.in_domain(p) for p in P):
        raise DomainError("isometry samples must lie in the metric domain")
    V = _unit_rows(rng, len(P), metric.dimension) * np.exp(rng.uniform(-2, 2, (len(P), 1)))
    if dphi is None:
        h = 1e-6 * (1.0 + np.abs(P))
        deriv = (phi(P + h) - phi(P - h)) / (2.0 * h)
    else:
        deriv = dphi(P)
    lhs = np.asarray(metric.func(P, V), float)
    rhs = np.linalg.norm(deriv * V, axis=1)
    res = np.abs(lhs - rhs) / np.maximum(np.abs(lhs), np.finfo(float).tiny)
    j = int(np.argmax(res))
    return IsometryReport(float(res[j]), bool(res[j] <= tol), len(P), P[j], V[j])
