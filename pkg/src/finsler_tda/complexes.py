"""Filtered Rips, Delta and Čech complexes over Finsler quasi-distances.

All builders store a function-style filtration: each simplex carries the
smallest scale at which it enters.  The Rips value of an edge is the larger
of its two oriented pointwise distances, the Delta value is their mean, and
the Čech value of any simplex is its minimax enclosing radius.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError, VertexSetMismatch
from .geometry import solve_minimax
from .metrics import FORWARD, MetricSpec, distance_matrix

SLACK = 1e-9

KINDS = ("rips", "delta", "cech_forward", "cech_backward")


@dataclass
class PointCloud:
    points: np.ndarray
    labels: Optional[list] = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or len(pts) == 0:
            raise ValueError("a point cloud is a nonempty (k, n) array")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise ValueError("point cloud contains duplicate points")
        if self.labels is not None and len(self.labels) != len(pts):
            raise ValueError("labels must match the number of points")
        self.points = pts

    def __len__(self):
        return len(self.points)

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def check(self, metric: MetricSpec) -> "PointCloud":
        if metric.dimension != self.dimension:
            raise DomainError(f"cloud has dimension {self.dimension}, metric {metric.dimension}")
        metric.check_points(self.points)
        return self


@dataclass
class FilteredComplex:
    """Simplices (sorted vertex tuples) with entry values.

    After :meth:`sort` the order is by (value, dimension, vertices), so every
    face precedes its cofaces.
    """

    simplices: list
    values: np.ndarray
    max_dim: int
    kind: str
    n_vertices: int
    witnesses: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self._index = None

    def __len__(self):
        return len(self.simplices)

    def sort(self) -> "FilteredComplex":
        order = sorted(range(len(self.simplices)),
                       key=lambda i: (self.values[i], len(self.simplices[i]), self.simplices[i]))
        self.simplices = [self.simplices[i] for i in order]
        self.values = self.values[order]
        self._index = None
        return self

    @property
    def index(self) -> dict:
        if self._index is None:
            self._index = {s: i for i, s in enumerate(self.simplices)}
        return self._index

    def value(self, simplex) -> float:
        i = self.index.get(tuple(simplex))
        return np.inf if i is None else float(self.values[i])

    def at(self, eps: float, slack: float = 0.0) -> set:
        """Simplices present at scale ``eps``."""
        return {s for s, v in zip(self.simplices, self.values) if v <= eps + slack}

    def dims(self) -> np.ndarray:
        return np.array([len(s) - 1 for s in self.simplices])

    def check(self) -> None:
        """Raise ``ValueError`` unless closed, monotone and sorted."""
        idx = self.index
        for s, v in zip(self.simplices, self.values):
            if list(s) != sorted(set(s)) or not s:
                raise ValueError(f"simplex {s} is not a strictly increasing vertex tuple")
            if len(s) > 1:
                for face in itertools.combinations(s, len(s) - 1):
                    j = idx.get(face)
                    if j is None:
                        raise ValueError(f"face {face} of {s} missing")
                    if self.values[j] > v:
                        raise ValueError(f"face {face} enters after coface {s}")
        keys = [(v, len(s), s) for s, v in zip(self.simplices, self.values)]
        if keys != sorted(keys):
            raise ValueError("simplices are not in filtration order")

    def to_jsonl(self) -> str:
        return "".join(json.dumps({"v": list(s), "t": float(v)}) + "\n"
                       for s, v in zip(self.simplices, self.values))

    @classmethod
    def from_jsonl(cls, text: str, kind: str = "rips") -> "FilteredComplex":
        simplices, values = [], []
        for line in text.splitlines():
            if line.strip():
                rec = json.loads(line)
                simplices.append(tuple(rec["v"]))
                values.append(rec["t"])
        n = 1 + max((max(s) for s in simplices), default=-1)
        dim = max((len(s) - 1 for s in simplices), default=0)
        return cls(simplices, values, dim, kind, n).sort()


def _flag_complex(weights: np.ndarray, max_dim: int, kind: str,
                  max_value: float = np.inf) -> FilteredComplex:
    k = len(weights)
    simplices = [(i,) for i in range(k)]
    values = [0.0] * k
    for d in range(1, min(max_dim, k - 1) + 1):
        combos = np.array(list(itertools.combinations(range(k), d + 1)), dtype=int)
        if combos.size == 0:
            break
        a, b = np.triu_indices(d + 1, 1)
        vals = np.max(weights[combos[:, a], combos[:, b]], axis=1)
        keep = vals <= max_value
        simplices.extend(map(tuple, combos[keep].tolist()))
        values.extend(vals[keep].tolist())
    return FilteredComplex(simplices, values, max_dim, kind, k).sort()


def rips_weights(cloud: PointCloud, metric: MetricSpec, orientation: str = FORWARD) -> np.ndarray:
    """Symmetric edge weights ``max(d_{p_i}(p_i, p_j), d_{p_j}(p_j, p_i))``."""
    D = distance_matrix(metric, cloud.check(metric).points, orientation)
    return np.maximum(D, D.T)


def delta_weights(cloud: PointCloud, metric: MetricSpec, orientation: str = FORWARD) -> np.ndarray:
    """Mean of the two oriented distances, so an edge enters at eps iff their sum is <= 2 eps."""
    D = distance_matrix(metric, cloud.check(metric).points, orientation)
    return 0.5 * (D + D.T)


def build_rips(cloud: PointCloud, metric: MetricSpec, max_dim: int = 2,
               max_value: float = np.inf, orientation: str = FORWARD) -> FilteredComplex:
    if max_dim < 0:
        raise ValueError("max_dim must be nonnegative")
    return _flag_complex(rips_weights(cloud, metric, orientation), max_dim, "rips", max_value)


def build_delta(cloud: PointCloud, metric: MetricSpec, max_dim: int = 2,
                max_value: float = np.inf, orientation: str = FORWARD) -> FilteredComplex:
    if max_dim < 0:
        raise ValueError("max_dim must be nonnegative")
    return _flag_complex(delta_weights(cloud, metric, orientation), max_dim, "delta", max_value)


def build_cech(cloud: PointCloud, metric: MetricSpec, max_dim: int = 2,
               orientation: str = FORWARD, tol: float = 1e-10,
               max_value: Optional[float] = None) -> FilteredComplex:
    """Čech filtration: each simplex enters at the minimax radius of its vertices.

    Simplices are enumerated breadth-first by dimension; a candidate is formed
    only when all its facets are present, so supersets of simplices above
    ``max_value`` are pruned.  ``tol`` is relative to the largest Rips edge.
    Values are lifted to the maximum over facets, which keeps the filtration
    exactly monotone despite solver round-off.
    """
    cloud.check(metric)
    k = len(cloud)
    if max_dim < 0:
        raise ValueError("max_dim must be nonnegative")
    if max_dim > k - 1:
        max_dim = k - 1
    rips_w = rips_weights(cloud, metric)
    top = float(rips_w.max()) if k > 1 else 0.0
    cutoff = top if max_value is None else float(max_value)
    abs_tol = tol * max(top, 1e-300)
    pts = cloud.points
    kind = "cech_forward" if orientation == FORWARD else "cech_backward"

    present = {(i,): 0.0 for i in range(k)}
    witnesses = {(i,): pts[i].copy() for i in range(k)}
    layer = [(i,) for i in range(k)]
    for d in range(1, max_dim + 1):
        layer_set = set(layer)
        cands = []
        for s in layer:
            for v in range(s[-1] + 1, k):
                c = s + (v,)
                if all(c[:j] + c[j + 1:] in layer_set for j in range(len(c) - 1)):
                    cands.append(c)
        if not cands:
            break
        C = np.array(cands, dtype=int)
        try:
            facet_w = np.array([[witnesses[c[:j] + c[j + 1:]] for j in range(len(c))]
                                for c in cands])
            res = solve_minimax(metric, pts[C], orientation=orientation, tol=abs_tol,
                                candidates=facet_w)
        except ConvergenceError as err:
            results = err.result
            bad = next(i for i, r in enumerate(results) if not r.converged)
            raise ConvergenceError(str(err), result=results[bad], simplex=cands[bad]) from None
        layer = []
        for c, r in zip(cands, res):
            val = max([r.radius] + [present[c[:j] + c[j + 1:]] for j in range(len(c))])
            if val <= cutoff:
                present[c] = val
                witnesses[c] = r.witness
                layer.append(c)
    simplices = list(present)
    return FilteredComplex(simplices, [present[s] for s in simplices], max_dim, kind, k,
                           witnesses).sort()


def build_complex(kind: str, cloud: PointCloud, metric: MetricSpec, max_dim: int = 2,
                  **kwargs) -> FilteredComplex:
    if kind == "rips":
        return build_rips(cloud, metric, max_dim, **kwargs)
    if kind == "delta":
        return build_delta(cloud, metric, max_dim, **kwargs)
    if kind == "cech_forward":
        return build_cech(cloud, metric, max_dim, "forward", **kwargs)
    if kind == "cech_backward":
        return build_cech(cloud, metric, max_dim, "backward", **kwargs)
    raise ValueError(f"unknown complex kind {kind!r}; choose from {KINDS}")


# ---------------------------------------------------------------------------
# inclusions


@dataclass
class InclusionReport:
    passed: bool
    checked: int
    counterexample: Optional[tuple] = None
    scale: float = 1.0
    offset: float = 0.0

    def __bool__(self):
        return self.passed


def verify_inclusion(a: FilteredComplex, b: FilteredComplex, scale: float = 1.0,
                     offset: float = 0.0, epsilons: Optional[Iterable[float]] = None,
                     slack: float = SLACK) -> InclusionReport:
    """Check ``a(eps) ⊆ b(scale * eps + offset)``.

    Without ``epsilons`` the check runs on the whole filtration: every simplex
    of ``a`` must appear in ``b`` with ``v_b <= scale * v_a + offset + slack``,
    which implies the inclusion at every scale.  With ``epsilons`` it is checked
    at each listed scale.  A counterexample is ``(simplex, v_a, v_b[, eps])``.
    """
    if a.n_vertices != b.n_vertices:
        raise VertexSetMismatch(f"{a.n_vertices} vs {b.n_vertices} vertices")
    if epsilons is None:
        for s, va in zip(a.simplices, a.values):
            vb = b.value(s)
            if not vb <= scale * va + offset + slack:
                return InclusionReport(False, len(a), (s, float(va), vb), scale, offset)
        return InclusionReport(True, len(a), None, scale, offset)
    checked = 0
    for eps in epsilons:
        target = scale * eps + offset + slack
        for s, va in zip(a.simplices, a.values):
            if va > eps:
                break
            checked += 1
            vb = b.value(s)
            if not vb <= target:
                return InclusionReport(False, checked, (s, float(va), vb, float(eps)), scale, offset)
    return InclusionReport(True, checked, None, scale, offset)


def cech_rips_offset(cech: FilteredComplex, cloud: PointCloud, metric: MetricSpec) -> float:
    """Measured ``delta = sup d_{p_i}(y, p_j)`` over Čech simplices and their witnesses ``y``.

    With this offset ``Čech(eps) ⊆ Rips(eps + delta)`` follows from the
    triangle inequality of each F_{p_i}.
    """
    pts = cloud.points
    delta = 0.0
    for s in cech.simplices:
        if len(s) < 2:
            continue
        y = cech.witnesses[s]
        idx = np.array(s)
        base = np.repeat(pts[idx], len(idx), axis=0)
        targets = np.tile(pts[idx], (len(idx), 1))
        delta = max(delta, float(np.max(metric.func(base, targets - y))))
    return delta


def random_filtered_complex(n_vertices: int, max_dim: int = 2, seed: int = 0,
                            density: float = 0.7) -> FilteredComplex:
    """Random valid filtration on a random subcomplex of the full simplex.

    Vertices get values in [0, 1); each higher simplex whose facets are all
    present is kept with probability ``density`` and enters at the max of its
    facets plus a random increment (occasionally zero, to exercise ties).
    """
    rng = np.random.default_rng(seed)
    present = {(i,): float(rng.uniform(0, 1)) for i in range(n_vertices)}
    for d in range(1, max_dim + 1):
        for c in itertools.combinations(range(n_vertices), d + 1):
            facets = [c[:j] + c[j + 1:] for j in range(len(c))]
            if all(f in present for f in facets) and rng.uniform() < density:
                bump = 0.0 if rng.uniform() < 0.15 else float(rng.uniform(0, 1))
                present[c] = max(present[f] for f in facets) + bump
    simplices = list(present)
    return FilteredComplex(simplices, [present[s] for s in simplices], max_dim, "rips",
                           n_vertices).sort()


def epsilon_grid(cx: FilteredComplex, count: int = 20) -> np.ndarray:
    """``count`` scales at evenly spaced quantiles of the positive entry values.

    Quantiles land exactly on entry values, where inclusions are tightest.
    """
    vals = cx.values[cx.values > 0]
    if len(vals) == 0:
        return np.linspace(0.0, 1.0, count)
    return np.quantile(vals, np.linspace(0.0, 1.0, count), method="inverted_cdf")


def inclusion_suite(cloud: PointCloud, metric: MetricSpec, max_dim: int = 2,
                    epsilons: Optional[Sequence[float]] = None, count: int = 20) -> dict:
    """Run every complex inclusion that applies to ``metric`` on one cloud.

    Always: ``Rips ⊆ Delta ⊆ Rips(2 eps)``, ``Rips ⊆ Čech`` and
    ``Čech ⊆ Rips(eps + delta)`` with the measured witness offset ``delta``.
    Symmetric position-independent metrics (norms) add ``Čech ⊆ Rips(2 eps)``.  Metrics with a one-form of
    largest norm ``c`` on the data add the forward/backward Čech sandwich with
    factor ``(1 + c) / (1 - c)``.  Returns ``{name: InclusionReport}``.
    """
    rips = build_rips(cloud, metric, max_dim)
    delta = build_delta(cloud, metric, max_dim)
    cech = build_cech(cloud, metric, max_dim, FORWARD)
    eps = np.asarray(epsilons if epsilons is not None else epsilon_grid(rips, count), float)
    offset = cech_rips_offset(cech, cloud, metric)
    out = {
        "rips ⊆ delta": verify_inclusion(rips, delta, 1.0, epsilons=eps),
        "delta ⊆ rips(2ε)": verify_inclusion(delta, rips, 2.0, epsilons=eps),
        "rips ⊆ cech": verify_inclusion(rips, cech, 1.0, epsilons=eps),
        "cech ⊆ rips(ε+δ)": verify_inclusion(cech, rips, 1.0, offset, epsilons=eps),
    }
    if metric.is_symmetric and metric.is_position_independent:
        out["cech ⊆ rips(2ε)"] = verify_inclusion(cech, rips, 2.0, epsilons=eps)
    if metric.one_form is not None:
        c = float(np.max(metric.one_form.norm(cloud.points)))
        k = (1.0 + c) / (1.0 - c)
        back = build_cech(cloud, metric, max_dim, "backward")
        out["cech⁻ ⊆ cech⁺(kε)"] = verify_inclusion(back, cech, k, epsilons=eps)
        out["cech⁺(kε) ⊆ cech⁻(k²ε)"] = verify_inclusion(cech, back, k, epsilons=k * eps)
    return out
