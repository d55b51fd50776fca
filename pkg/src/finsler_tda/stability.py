"""Correspondences, distortion, Gromov–Hausdorff and the stability harness.

Within-cloud distances are the pointwise quasi-distances
``d_x(x, x') = F(x, x' - x)``, used as they are (no symmetrisation).
"""
from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .complexes import PointCloud, build_complex
from .errors import InfiniteMismatch, InvalidCorrespondence, SizeLimitExceeded
from .metrics import POSITIVE_ORTHANT, MetricSpec, distance_matrix
from .persistence import bottleneck_distance, compute_persistence

GH_MAX_PAIRS = 16


@dataclass(frozen=True)
class Correspondence:
    """A relation between index sets of sizes ``nx`` and ``ny`` with full projections."""

    pairs: frozenset
    nx: int
    ny: int

    def __post_init__(self):
        pairs = frozenset((int(i), int(j)) for i, j in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        xs = {i for i, _ in pairs}
        ys = {j for _, j in pairs}
        if xs != set(range(self.nx)) or ys != set(range(self.ny)):
            raise InvalidCorrespondence("every point of both clouds must appear in some pair")

    @classmethod
    def identity(cls, n: int) -> "Correspondence":
        return cls(frozenset((i, i) for i in range(n)), n, n)

    def transpose(self) -> "Correspondence":
        return Correspondence(frozenset((j, i) for i, j in self.pairs), self.ny, self.nx)

    def as_arrays(self):
        ordered = sorted(self.pairs)
        return np.array([i for i, _ in ordered]), np.array([j for _, j in ordered])


@dataclass
class DistortionReport:
    distortion: float
    argmax_pairs: tuple
    gh_upper_bound: float


def _distortion_from_matrices(DX, DY, I, J):
    diff = np.abs(DX[np.ix_(I, I)] - DY[np.ix_(J, J)])
    flat = int(np.argmax(diff))
    a, b = divmod(flat, diff.shape[1])
    return float(diff[a, b]), ((int(I[a]), int(J[a])), (int(I[b]), int(J[b])))


def distortion(x_cloud: PointCloud, y_cloud: PointCloud, metric: MetricSpec,
               corr: Correspondence) -> DistortionReport:
    """``sup |d_x(x, x') - d_y(y, y')|`` over all pairs of pairs in ``corr``."""
    if corr.nx != len(x_cloud) or corr.ny != len(y_cloud):
        raise InvalidCorrespondence("correspondence sizes do not match the clouds")
    DX = distance_matrix(metric, x_cloud.check(metric).points)
    DY = distance_matrix(metric, y_cloud.check(metric).points)
    I, J = corr.as_arrays()
    dis, arg = _distortion_from_matrices(DX, DY, I, J)
    return DistortionReport(dis, arg, dis / 2.0)


def gromov_hausdorff_exact(x_cloud: PointCloud, y_cloud: PointCloud, metric: MetricSpec) -> float:
    """Half the least distortion over every correspondence, by exhaustive enumeration.

    Only feasible for ``|X| * |Y| <= 16``.  Distortion can only grow when pairs
    are added, so enumeration is over all relations with full projections.
    """
    nx, ny = len(x_cloud), len(y_cloud)
    if nx * ny > GH_MAX_PAIRS:
        raise SizeLimitExceeded(f"|X|*|Y| = {nx * ny} exceeds {GH_MAX_PAIRS}")
    DX = distance_matrix(metric, x_cloud.check(metric).points)
    DY = distance_matrix(metric, y_cloud.check(metric).points)
    all_pairs = [(i, j) for i in range(nx) for j in range(ny)]
    # pairwise costs between slots of the full grid
    PI = np.array([i for i, _ in all_pairs])
    PJ = np.array([j for _, j in all_pairs])
    cost = np.abs(DX[np.ix_(PI, PI)] - DY[np.ix_(PJ, PJ)])
    best = np.inf
    m = len(all_pairs)
    full_x = (1 << nx) - 1
    full_y = (1 << ny) - 1
    for mask in range(1, 1 << m):
        xs = ys = 0
        for s in range(m):
            if mask >> s & 1:
                xs |= 1 << PI[s]
                ys |= 1 << PJ[s]
        if xs != full_x or ys != full_y:
            continue
        sel = [s for s in range(m) if mask >> s & 1]
        dis = float(cost[np.ix_(sel, sel)].max())
        if dis < best:
            best = dis
    return best / 2.0


def perturb(cloud: PointCloud, metric: MetricSpec, noise: float, seed: int) -> PointCloud:
    """Noisy copy of a cloud.

    Positive-orthant metrics get multiplicative log-normal noise
    ``x * exp(noise * z)``; otherwise additive Gaussian noise with standard
    deviation ``noise`` times the RMS distance of the points from their centroid.
    """
    rng = np.random.default_rng(seed)
    X = cloud.points
    z = rng.standard_normal(X.shape)
    if metric.domain == POSITIVE_ORTHANT:
        Y = X * np.exp(noise * z)
    else:
        spread = float(np.sqrt(np.mean(np.sum((X - X.mean(axis=0)) ** 2, axis=1))))
        Y = X + noise * spread * z
    return PointCloud(Y, cloud.labels)


@dataclass
class StabilityRecord:
    seed: int
    metric: str
    kind: str
    noise: float
    dim: int
    d_b: float
    gh_bound: float
    passed: bool

    def to_json(self) -> str:
        rec = asdict(self)
        rec["pass"] = rec.pop("passed")
        return json.dumps(rec)


def stability_trial(cloud: PointCloud, metric: MetricSpec, noise: float, complex_kind: str,
                    max_dim: int = 2, seed: int = 0, dims: Sequence[int] = (0, 1),
                    slack: float = 1e-9) -> list:
    """One perturbation trial: compare ``d_b`` per dimension with ``dis(C_id) / 2``.

    ``d_GH(X, Y) <= dis(C) / 2`` for any correspondence, so a passing record is
    implied by the stability bound ``d_b <= d_GH``.
    """
    Y = perturb(cloud, metric, noise, seed) if noise > 0 else PointCloud(cloud.points.copy())
    dx = compute_persistence(build_complex(complex_kind, cloud, metric, max_dim))
    dy = compute_persistence(build_complex(complex_kind, Y, metric, max_dim))
    bound = distortion(cloud, Y, metric, Correspondence.identity(len(cloud))).gh_upper_bound
    records = []
    for k in dims:
        try:
            db = bottleneck_distance(dx, dy, k)
        except InfiniteMismatch:
            db = np.inf
        records.append(StabilityRecord(seed, metric.name, complex_kind, noise, k, db, bound,
                                       bool(db <= bound + slack)))
    return records


def stability_campaign(cloud: PointCloud, metric: MetricSpec, noise: float, complex_kind: str,
                       seeds: Iterable[int], max_dim: int = 2, dims: Sequence[int] = (0, 1)) -> list:
    out = []
    for seed in seeds:
        out.extend(stability_trial(cloud, metric, noise, complex_kind, max_dim, seed, dims))
    return out
