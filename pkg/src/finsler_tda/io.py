"""Datasets, file formats and static plot export."""
from __future__ import annotations

import csv
import io as _io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .complexes import KINDS, FilteredComplex, PointCloud
from .errors import DegenerateNormal
from .geometry import FinslerBall, ball_boundary_polyline
from .metrics import MetricSpec, metric_from_config
from .persistence import PersistenceDiagram

CIRCLE_CENTER = (14.0, 15.0, 10.0)
CIRCLE_NORMAL = (1.0, 1.0, 1.0)
CIRCLE_RADIUS = 6.0
CIRCLE_COUNT = 13


@dataclass
class CircleSpec:
    center: Sequence[float]
    radius: float
    normal: Sequence[float] = (0.0, 0.0, 1.0)
    count: int = 13

    @classmethod
    def reference(cls) -> "CircleSpec":
        return cls(CIRCLE_CENTER, CIRCLE_RADIUS, CIRCLE_NORMAL, CIRCLE_COUNT)

    @classmethod
    def from_config(cls, cfg: dict) -> "CircleSpec":
        return cls(tuple(cfg["center"]), float(cfg["radius"]),
                   tuple(cfg.get("normal", (0.0, 0.0, 1.0))), int(cfg.get("count", 13)))


def circle_basis(normal) -> np.ndarray:
    """Orthonormal in-plane pair ``(e1, e2)`` for a plane with the given normal.

    ``e2`` is Gram–Schmidt applied to the coordinate axis least aligned with
    the normal (ties go to the middle tied axis) and ``e1 = e2 x n``.  For
    the xy-plane this is the standard basis.
    """
    n = np.asarray(normal, float)
    norm = np.linalg.norm(n)
    if len(n) != 3 or not norm > 1e-12:
        raise DegenerateNormal(f"normal {normal} is not a nonzero 3-vector")
    n = n / norm
    a = np.abs(n)
    tied = np.flatnonzero(a <= a.min() + 1e-12)
    axis = tied[len(tied) // 2]
    e = np.zeros(3)
    e[axis] = 1.0
    e2 = e - (e @ n) * n
    e2 /= np.linalg.norm(e2)
    e1 = np.cross(e2, n)
    return np.array([e1, e2])


def gen_circle(circle: CircleSpec) -> PointCloud:
    """``count`` equally spaced points on a circle, starting at angle 0 along ``e1``.

    With the reference parameters this reproduces the thirteen fixture points.
    """
    if circle.count < 3:
        raise ValueError("count must be at least 3")
    e1, e2 = circle_basis(circle.normal)
    theta = 2.0 * np.pi * np.arange(circle.count) / circle.count
    c = np.asarray(circle.center, float)
    pts = c + circle.radius * (np.cos(theta)[:, None] * e1 + np.sin(theta)[:, None] * e2)
    return PointCloud(pts, [f"p{i + 1}" for i in range(circle.count)])


def circle_cloud() -> PointCloud:
    return gen_circle(CircleSpec.reference())


# ---------------------------------------------------------------------------
# JSON / CSV formats


def cloud_to_json(cloud: PointCloud) -> str:
    obj = {"dimension": cloud.dimension, "points": cloud.points.tolist()}
    if cloud.labels is not None:
        obj["labels"] = list(cloud.labels)
    return json.dumps(obj)


def cloud_from_json(text: str) -> PointCloud:
    obj = json.loads(text)
    pts = np.asarray(obj["points"], float)
    if pts.ndim != 2 or pts.shape[1] != int(obj.get("dimension", pts.shape[1])):
        raise ValueError("points do not match the declared dimension")
    return PointCloud(pts, obj.get("labels"))


def load_cloud(path) -> PointCloud:
    return cloud_from_json(Path(path).read_text())


def save_cloud(cloud: PointCloud, path) -> None:
    Path(path).write_text(cloud_to_json(cloud) + "\n")


def load_metric(path) -> MetricSpec:
    return metric_from_config(json.loads(Path(path).read_text()))


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else repr(float(x))


def _parse(x) -> float:
    return math.inf if x in ("inf", "Infinity") else float(x)


def diagram_to_csv(dgm: PersistenceDiagram) -> str:
    d = dgm.exported()
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dim", "birth", "death"])
    for k, b, e in zip(d.dims, d.births, d.deaths):
        w.writerow([int(k), _fmt(b), _fmt(e)])
    return buf.getvalue()


def diagram_from_csv(text: str) -> PersistenceDiagram:
    rows = list(csv.DictReader(_io.StringIO(text)))
    return PersistenceDiagram.from_bars((int(r["dim"]), _parse(r["birth"]), _parse(r["death"]))
                                        for r in rows)


def diagram_to_json(dgm: PersistenceDiagram) -> str:
    d = dgm.exported()
    bars = [{"dim": int(k), "birth": float(b), "death": "inf" if math.isinf(e) else float(e)}
            for k, b, e in zip(d.dims, d.births, d.deaths)]
    return json.dumps({"kind": dgm.kind, "bars": bars})


def diagram_from_json(text: str) -> PersistenceDiagram:
    obj = json.loads(text)
    return PersistenceDiagram.from_bars(((b["dim"], _parse(b["birth"]), _parse(b["death"]))
                                         for b in obj["bars"]), obj.get("kind", ""))


def load_diagram(path) -> PersistenceDiagram:
    text = Path(path).read_text()
    if str(path).endswith(".json"):
        return diagram_from_json(text)
    return diagram_from_csv(text)


# ---------------------------------------------------------------------------
# plot export


def cloud_plane(cloud: PointCloud) -> np.ndarray:
    """Orthonormal pair spanning the best-fit plane of a cloud (2-D clouds: identity)."""
    if cloud.dimension == 2:
        return np.eye(2)
    X = cloud.points - cloud.points.mean(axis=0)
    _, _, vt = np.linalg.svd(X, full_matrices=False)
    return vt[:2]


def ball_polylines(cloud: PointCloud, metric: MetricSpec, radius: float,
                   orientation: str = "forward", samples: int = 360) -> list:
    """Boundary polylines of the balls about every point, in plane coordinates.

    For clouds of dimension above two each ball is sliced by the best-fit
    plane of the cloud through its centre.
    """
    plane = cloud_plane(cloud)
    origin = cloud.points.mean(axis=0)
    out = []
    for p in cloud.points:
        ball = FinslerBall(p, radius, metric, orientation)
        pts = ball_boundary_polyline(ball, samples, plane)
        out.append((pts - origin) @ plane.T)
    return out


def polylines_to_csv(polylines: list) -> str:
    lines = ["ball,index,x,y"]
    for b, poly in enumerate(polylines):
        for i, (x, y) in enumerate(poly):
            lines.append(f"{b},{i},{x!r},{y!r}")
    return "\n".join(lines) + "\n"


def _svg_frame(xs, ys, width, height, margin=20):
    lo_x, hi_x = float(np.min(xs)), float(np.max(xs))
    lo_y, hi_y = float(np.min(ys)), float(np.max(ys))
    span = max(hi_x - lo_x, hi_y - lo_y, 1e-12)
    s = (min(width, height) - 2 * margin) / span

    def tx(x, y):
        return margin + (x - lo_x) * s, height - margin - (y - lo_y) * s

    return tx


def balls_svg(cloud: PointCloud, polylines: list, width: int = 480, height: int = 480) -> str:
    plane = cloud_plane(cloud)
    centers = (cloud.points - cloud.points.mean(axis=0)) @ plane.T
    allpts = np.vstack([centers] + polylines)
    tx = _svg_frame(allpts[:, 0], allpts[:, 1], width, height)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             '<rect width="100%" height="100%" fill="white"/>']
    for poly in polylines:
        pts = " ".join("%.3f,%.3f" % tx(x, y) for x, y in poly)
        parts.append(f'<polygon points="{pts}" fill="steelblue" fill-opacity="0.15" '
                     f'stroke="steelblue" stroke-width="1"/>')
    for x, y in centers:
        cx, cy = tx(x, y)
        parts.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="2.5" fill="black"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def diagram_svg(dgm: PersistenceDiagram, width: int = 360, height: int = 360) -> str:
    d = dgm.exported()
    finite = d.deaths[np.isfinite(d.deaths)]
    top = float(max(finite.max() if len(finite) else 1.0, d.births.max() if len(d) else 1.0)) * 1.1
    inf_y = top
    tx = _svg_frame(np.array([0.0, top]), np.array([0.0, top]), width, height)
    colors = {0: "crimson", 1: "royalblue", 2: "seagreen"}
    x0, y0 = tx(0, 0)
    x1, y1 = tx(top, top)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             '<rect width="100%" height="100%" fill="white"/>',
             f'<line x1="{x0:.2f}" y1="{y0:.2f}" x2="{x1:.2f}" y2="{y1:.2f}" stroke="gray"/>']
    for k, b, e in zip(d.dims, d.births, d.deaths):
        cx, cy = tx(b, inf_y if math.isinf(e) else e)
        parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="3" fill="{colors.get(int(k), "black")}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def complex_to_jsonl(cx: FilteredComplex) -> str:
    return cx.to_jsonl()


def random_cloud(metric: MetricSpec, size: int, seed: int = 0) -> PointCloud:
    """``size`` points drawn from the metric's default sampling region."""
    from .metrics import sample_domain
    rng = np.random.default_rng(seed)
    return PointCloud(sample_domain(metric, rng, size))


# ---------------------------------------------------------------------------
# run configuration

SEED_ENV = "FINSLER_TDA_SEED"


class ConfigError(ValueError):
    """A run configuration is malformed or refers to missing files."""


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV}={raw!r} is not an integer") from None


@dataclass
class RunConfig:
    """One pipeline run: metric, dataset, complex kind, scales and output paths.

    ``metric`` and ``dataset`` are either inline JSON objects or paths
    (relative to the config file).  ``dataset`` may also be a circle description
    ``{"circle": {...}}``.  ``epsilons`` is ``"auto"`` or a strictly
    increasing list.
    """

    metric: MetricSpec
    cloud: PointCloud
    complex_kind: str = "rips"
    max_dim: int = 2
    epsilons: object = "auto"
    outputs: dict = field(default_factory=dict)
    seed: int = 0
    base: Path = Path(".")

    def output(self, key: str, default: str) -> Path:
        return self.base / self.outputs.get(key, default)

    def epsilon_values(self) -> Optional[np.ndarray]:
        return None if isinstance(self.epsilons, str) else np.asarray(self.epsilons, float)


def _resolve(ref, base: Path, what: str):
    if isinstance(ref, dict):
        return ref
    if not isinstance(ref, str):
        raise ConfigError(f"{what} must be an object or a file path")
    path = base / ref
    if not path.is_file():
        raise ConfigError(f"{what} file {path} does not exist")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} file {path} is not valid JSON: {exc}") from None


def load_run_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"run config {path} does not exist")
    try:
        cfg = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"run config {path} is not valid JSON: {exc}") from None
    base = path.parent
    for key in ("metric", "dataset"):
        if key not in cfg:
            raise ConfigError(f"run config lacks {key!r}")
    try:
        metric = metric_from_config(_resolve(cfg["metric"], base, "metric"))
        data = _resolve(cfg["dataset"], base, "dataset")
        if "circle" in data:
            cloud = gen_circle(CircleSpec.from_config(data["circle"]))
        else:
            cloud = cloud_from_json(json.dumps(data))
    except ConfigError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    kind = cfg.get("complex_kind", "rips")
    if kind not in KINDS:
        raise ConfigError(f"unknown complex_kind {kind!r}; choose from {', '.join(KINDS)}")
    eps = cfg.get("epsilons", "auto")
    if eps != "auto":
        arr = np.asarray(eps, float)
        if arr.ndim != 1 or len(arr) == 0 or np.any(np.diff(arr) <= 0):
            raise ConfigError("epsilons must be 'auto' or a strictly increasing list")
    seed = cfg.get("seed")
    return RunConfig(metric, cloud, kind, int(cfg.get("max_dim", 2)), eps,
                     dict(cfg.get("outputs", {})), default_seed() if seed is None else int(seed), base)
