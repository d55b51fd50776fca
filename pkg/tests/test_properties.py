"""Property-based checks of the invariants each module promises."""
import math

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from finsler_tda import complexes as C
from finsler_tda import io as fio
from finsler_tda import metrics as M
from finsler_tda import persistence as H
from finsler_tda import stability as S
from finsler_tda.geometry import solve_minimax

METRICS = {name: M.metric_from_config({"name": name, "dimension": 3}) for name in M.BUILTIN_NAMES}

positive = st.floats(0.05, 50.0)
coord = st.floats(-20.0, 20.0)
metric_names = st.sampled_from(M.BUILTIN_NAMES)


@st.composite
def base_and_vectors(draw, k=2):
    name = draw(metric_names)
    F = METRICS[name]
    p = np.array(draw(st.lists(positive, min_size=3, max_size=3)))
    vs = [np.array(draw(st.lists(coord, min_size=3, max_size=3))) for _ in range(k)]
    return F, p, vs


@st.composite
def clouds(draw, metric=None, min_size=3, max_size=7):
    name = draw(metric_names) if metric is None else metric
    F = M.metric_from_config({"name": name, "dimension": 2})
    seed = draw(st.integers(0, 10_000))
    size = draw(st.integers(min_size, max_size))
    return F, fio.random_cloud(F, size, seed)


@given(base_and_vectors(1), st.floats(1e-3, 1e3))
def test_positive_homogeneity(data, lam):
    F, p, (v,) = data
    assert math.isclose(F(p, lam * v), lam * F(p, v), rel_tol=1e-12, abs_tol=1e-300)


@given(base_and_vectors(2))
def test_triangle_inequality_in_v(data):
    F, p, (u, v) = data
    assert F(p, u + v) <= F(p, u) + F(p, v) + 1e-12 * (F(p, u) + F(p, v))


@given(base_and_vectors(1))
def test_positivity(data):
    F, p, (v,) = data
    assume(np.linalg.norm(v) > 1e-6)
    assert F(p, v) > 0


@given(base_and_vectors(1))
def test_symmetric_metrics_are_even(data):
    F, p, (v,) = data
    if F.is_symmetric:
        assert math.isclose(F(p, -v), F(p, v), rel_tol=1e-14)


@given(arrays(float, 3, elements=positive), arrays(float, 3, elements=positive),
       arrays(float, 3, elements=positive))
def test_closed_form_distances_are_metrics(x, y, z):
    for d in (M.burg_distance, M.fisher_distance):
        assert d(x, y) == d(y, x)
        assert d(x, z) <= d(x, y) + d(y, z) + 1e-12


@given(arrays(float, 2, elements=positive), arrays(float, 2, elements=positive))
def test_itakura_saito_nonnegative(x, y):
    assert M.itakura_saito_divergence(x, y) >= -1e-12


@given(clouds(min_size=2, max_size=5))
def test_minimax_radius_bounds(data):
    F, cloud = data
    P = cloud.points
    res = solve_minimax(F, P)
    D = M.distance_matrix(F, P)
    # at any centre c_j the objective is max_i F(c_i, c_j - c_i) = max of column j
    assert res.radius <= D.max(axis=0).min() + 1e-12
    assert res.radius >= 0
    assert math.isclose(res.radius, np.max(F.func(P, res.witness - P)), rel_tol=1e-12)
    sub = solve_minimax(F, P[:-1])
    assert sub.radius <= res.radius + 1e-9


@given(clouds())
def test_rips_delta_sandwich(data):
    F, cloud = data
    rips, delta = C.build_rips(cloud, F), C.build_delta(cloud, F)
    assert C.verify_inclusion(rips, delta).passed
    assert C.verify_inclusion(delta, rips, 2.0).passed
    rips.check()
    delta.check()


@given(clouds(max_size=5))
def test_cech_contains_rips_and_is_a_filtration(data):
    F, cloud = data
    cech, rips = C.build_cech(cloud, F), C.build_rips(cloud, F)
    cech.check()
    assert C.verify_inclusion(rips, cech).passed
    assert C.verify_inclusion(cech, rips, 1.0, C.cech_rips_offset(cech, cloud, F)).passed


@given(st.integers(0, 10_000), st.integers(2, 8))
def test_diagram_betti_equals_rank_betti(seed, n):
    cx = C.random_filtered_complex(n, 2, seed)
    d = H.compute_persistence(cx)
    for eps in np.unique(cx.values):
        for k in (0, 1):
            assert d.betti(eps, k) == H.betti_at(cx, eps, k)


@st.composite
def diagrams(draw):
    bars = draw(st.lists(st.tuples(st.floats(0, 10), st.floats(0, 5)), max_size=6))
    return H.PersistenceDiagram.from_bars([(1, b, b + l) for b, l in bars])


@given(diagrams(), diagrams(), diagrams())
def test_bottleneck_is_a_metric(a, b, c):
    dab = H.bottleneck_distance(a, b, 1)
    assert dab == H.bottleneck_distance(b, a, 1)
    assert H.bottleneck_distance(a, a, 1) == 0.0
    assert H.bottleneck_distance(a, c, 1) <= dab + H.bottleneck_distance(b, c, 1) + 1e-12


@given(st.integers(0, 10_000), st.floats(0.0, 0.5))
def test_flag_filtration_stability(seed, scale):
    # same vertex set, edge weights moved by at most eta: d_b <= eta
    rng = np.random.default_rng(seed)
    n = 7
    W = rng.uniform(0.1, 2.0, (n, n))
    W = np.triu(W, 1) + np.triu(W, 1).T
    noise = rng.uniform(-scale, scale, (n, n))
    W2 = np.maximum(W + np.triu(noise, 1) + np.triu(noise, 1).T, 0.0)
    eta = np.max(np.abs(W2 - W))
    a = H.compute_persistence(C._flag_complex(W, 2, "rips", n))
    b = H.compute_persistence(C._flag_complex(W2, 2, "rips", n))
    for k in (0, 1):
        assert H.bottleneck_distance(a, b, k) <= eta + 1e-12


@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(1, 4))
def test_gh_properties(seed, nx, ny):
    assume(nx * ny <= 16)
    F = M.burg(2)
    X, Y = fio.random_cloud(F, nx, seed), fio.random_cloud(F, ny, seed + 1)
    gh = S.gromov_hausdorff_exact(X, Y, F)
    assert gh >= 0
    assert S.gromov_hausdorff_exact(X, X, F) == 0.0
    if nx == ny:
        assert gh <= S.distortion(X, Y, F, S.Correspondence.identity(nx)).gh_upper_bound


@given(arrays(float, (5, 3), elements=st.floats(allow_nan=False, allow_infinity=False, width=64), unique=True))
def test_cloud_json_round_trip(P):
    assume(len(np.unique(P, axis=0)) == len(P))
    cloud = C.PointCloud(P)
    assert fio.cloud_from_json(fio.cloud_to_json(cloud)).points.tobytes() == cloud.points.tobytes()


@given(st.lists(st.tuples(st.integers(0, 2), st.floats(0, 100), st.floats(0, 100) | st.just(math.inf)),
                max_size=12))
def test_diagram_csv_round_trip(bars):
    d = H.PersistenceDiagram.from_bars([(k, b, max(b, e)) for k, b, e in bars])
    text = fio.diagram_to_csv(d)
    assert fio.diagram_to_csv(fio.diagram_from_csv(text)) == text


@given(arrays(float, 3, elements=st.floats(-100, 100)), st.floats(0.1, 50),
       arrays(float, 3, elements=st.floats(-1, 1)), st.integers(3, 40))
def test_circle_lies_on_circle(center, radius, normal, count):
    assume(np.linalg.norm(normal) > 1e-3)
    P = fio.gen_circle(fio.CircleSpec(center, radius, normal, count)).points
    n = normal / np.linalg.norm(normal)
    assert np.allclose(np.linalg.norm(P - center, axis=1), radius, rtol=1e-12, atol=1e-9)
    assert np.allclose((P - center) @ n, 0.0, atol=1e-9)
