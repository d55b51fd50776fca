import itertools
import json

import numpy as np
import pytest

import oracles
from finsler_tda import complexes as C
from finsler_tda import metrics as M
from finsler_tda import stability as S
from finsler_tda.errors import InvalidCorrespondence, SizeLimitExceeded
from finsler_tda.io import circle_cloud, random_cloud
from finsler_tda.persistence import bottleneck_distance, compute_persistence

E1 = M.euclidean(1)


def _line(*xs):
    return C.PointCloud(np.array(xs, float)[:, None])


def test_identity_and_translation_have_zero_distortion():
    X = circle_cloud()
    ident = S.Correspondence.identity(13)
    assert S.distortion(X, X, M.figure4_randers(3), ident).distortion == 0.0
    Y = C.PointCloud(X.points + [1.0, -2.0, 0.5])
    assert S.distortion(X, Y, M.euclidean(3), ident).distortion == pytest.approx(0.0, abs=1e-12)


def test_distortion_matches_pair_loops():
    B = M.burg(3)
    X = circle_cloud()
    Y = S.perturb(X, B, 0.01, seed=3)
    rep = S.distortion(X, Y, B, S.Correspondence.identity(13))
    DX, DY = M.distance_matrix(B, X.points), M.distance_matrix(B, Y.points)
    assert rep.distortion == oracles.distortion_loops(DX, DY, [(i, i) for i in range(13)])
    assert rep.gh_upper_bound == rep.distortion / 2
    (x1, y1), (x2, y2) = rep.argmax_pairs
    assert abs(DX[x1, x2] - DY[y1, y2]) == rep.distortion


def test_correspondence_validation():
    with pytest.raises(InvalidCorrespondence):
        S.Correspondence(frozenset({(0, 0)}), 2, 1)
    c = S.Correspondence(frozenset({(0, 0), (1, 0)}), 2, 1)
    assert c.transpose().pairs == frozenset({(0, 0), (0, 1)})


def test_line_pair_has_seven_correspondences():
    assert len(list(oracles.correspondences(2, 2))) == 7


@pytest.mark.parametrize("delta", [0.25, 0.5, 2.0])
def test_gh_line_pair(delta):
    X, Y = _line(0, 1), _line(0, 1 + delta)
    assert S.gromov_hausdorff_exact(X, Y, E1) == delta / 2
    DX = M.distance_matrix(E1, X.points)
    DY = M.distance_matrix(E1, Y.points)
    assert oracles.gh_bruteforce(DX, DY) == delta / 2


def test_gh_identical_is_zero():
    X = random_cloud(M.fisher(2), 4, seed=2)
    assert S.gromov_hausdorff_exact(X, X, M.fisher(2)) == 0.0


def test_gh_burg_triples_against_bruteforce():
    B = M.burg(2)
    for seed in range(5):
        X, Y = random_cloud(B, 3, seed), random_cloud(B, 3, seed + 100)
        DX, DY = M.distance_matrix(B, X.points), M.distance_matrix(B, Y.points)
        gh = S.gromov_hausdorff_exact(X, Y, B)
        assert gh == oracles.gh_bruteforce(DX, DY)
        perms = [[(i, p[i]) for i in range(3)] for p in itertools.permutations(range(3))]
        assert gh <= min(oracles.distortion_loops(DX, DY, r) for r in perms) / 2


def test_gh_size_limit():
    with pytest.raises(SizeLimitExceeded):
        S.gromov_hausdorff_exact(_line(0, 1, 2, 3, 4), _line(0, 1, 2, 3), E1)


def test_perturb_models():
    X = circle_cloud()
    Yb = S.perturb(X, M.burg(3), 0.01, seed=0)
    assert np.all(Yb.points > 0)
    assert np.allclose(np.log(Yb.points / X.points).std(), 0.01, rtol=0.5)
    Ye = S.perturb(X, M.euclidean(3), 0.01, seed=0)
    assert np.array_equal(Ye.points, S.perturb(X, M.euclidean(3), 0.01, seed=0).points)


def test_zero_noise_trial_is_exact():
    recs = S.stability_trial(circle_cloud(), M.euclidean(3), 0.0, "rips", seed=0)
    assert [(r.d_b, r.gh_bound, r.passed) for r in recs] == [(0.0, 0.0, True)] * 2


def test_record_json():
    rec = S.StabilityRecord(1, "burg", "rips", 0.01, 1, 0.1, 0.2, True)
    assert json.loads(rec.to_json()) == {"seed": 1, "metric": "burg", "kind": "rips", "noise": 0.01,
                                         "dim": 1, "d_b": 0.1, "gh_bound": 0.2, "pass": True}


def test_rips_h0_can_move_by_the_full_distortion():
    # two points at distance 1 versus 1 + delta: the finite H0 bar dies at the
    # edge length, so d_b = delta while dis(C_identity) / 2 = delta / 2
    delta = 0.1
    X, Y = _line(0, 1), _line(0, 1 + delta)
    dx = compute_persistence(C.build_rips(X, E1, 1))
    dy = compute_persistence(C.build_rips(Y, E1, 1))
    d_b = bottleneck_distance(dx, dy, 0)
    dis = S.distortion(X, Y, E1, S.Correspondence.identity(2)).distortion
    assert d_b == pytest.approx(delta, abs=1e-15)
    assert d_b == pytest.approx(dis, abs=1e-15)
    assert d_b > dis / 2


@pytest.mark.parametrize("kind", ["rips", "delta", "cech_forward"])
@pytest.mark.parametrize("name", M.BUILTIN_NAMES)
def test_bottleneck_within_full_distortion(name, kind):
    # Rips and Delta entry values are 1-Lipschitz in the pairwise distances, so
    # d_b <= dis(C_identity) follows for them; for Čech it is observed here
    F = M.metric_from_config({"name": name, "dimension": 3})
    X = circle_cloud()
    for seed in range(3):
        for rec in S.stability_trial(X, F, 0.01, kind, seed=seed):
            assert rec.d_b <= 2 * rec.gh_bound + 1e-9, rec
