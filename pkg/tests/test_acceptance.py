"""End-to-end acceptance suite: nine criteria, one pass/fail line each.

Every test records its outcome in ``RESULTS``; ``conftest.py`` prints the
lines in the terminal summary.  Tolerances, sample counts and runtime budgets
are fixed here and are not relaxed when a criterion fails.
"""
import math
import time
from collections import defaultdict

import numpy as np
import pytest

import oracles
from finsler_tda import complexes as C
from finsler_tda import geometry as G
from finsler_tda import metrics as M
from finsler_tda import persistence as H
from finsler_tda import stability as S
from finsler_tda.io import circle_cloud, random_cloud

pytestmark = pytest.mark.acceptance

RESULTS = {}

CIRCLE_H1 = (1.4358939857253505, 6.0)


def _record(number, title, passed, detail, elapsed, budget):
    within = elapsed <= budget
    ok = bool(passed and within)
    line = (f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail} "
            f"({elapsed:.1f}s, budget {budget:g}s{'' if within else ' EXCEEDED'})")
    RESULTS[number] = line
    print(line)
    return ok


# ---------------------------------------------------------------------------


def test_1_isometry():
    t0 = time.perf_counter()
    burg = M.check_isometry(M.burg(3), np.log, samples=1000, seed=0, tol=1e-8)
    fisher = M.check_isometry(M.fisher(3), np.sqrt, samples=1000, seed=0, tol=1e-8)
    elapsed = time.perf_counter() - t0
    ok = _record(1, "isometry reproduction", burg.passed and fisher.passed,
                 f"max rel residual Burg/ln {burg.max_residual:.1e}, Fisher/sqrt "
                 f"{fisher.max_residual:.1e} (tol 1e-8, 1000 samples each)", elapsed, 1.0)
    assert ok, RESULTS[1]


def _burg_ball(rho):
    def member(X):
        pos = np.all(X > 0, axis=1)
        Z = np.where(pos[:, None], X, 1.0)
        return pos & (np.linalg.norm(np.log(Z), axis=1) <= rho)
    return member


def _is_sublevel(r2):
    def member(Y):
        pos = np.all(Y > 0, axis=1)
        Z = np.where(pos[:, None], Y, 1.0)
        return pos & (np.sum(np.log(Z) + 1.0 / Z - 1.0, axis=1) <= r2)
    return member


def test_2_convexity_radius():
    t0 = time.perf_counter()
    burg_violations = {}
    for n in (2, 3):
        for rho in (0.25, 0.5, 1.0):
            rep = G.convexity_probe(_burg_ball(rho), np.ones(n), pairs=10_000, seed=n,
                                    lower_bound=1e-12, vectorized=True)
            assert rep.pairs == 10_000
            burg_violations[(n, rho)] = rep.violations
    r2 = 0.5
    assert r2 > 2 * math.log(2) - 1
    rep = G.convexity_probe(_is_sublevel(r2), np.ones(2), pairs=10_000, seed=0,
                            lower_bound=1e-12, vectorized=True)
    found = rep.violations >= 1
    if found:
        a, b, s = rep.witness
        x = (1 - s) * a + s * b
        one = np.ones(2)
        found = (M.itakura_saito_divergence(one, a) <= r2 and M.itakura_saito_divergence(one, b) <= r2
                 and M.itakura_saito_divergence(one, x) > r2)
    elapsed = time.perf_counter() - t0
    burg_ok = all(v == 0 for v in burg_violations.values())
    ok = _record(2, "convexity radius", burg_ok and found,
                 f"Burg balls rho in {{0.25,0.5,1}} x dims {{2,3}}: "
                 f"{sum(burg_violations.values())} violations in 6x10^4 pairs; "
                 f"Itakura-Saito r^2=0.5: {rep.violations} violating chords in 10^4 pairs",
                 elapsed, 30.0)
    assert ok, RESULTS[2]


def test_3_inclusions():
    t0 = time.perf_counter()
    failures = []
    checks = 0
    for name in M.BUILTIN_NAMES:
        for seed in range(100):
            n = 2 + seed % 2
            F = M.metric_from_config({"name": name, "dimension": n})
            cloud = random_cloud(F, 6 + seed % 5, seed)
            rips = C.build_rips(cloud, F)
            eps = C.epsilon_grid(rips, 20)
            reports = C.inclusion_suite(cloud, F, epsilons=eps)
            required = ["rips ⊆ delta", "delta ⊆ rips(2ε)", "rips ⊆ cech"]
            if name == "euclidean":
                required.append("cech ⊆ rips(2ε)")
            for label in required:
                checks += 1
                if not reports[label].passed:
                    failures.append((name, seed, label, reports[label].counterexample))
    elapsed = time.perf_counter() - t0
    ok = _record(3, "inclusion chains", not failures,
                 f"{len(failures)} counterexamples over {checks} inclusion checks "
                 f"(4 metrics x 100 clouds x 20 scales)", elapsed, 300.0)
    assert ok, (RESULTS[3], failures[:5])


def test_4_forward_backward_sandwich():
    t0 = time.perf_counter()
    cloud = circle_cloud()
    F = M.figure4_randers(3)
    c = float(np.max(F.one_form.norm(cloud.points)))
    k = (1 + c) / (1 - c)
    back = C.build_cech(cloud, F, 2, "backward")
    fwd = C.build_cech(cloud, F, 2, "forward")
    eps = C.epsilon_grid(back, 10)
    first = C.verify_inclusion(back, fwd, k, epsilons=eps)
    second = C.verify_inclusion(fwd, back, k, epsilons=k * eps)
    elapsed = time.perf_counter() - t0
    ok = _record(4, "forward/backward Čech sandwich", first.passed and second.passed,
                 f"c = {c:.6f}, factor (1+c)/(1-c) = {k:.4f}; counterexamples "
                 f"{0 if first.passed else 1} + {0 if second.passed else 1} at 10 scales",
                 elapsed, 120.0)
    assert ok, RESULTS[4]


def test_5_persistence_oracle():
    t0 = time.perf_counter()
    mismatches = 0
    for seed in range(50):
        n = 3 + seed % 6
        cx = C.random_filtered_complex(n, 2, seed)
        d = H.compute_persistence(cx)
        for eps in np.linspace(0.0, cx.values.max() * 1.05, 10):
            for k in (0, 1):
                if d.betti(eps, k) != H.betti_at(cx, eps, k):
                    mismatches += 1
            if [d.betti(eps, 0), d.betti(eps, 1)] != oracles.betti_numbers(cx.at(eps), 1):
                mismatches += 1
    elapsed = time.perf_counter() - t0
    ok = _record(5, "persistence oracle equivalence", mismatches == 0,
                 f"{mismatches} Betti mismatches over 50 complexes x 10 thresholds", elapsed, 60.0)
    assert ok, RESULTS[5]


def test_6_circle_topology():
    t0 = time.perf_counter()
    d = H.compute_persistence(C.build_cech(circle_cloud(), M.euclidean(3), 2))
    bars = d.bars(1)
    pers = np.sort(bars[:, 1] - bars[:, 0])[::-1]
    dominant = len(pers) >= 1 and (len(pers) == 1 or pers[0] >= 5 * pers[1])
    pinned = len(bars) >= 1 and abs(bars[np.argmax(bars[:, 1] - bars[:, 0]), 0] - CIRCLE_H1[0]) < 1e-8 \
        and abs(bars[np.argmax(bars[:, 1] - bars[:, 0]), 1] - CIRCLE_H1[1]) < 1e-8
    elapsed = time.perf_counter() - t0
    ratio = math.inf if len(pers) == 1 else (pers[0] / pers[1] if len(pers) > 1 else 0.0)
    ok = _record(6, "circle topology", dominant and pinned,
                 f"{len(bars)} H1 bar(s), top bar {tuple(round(float(x), 8) for x in bars[0]) if len(bars) else None}, "
                 f"dominance ratio {ratio}", elapsed, 10.0)
    assert ok, RESULTS[6]


def test_7_minimax_solver():
    t0 = time.perf_counter()
    worst_e = 0.0
    for s in range(100):
        rng = np.random.default_rng(s)
        n = 2 + s % 2
        P = rng.normal(size=(int(rng.integers(2, 7)), n)) * rng.uniform(0.5, 5)
        r = G.enclosing_radius(M.euclidean(n), P).radius
        worst_e = max(worst_e, abs(r - oracles.smallest_enclosing_ball(P)[1]))
    worst = {}
    for name, F in (("burg", M.burg(2)), ("fisher", M.fisher(2)), ("alpha_randers", M.figure4_randers(2))):
        w = 0.0
        for s in range(100):
            rng = np.random.default_rng(1000 + s)
            P = np.exp(rng.uniform(np.log(0.3), np.log(5), size=(int(rng.integers(2, 6)), 2)))
            r = G.enclosing_radius(F, P).radius
            terms = oracles.vectorised_terms(F.func, P)
            span = float(np.max(P.max(0) - P.min(0)))
            _, v, _ = oracles.grid_minimax(lambda W: terms(W).max(axis=1), P.min(0) - span, P.max(0) + span,
                                            nodes=201, window=10)
            w = max(w, abs(r - v))
        worst[name] = w
    elapsed = time.perf_counter() - t0
    ok = _record(7, "minimax solver accuracy", worst_e <= 1e-6 and all(v <= 1e-3 for v in worst.values()),
                 f"max |err| vs exact Euclidean ball {worst_e:.1e} (tol 1e-6); vs grid oracle "
                 + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (tol 1e-3)", elapsed, 120.0)
    assert ok, RESULTS[7]


def test_8_stability():
    t0 = time.perf_counter()
    cloud = circle_cloud()
    table = defaultdict(lambda: [0, 0, 0.0, 0])
    for name in M.BUILTIN_NAMES:
        F = M.metric_from_config({"name": name, "dimension": 3})
        for kind in ("rips", "delta", "cech_forward"):
            row = table[(name, kind)]
            for seed in range(100):
                for rec in S.stability_trial(cloud, F, 0.01, kind, 2, seed, dims=(0, 1), slack=1e-9):
                    row[0] += 1
                    row[1] += not rec.passed
                    if rec.gh_bound > 0:
                        row[2] = max(row[2], rec.d_b / rec.gh_bound)
                    row[3] += rec.d_b <= 2 * rec.gh_bound + 1e-9
    elapsed = time.perf_counter() - t0
    violations = sum(r[1] for r in table.values())
    total = sum(r[0] for r in table.values())
    lines = [f"{n}/{k}: {r[1]}/{r[0]} violations, max d_b/(dis/2) {r[2]:.3f}, "
             f"within dis(C) {r[3]}/{r[0]}" for (n, k), r in table.items()]
    print("\n".join("    " + s for s in lines))
    ok = _record(8, "stability d_b <= dis(C_id)/2", violations == 0,
                 f"{violations}/{total} violating records; worst ratio "
                 f"{max(r[2] for r in table.values()):.3f}; bound d_b <= dis(C_id) held in "
                 f"{sum(r[3] for r in table.values())}/{total}", elapsed, 600.0)
    assert ok, RESULTS[8] + "\n" + "\n".join(lines)


def test_9_exact_gh():
    t0 = time.perf_counter()
    bad = []
    E1 = M.euclidean(1)
    for seed in range(20):
        rng = np.random.default_rng(seed)
        delta = float(rng.uniform(0.01, 3.0))
        X = C.PointCloud([[0.0], [1.0]])
        Y = C.PointCloud([[0.0], [1.0 + delta]])
        got = S.gromov_hausdorff_exact(X, Y, E1)
        if got != ((1.0 + delta) - 1.0) / 2:
            bad.append(("line", seed, got, delta / 2))
        F = M.metric_from_config({"name": M.BUILTIN_NAMES[seed % 4], "dimension": 2})
        Z = random_cloud(F, 2 + seed % 3, seed)
        if S.gromov_hausdorff_exact(Z, Z, F) != 0.0:
            bad.append(("identical", seed))
    elapsed = time.perf_counter() - t0
    ok = _record(9, "exact Gromov-Hausdorff", not bad,
                 f"{len(bad)} mismatches over 20 line-pair and 20 identical-cloud instances", elapsed, 30.0)
    assert ok, (RESULTS[9], bad)
