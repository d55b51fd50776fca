"""How far do diagrams move under 1% noise, compared with the distortion?

For each metric and complex the script perturbs the 13-point reference circle, measures
the bottleneck distance d_b of the H0 and H1 diagrams, and compares it with
dis(C), the distortion of the identity correspondence.  Čech stays within
dis(C)/2.  Rips and Δ use the full edge length as filtration value, so they can
move by up to dis(C): a two-point cloud shows the factor is sharp.

Run: python demos/stability.py [trials]
"""
import sys

import numpy as np

from finsler_tda import PointCloud, circle_cloud, metric_from_config, stability_trial
from finsler_tda import bottleneck_distance, build_rips, compute_persistence, euclidean

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 20
cloud = circle_cloud()

print(f"{'metric':<14}{'complex':<14}{'max d_b/(dis/2)':>16}{'over dis/2':>12}")
for name in ("euclidean", "burg", "fisher", "alpha_randers"):
    F = metric_from_config({"name": name, "dimension": 3})
    for kind in ("rips", "delta", "cech_forward"):
        ratios, over = [], 0
        for seed in range(trials):
            for rec in stability_trial(cloud, F, 0.01, kind, 2, seed):
                ratios.append(rec.d_b / rec.gh_bound if rec.gh_bound > 0 else 0.0)
                over += not rec.passed
        print(f"{name:<14}{kind:<14}{max(ratios):>16.3f}{over:>8}/{len(ratios)}")

# Two points on a line: stretching the gap by delta moves the H0 bar by delta,
# while half the distortion is delta/2.
delta = 0.1
E = euclidean(1)
X, Y = PointCloud([[0.0], [1.0]]), PointCloud([[0.0], [1.0 + delta]])
d_b = bottleneck_distance(compute_persistence(build_rips(X, E, 1)),
                          compute_persistence(build_rips(Y, E, 1)), 0)
print(f"\ntwo points, gap 1 vs {1 + delta}: d_b(H0) = {d_b:.3f}, dis/2 = {delta / 2:.3f}")
