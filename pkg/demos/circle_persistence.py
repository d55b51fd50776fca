"""A circle of 13 points has one loop; different metrics see it at different scales.

Run: python demos/circle_persistence.py
"""
import numpy as np

from finsler_tda import (circle_cloud, build_cech, build_delta, build_rips, burg,
                         compute_persistence, euclidean, figure4_randers)


def longest_loop(dgm):
    bars = dgm.bars(1)
    if not len(bars):
        return None
    return bars[np.argmax(bars[:, 1] - bars[:, 0])]


cloud = circle_cloud()
print(f"{len(cloud)} points on a radius-6 circle in 3-space\n")

# Euclidean Čech: the loop is born when neighbouring balls touch (half the chord,
# 6 sin(pi/13)) and dies when the whole circle is covered at the radius.
dgm = compute_persistence(build_cech(cloud, euclidean(3), 2))
b, d = longest_loop(dgm)
print(f"Euclidean Čech   H1 bar [{b:.6f}, {d:.6f})   6 sin(pi/13) = {6 * np.sin(np.pi / 13):.6f}")

# Rips uses the full chord, so the same loop starts at twice the Čech birth.
dgm = compute_persistence(build_rips(cloud, euclidean(3), 2))
b, d = longest_loop(dgm)
print(f"Euclidean Rips   H1 bar [{b:.6f}, {d:.6f})")

# Burg distance depends on ratios of coordinates, so the same geometric loop
# lives at a much smaller scale.
dgm = compute_persistence(build_rips(cloud, burg(3), 2))
b, d = longest_loop(dgm)
print(f"Burg Rips        H1 bar [{b:.6f}, {d:.6f})")

# The Randers metric is asymmetric: Rips takes the longer direction of each
# edge, Δ the average, so Δ sees the loop earlier.
F = figure4_randers(3)
for name, build in (("Rips", build_rips), ("Δ", build_delta)):
    b, d = longest_loop(compute_persistence(build(cloud, F, 2)))
    print(f"Randers {name:<8} H1 bar [{b:.6f}, {d:.6f})")
