"""Small Burg balls are convex; large Itakura–Saito sublevel sets are not.

The Burg distance from 1 is |log x|, so its balls are images of Euclidean balls
under exp and stay convex up to radius 1.  The Itakura–Saito divergence from 1,
sum(log y + 1/y - 1), has a sublevel set that stops being convex once the level
passes 2 log 2 - 1.

Run: python demos/convexity.py
"""
import math

import numpy as np

from finsler_tda import convexity_probe
from finsler_tda.geometry import levelset_curvature_sign


def burg_ball(rho):
    def member(X):
        pos = np.all(X > 0, axis=1)
        Z = np.where(pos[:, None], X, 1.0)
        return pos & (np.linalg.norm(np.log(Z), axis=1) <= rho)
    return member


def is_sublevel(r2):
    def member(Y):
        pos = np.all(Y > 0, axis=1)
        Z = np.where(pos[:, None], Y, 1.0)
        return pos & (np.sum(np.log(Z) + 1.0 / Z - 1.0, axis=1) <= r2)
    return member


print("Burg balls around (1, 1):")
for rho in (0.25, 0.5, 1.0, 2.0):
    rep = convexity_probe(burg_ball(rho), np.ones(2), pairs=5000, seed=1,
                          lower_bound=1e-12, vectorized=True)
    print(f"  rho = {rho:<4}  violations {rep.violations:>4} / {rep.pairs}")

threshold = 2 * math.log(2) - 1
print(f"\nItakura–Saito sublevel sets, threshold 2 log 2 - 1 = {threshold:.4f}:")
for r2 in (0.3, 0.38, 0.5, 1.0):
    rep = convexity_probe(is_sublevel(r2), np.ones(2), pairs=5000, seed=1,
                          lower_bound=1e-12, vectorized=True)
    line = f"  r^2 = {r2:<5} violations {rep.violations:>4} / {rep.pairs}"
    if rep.witness is not None:
        a, b, s = rep.witness
        line += f"   e.g. chord {np.round(a, 3)} -> {np.round(b, 3)} leaves at s = {s:.2f}"
    print(line)

# Each coordinate term log y + 1/y - 1 is convex only for y <= 2, so the
# indicator det(H)/|grad|^4 changes sign as y1 crosses 2.
f = lambda y: float(np.sum(np.log(y) + 1.0 / y - 1.0))
print("\ncurvature indicator of the divergence along y2 = 1:")
for y1 in (0.5, 1.5, 2.0, 3.0):
    print(f"  y = ({y1}, 1)  {levelset_curvature_sign(f, np.array([y1, 1.0])):+.4f}")
