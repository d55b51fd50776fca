"""Persistent homology over GF(2) and the bottleneck distance.

Boundary columns are stored as Python integers used as bit sets, so adding
two columns is a single XOR and the pivot is ``bit_length() - 1``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .complexes import FilteredComplex
from .errors import InfiniteMismatch, InvalidFiltration


@dataclass
class PersistenceDiagram:
    """Bars ``(dim, birth, death)``; ``death`` may be ``inf``.

    ``pairs`` holds the simplex indices ``(birth, death or -1)`` behind each
    bar in the raw output; zero-length bars are kept here and dropped by
    :meth:`finite_bars` / :meth:`exported`.
    """

    dims: np.ndarray
    births: np.ndarray
    deaths: np.ndarray
    kind: str = ""
    pairs: list = field(default_factory=list, repr=False)

    def __len__(self):
        return len(self.dims)

    def bars(self, dim: int, drop_zero: bool = True) -> np.ndarray:
        """(m, 2) array of (birth, death) in dimension ``dim``."""
        mask = self.dims == dim
        if drop_zero:
            mask &= self.deaths > self.births
        out = np.column_stack([self.births[mask], self.deaths[mask]])
        return out[np.lexsort((out[:, 1], out[:, 0]))] if len(out) else out.reshape(0, 2)

    def exported(self) -> "PersistenceDiagram":
        keep = self.deaths > self.births
        order = np.lexsort((self.deaths[keep], self.births[keep], self.dims[keep]))
        return PersistenceDiagram(self.dims[keep][order], self.births[keep][order],
                                  self.deaths[keep][order], self.kind)

    def betti(self, eps: float, dim: int) -> int:
        """Number of bars alive at ``eps`` (birth <= eps < death)."""
        m = (self.dims == dim) & (self.births <= eps) & (eps < self.deaths)
        return int(np.count_nonzero(m))

    @classmethod
    def from_bars(cls, bars, kind: str = "") -> "PersistenceDiagram":
        bars = list(bars)
        if not bars:
            return cls(np.zeros(0, int), np.zeros(0), np.zeros(0), kind)
        d, b, e = zip(*bars)
        return cls(np.asarray(d, int), np.asarray(b, float), np.asarray(e, float), kind)


def boundary_columns(cx: FilteredComplex) -> list:
    """GF(2) boundary columns as int bit sets over simplex positions.

    Raises :class:`InvalidFiltration` if a face is missing, enters later
    than its coface, or comes after it in the order.
    """
    index = {s: i for i, s in enumerate(cx.simplices)}
    cols = []
    for j, s in enumerate(cx.simplices):
        col = 0
        if len(s) > 1:
            for r in range(len(s)):
                face = s[:r] + s[r + 1:]
                i = index.get(face)
                if i is None:
                    raise InvalidFiltration(f"face {face} of {s} is missing")
                if i >= j or cx.values[i] > cx.values[j]:
                    raise InvalidFiltration(f"face {face} does not precede {s}")
                col |= 1 << i
        cols.append(col)
    if np.any(np.diff(cx.values) < 0):
        raise InvalidFiltration("filtration values are not sorted")
    return cols


def reduce_pairs(cx: FilteredComplex, clearing: bool = True) -> tuple:
    """Standard column reduction; returns ``(pairs, essential)`` simplex indices.

    With ``clearing`` the columns are processed from the top dimension down and
    columns of simplices already known to be positive are zeroed first (the
    twist optimisation).  The resulting pairing is the same either way.
    """
    cols = boundary_columns(cx)
    dims = [len(s) - 1 for s in cx.simplices]
    n = len(cols)
    low_to_col = {}
    cleared = set()
    order = range(n)
    if clearing:
        order = sorted(range(n), key=lambda j: (-dims[j], j))
    for j in order:
        if j in cleared:
            cols[j] = 0
            continue
        c = cols[j]
        while c:
            low = c.bit_length() - 1
            k = low_to_col.get(low)
            if k is None:
                break
            c ^= cols[k]
        cols[j] = c
        if c:
            low = c.bit_length() - 1
            low_to_col[low] = j
            if clearing:
                cleared.add(low)
    pairs = sorted((low, j) for low, j in low_to_col.items())
    paired = set(low_to_col) | set(low_to_col.values())
    essential = [j for j in range(n) if j not in paired and cols[j] == 0]
    return pairs, essential


def compute_persistence(cx: FilteredComplex, clearing: bool = True) -> PersistenceDiagram:
    """Persistence diagram of a filtered complex over GF(2).

    Bars in dimension ``max_dim`` are omitted: their deaths would need
    ``(max_dim + 1)``-simplices that the complex does not contain.
    """
    pairs, essential = reduce_pairs(cx, clearing)
    bars, raw = [], []
    top = max((len(s) - 1 for s in cx.simplices), default=0)
    cap = cx.max_dim if cx.max_dim is not None else top
    for b, d in pairs:
        dim = len(cx.simplices[b]) - 1
        bars.append((dim, cx.values[b], cx.values[d]))
        raw.append((b, d))
    for b in essential:
        dim = len(cx.simplices[b]) - 1
        if dim < cap or cap == 0:
            bars.append((dim, cx.values[b], math.inf))
            raw.append((b, -1))
    dgm = PersistenceDiagram.from_bars(bars, cx.kind)
    dgm.pairs = raw
    return dgm


def _rank_gf2(rows: list) -> int:
    """Rank of a GF(2) matrix given as int bit-set rows (Gaussian elimination)."""
    pivots = {}
    rank = 0
    for r in rows:
        while r:
            top = r.bit_length() - 1
            if top in pivots:
                r ^= pivots[top]
            else:
                pivots[top] = r
                rank += 1
                break
    return rank


def betti_at(cx: FilteredComplex, eps: float, k: int) -> int:
    """Betti number ``b_k`` of the subcomplex at ``eps`` by boundary ranks.

    ``b_k = n_k - rank d_k - rank d_{k+1}``.  This does not use the reduction,
    so it serves as an independent check on :func:`compute_persistence`.
    """
    boundary_columns(cx)
    sub = [s for s, v in zip(cx.simplices, cx.values) if v <= eps]
    by_dim = {}
    for s in sub:
        by_dim.setdefault(len(s) - 1, []).append(s)

    def rank_boundary(d):
        if d == 0 or d not in by_dim or d - 1 not in by_dim:
            return 0
        index = {s: i for i, s in enumerate(by_dim[d - 1])}
        rows = []
        for s in by_dim[d]:
            r = 0
            for j in range(len(s)):
                r |= 1 << index[s[:j] + s[j + 1:]]
            rows.append(r)
        return _rank_gf2(rows)

    n_k = len(by_dim.get(k, []))
    return n_k - rank_boundary(k) - rank_boundary(k + 1)


# ---------------------------------------------------------------------------
# bottleneck distance


def _linf(a, b):
    return np.maximum(np.abs(a[:, None, 0] - b[None, :, 0]), np.abs(a[:, None, 1] - b[None, :, 1]))


def _finite_bottleneck(A: np.ndarray, B: np.ndarray) -> float:
    """Exact bottleneck distance between finite diagrams (m, 2) and (l, 2)."""
    m, l = len(A), len(B)
    if m == 0 and l == 0:
        return 0.0
    da = (A[:, 1] - A[:, 0]) / 2.0 if m else np.zeros(0)
    db = (B[:, 1] - B[:, 0]) / 2.0 if l else np.zeros(0)
    # rows: A points then diagonal copies of B; columns: B points then diagonal copies of A
    size = m + l
    cost = np.full((size, size), np.inf)
    if m and l:
        cost[:m, :l] = _linf(A, B)
    cost[:m, l:][np.arange(m), np.arange(m)] = da          # a -> its own diagonal copy
    cost[m:, :l][np.arange(l), np.arange(l)] = db          # diagonal copy of b -> b
    cost[m:, l:] = 0.0                                     # diagonal to diagonal is free
    cands = np.unique(np.concatenate([[0.0], cost[np.isfinite(cost)].ravel()]))

    def feasible(r):
        adj = csr_matrix((cost <= r).astype(np.int8))
        match = maximum_bipartite_matching(adj, perm_type="column")
        return bool(np.all(match >= 0))

    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo])


def bottleneck_distance(a: PersistenceDiagram, b: PersistenceDiagram, dim: int) -> float:
    """Bottleneck distance in homology dimension ``dim``.

    Essential bars are matched only among themselves (in sorted order of
    birth, which is optimal on a line); a different number of essential bars
    raises :class:`InfiniteMismatch`.
    """
    A, B = a.bars(dim, drop_zero=True), b.bars(dim, drop_zero=True)
    Ainf, Binf = np.isinf(A[:, 1]), np.isinf(B[:, 1])
    if Ainf.sum() != Binf.sum():
        raise InfiniteMismatch(
            f"{int(Ainf.sum())} vs {int(Binf.sum())} essential bars in dimension {dim}: distance is infinite")
    ess = 0.0
    if Ainf.any():
        ess = float(np.max(np.abs(np.sort(A[Ainf, 0]) - np.sort(B[Binf, 0]))))
    return max(ess, _finite_bottleneck(A[~Ainf], B[~Binf]))
