"""Vietoris-Rips persistence for planar point clouds, dimensions 0 and 1.

Edges enter at their Euclidean length, triangles at their longest edge (flag
complex).  Dimension 0 is a union-find sweep over edges; dimension 1 pairs
cycle-creating edges with triangles by reducing the triangle boundary matrix
over Z/2 (columns as sets of edge positions in filtration order).  Essential
classes are capped at the maximal scale and flagged; zero-length bars are
discarded.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from ..barcode import Bar, Barcode
from ..ulbp import PointCloud
from .cubical import _MergeForest

#: max_scale sentinel: use the maximal pairwise distance, which guarantees a
#: complete flag 2-skeleton and hence no essential 1-cycles.
AUTO = "auto"


def distance_matrix(points: np.ndarray) -> np.ndarray:
    dx = points[:, 0][:, None] - points[:, 0][None, :]
    dy = points[:, 1][:, None] - points[:, 1][None, :]
    return np.sqrt(dx * dx + dy * dy)


def rips_persistence(cloud: PointCloud, max_scale: float | str = AUTO) -> tuple[Barcode, Barcode]:
    """Barcodes of the Vietoris-Rips filtration up to ``max_scale``.

    All points are born at 0; dim-0 deaths are the positive minimum spanning
    edge lengths, with one capped essential bar per component left at
    ``max_scale``.  An empty cloud yields two empty barcodes.
    """
    n = len(cloud.points)
    if n == 0:
        return Barcode(0, ()), Barcode(1, ())
    pts = np.asarray(cloud.points, dtype=np.float64)
    dmat = distance_matrix(pts)
    if max_scale == AUTO:
        cap = float(dmat.max()) if n >= 2 else 0.0
    else:
        cap = float(max_scale)
        if cap < 0:
            raise ValueError(f"max_scale must be nonnegative, got {max_scale}")

    ii, jj = np.triu_indices(n, k=1)
    dd = dmat[ii, jj]
    keep = dd <= cap
    ii, jj, dd = ii[keep], jj[keep], dd[keep]
    order = np.lexsort((jj, ii, dd))
    ii, jj, dd = ii[order], jj[order], dd[order]

    # dim 0: merge sweep; non-merging edges create 1-cycles
    forest = _MergeForest([0.0] * n)
    h0: list[Bar] = []
    creators: list[int] = []
    for pos in range(len(dd)):
        dying = forest.union(int(ii[pos]), int(jj[pos]), keep_min_birth=True)
        if dying is None:
            creators.append(pos)
        elif dd[pos] > 0.0:
            h0.append(Bar(0.0, float(dd[pos])))
    n_components = len({forest.find(v) for v in range(n)})
    h0.extend(Bar(0.0, cap, essential=True) for _ in range(n_components))

    h1 = _h1_bars(ii, jj, dd, n, cap, creators)
    return Barcode(0, tuple(h0)), Barcode(1, tuple(h1))


def _h1_bars(ii, jj, dd, n: int, cap: float, creators: list[int]) -> list[Bar]:
    if n < 3 or len(dd) == 0:
        return [Bar(float(dd[p]), cap, essential=True) for p in creators]

    edge_pos = -np.ones((n, n), dtype=np.int64)
    edge_pos[ii, jj] = np.arange(len(dd))
    edge_pos[jj, ii] = edge_pos[ii, jj]

    # flag triangles: all three edges present within the scale cap
    tris: list[tuple[float, int, int, int]] = []
    for a, b, c in combinations(range(n), 3):
        pab, pac, pbc = edge_pos[a, b], edge_pos[a, c], edge_pos[b, c]
        if pab < 0 or pac < 0 or pbc < 0:
            continue
        tris.append((max(float(dd[pab]), float(dd[pac]), float(dd[pbc])), a, b, c))
    tris.sort()

    lows: dict[int, frozenset[int]] = {}
    pairs: list[tuple[int, float]] = []
    for tval, a, b, c in tris:
        col = {int(edge_pos[a, b]), int(edge_pos[a, c]), int(edge_pos[b, c])}
        while col:
            low = max(col)
            other = lows.get(low)
            if other is None:
                break
            col ^= other
        if col:
            lows[low] = frozenset(col)
            pairs.append((low, tval))

    paired = set()
    bars: list[Bar] = []
    for low, tval in pairs:
        paired.add(low)
        birth = float(dd[low])
        if tval > birth:
            bars.append(Bar(birth, tval))
    bars.extend(Bar(float(dd[p]), cap, essential=True)
                for p in creators if p not in paired)
    return bars
