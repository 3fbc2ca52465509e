"""Brute-force verification oracles, kept independent of the engines.

Each oracle recomputes a quantity the persistence engines also produce, via
a different route: Betti numbers by explicit cell counting and the Euler
formula, dim-0 Rips deaths by Prim's spanning tree, and Rips pairs by a
dense textbook reduction of the full boundary matrix with no optimizations.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from ..imaging import GrayImage
from ..ulbp import PointCloud
from . import rips as _rips


def _dsu_root(parent: dict, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def oracle_betti_cubical(img: GrayImage, t: float) -> tuple[int, int]:
    """(beta0, beta1) of the sublevel complex at threshold t.

    Builds the explicit active cell sets (vertices with intensity <= t,
    edges/squares with all corners active), counts components by union-find
    over active edges, and recovers beta1 from the Euler characteristic
    beta0 - beta1 = V - E + F of a 2-complex.
    """
    values = img.pixels
    h, w = values.shape
    active = values <= t
    verts = [(r, c) for r in range(h) for c in range(w) if active[r, c]]
    edges = []
    for r in range(h):
        for c in range(w):
            if not active[r, c]:
                continue
            if c + 1 < w and active[r, c + 1]:
                edges.append(((r, c), (r, c + 1)))
            if r + 1 < h and active[r + 1, c]:
                edges.append(((r, c), (r + 1, c)))
    n_squares = sum(
        1
        for r in range(h - 1)
        for c in range(w - 1)
        if active[r, c] and active[r, c + 1] and active[r + 1, c] and active[r + 1, c + 1]
    )
    parent = {v: v for v in verts}
    for a, b in edges:
        ra, rb = _dsu_root(parent, a), _dsu_root(parent, b)
        if ra != rb:
            parent[ra] = rb
    beta0 = sum(1 for v in verts if _dsu_root(parent, v) == v)
    euler = len(verts) - len(edges) + n_squares
    return beta0, beta0 - euler


def oracle_rips_h0(cloud: PointCloud) -> list[float]:
    """Minimum-spanning-tree edge lengths via Prim's algorithm, sorted.

    These are the dim-0 death values of the Rips filtration (the engine
    additionally drops the zero-length ones).
    """
    n = len(cloud.points)
    if n < 2:
        raise ValueError("MST oracle needs at least two points")
    pts = cloud.points
    # same arithmetic as the engine's metric so deaths compare exactly
    best = [math.inf] * n
    in_tree = [False] * n
    best[0] = 0.0
    weights: list[float] = []
    for it in range(n):
        u = min((i for i in range(n) if not in_tree[i]), key=lambda i: best[i])
        in_tree[u] = True
        if it > 0:
            weights.append(best[u])
        for v in range(n):
            if not in_tree[v]:
                dx = pts[u][0] - pts[v][0]
                dy = pts[u][1] - pts[v][1]
                d = math.sqrt(dx * dx + dy * dy)
                if d < best[v]:
                    best[v] = d
    return sorted(weights)


def oracle_rips_reduction(cloud: PointCloud, max_scale: float | str = _rips.AUTO) -> dict:
    """Full-boundary-matrix Rips persistence for small clouds, textbook style.

    Builds every cell (vertices, edges, flag triangles) up to the scale cap,
    sorts by (value, dimension, vertex ids), reduces the dense Z/2 boundary
    matrix column by column, and reads pairs off the lows.  Returns a dict
    with 'h0' and 'h1' lists of (birth, death) pairs (zero-length dropped)
    and 'h0_essential'/'h1_essential' birth lists, plus 'cap'.
    """
    n = len(cloud.points)
    pts = cloud.points

    def dist(i: int, j: int) -> float:
        dx = pts[i][0] - pts[j][0]
        dy = pts[i][1] - pts[j][1]
        return math.sqrt(dx * dx + dy * dy)

    dists = {(i, j): dist(i, j) for i, j in combinations(range(n), 2)}
    if max_scale == _rips.AUTO:
        cap = max(dists.values()) if dists else 0.0
    else:
        cap = float(max_scale)

    cells: list[tuple[float, int, tuple[int, ...]]] = [(0.0, 0, (i,)) for i in range(n)]
    for (i, j), d in dists.items():
        if d <= cap:
            cells.append((d, 1, (i, j)))
    for i, j, k in combinations(range(n), 3):
        d = max(dists[(i, j)], dists[(i, k)], dists[(j, k)])
        if d <= cap:
            cells.append((d, 2, (i, j, k)))
    cells.sort()
    index = {cell[2]: pos for pos, cell in enumerate(cells)}

    m = len(cells)
    matrix = np.zeros((m, m), dtype=bool)
    for pos, (_, dim, verts) in enumerate(cells):
        if dim >= 1:
            for face in combinations(verts, dim):
                matrix[index[face], pos] = True

    def low(col: np.ndarray) -> int:
        nz = np.nonzero(col)[0]
        return int(nz[-1]) if len(nz) else -1

    low_owner = [-1] * m
    pair_of = [-1] * m
    for j in range(m):
        l = low(matrix[:, j])
        while l >= 0 and low_owner[l] >= 0:
            matrix[:, j] ^= matrix[:, low_owner[l]]
            l = low(matrix[:, j])
        if l >= 0:
            low_owner[l] = j
            pair_of[l] = j

    result = {"h0": [], "h1": [], "h0_essential": [], "h1_essential": [], "cap": cap}
    for pos, (value, dim, _) in enumerate(cells):
        if dim == 2:
            continue
        key = f"h{dim}"
        if pair_of[pos] >= 0:
            death = cells[pair_of[pos]][0]
            if death > value:
                result[key].append((value, death))
        elif low(matrix[:, pos]) < 0:
            result[key + "_essential"].append(value)
    return result
