"""Sublevel cubical persistence on 2D grayscale grids, dimensions 0 and 1.

Pixels are vertices; an edge or square takes the max of its incident pixel
intensities, so the complex at threshold t is the full subcomplex induced by
pixels with intensity <= t.

Dimension 0 is a merge sweep over grid edges in increasing value (elder
rule: the younger component dies).  Dimension 1 uses the planar dual: a
1-cycle encloses a region of not-yet-active squares, so its bar corresponds
to a component of the complement face graph (squares plus the outer face)
swept in decreasing value.  A bar (b, d) appears when the enclosing region
separates from the outer face at b and fills at its maximal square value d.
Both sweeps produce the canonical barcode of the filtration; zero-length
bars are discarded.
"""

from __future__ import annotations

import numpy as np

from ..barcode import Bar, Barcode
from ..imaging import GrayImage


class _MergeForest:
    """Union-find with per-component birth tracking."""

    __slots__ = ("parent", "birth")

    def __init__(self, births):
        self.parent = list(range(len(births)))
        self.birth = list(births)

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int, keep_min_birth: bool) -> float | None:
        """Merge the components of a and b; return the dying birth, or None.

        With ``keep_min_birth`` the min-birth root survives (sublevel sweep),
        otherwise the max-birth root survives (superlevel dual sweep).
        """
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return None
        ba, bb = self.birth[ra], self.birth[rb]
        if (ba <= bb) == keep_min_birth:
            survivor, dying = ra, rb
        else:
            survivor, dying = rb, ra
        self.parent[dying] = survivor
        return self.birth[dying]


def _grid_edges(values: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All 4-neighbor edges as (u, v, value) with value = max endpoint."""
    h, w = values.shape
    idx = np.arange(h * w).reshape(h, w)
    us = [idx[:, :-1].ravel(), idx[:-1, :].ravel()]
    vs = [idx[:, 1:].ravel(), idx[1:, :].ravel()]
    vals = [np.maximum(values[:, :-1], values[:, 1:]).ravel(),
            np.maximum(values[:-1, :], values[1:, :]).ravel()]
    return np.concatenate(us), np.concatenate(vs), np.concatenate(vals)


def _h0_bars(values: np.ndarray) -> list[Bar]:
    flat = values.ravel()
    u, v, ev = _grid_edges(values)
    order = np.argsort(ev, kind="stable")
    forest = _MergeForest(flat.tolist())
    bars: list[Bar] = []
    for k in order.tolist():
        death = float(ev[k])
        dying_birth = forest.union(int(u[k]), int(v[k]), keep_min_birth=True)
        if dying_birth is not None and death > dying_birth:
            bars.append(Bar(dying_birth, death))
    # the full grid is connected: exactly one essential component
    bars.append(Bar(float(flat.min()), float(flat.max()), essential=True))
    return bars


def _h1_bars(values: np.ndarray) -> list[Bar]:
    h, w = values.shape
    if h < 2 or w < 2:
        return []
    sq = np.maximum(np.maximum(values[:-1, :-1], values[:-1, 1:]),
                    np.maximum(values[1:, :-1], values[1:, 1:]))
    omega = (h - 1) * (w - 1)  # outer face, never filled

    # each primal edge is a passage between its two incident faces,
    # opening once the edge leaves the complex (threshold below its value)

    # horizontal edges (r,c)-(r,c+1): faces above (r-1,c) and below (r,c)
    rr, cc = np.mgrid[0:h, 0:w - 1]
    up = np.where(rr >= 1, (rr - 1) * (w - 1) + cc, omega)
    down = np.where(rr <= h - 2, rr * (w - 1) + cc, omega)
    val_h = np.maximum(values[:, :-1], values[:, 1:])
    # vertical edges (r,c)-(r+1,c): faces left (r,c-1) and right (r,c)
    rr, cc = np.mgrid[0:h - 1, 0:w]
    left = np.where(cc >= 1, rr * (w - 1) + (cc - 1), omega)
    right = np.where(cc <= w - 2, rr * (w - 1) + cc, omega)
    val_v = np.maximum(values[:-1, :], values[1:, :])

    a = np.concatenate([up.ravel(), left.ravel()])
    b = np.concatenate([down.ravel(), right.ravel()])
    conn_val = np.concatenate([val_h.ravel(), val_v.ravel()])

    order = np.argsort(-conn_val, kind="stable")
    forest = _MergeForest(sq.ravel().tolist() + [np.inf])
    bars: list[Bar] = []
    a_list, b_list, v_list = a.tolist(), b.tolist(), conn_val.tolist()
    for k in order.tolist():
        birth = v_list[k]
        dying_death = forest.union(a_list[k], b_list[k], keep_min_birth=False)
        if dying_death is not None and dying_death > birth:
            bars.append(Bar(birth, dying_death))
    return bars


def cubical_persistence(img: GrayImage) -> tuple[Barcode, Barcode]:
    """Barcodes of the sublevel filtration of an image, dims 0 and 1.

    The single dim-0 essential class is capped at the max intensity and
    flagged; a full 2D grid admits no essential 1-cycles.
    """
    values = img.pixels
    return (Barcode(0, tuple(_h0_bars(values))),
            Barcode(1, tuple(_h1_bars(values))))
