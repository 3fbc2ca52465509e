"""Local binary patterns, uniform-pattern taxonomy, landmark selection.

An 8-bit code compares each pixel against its ring of neighbors.  Codes with
at most two circular 0/1 transitions are "uniform": the two flat codes
(all zeros, all ones) plus 56 codes organized as 7 geometries (number of set
bits) x 8 rotations (circular position of the run of ones).  Pixels whose
code matches a chosen geometry/rotation become Vietoris-Rips landmarks.

Bit convention: neighbor index 0 is the top-left pixel, indices proceed
clockwise (top, top-right, right, bottom-right, bottom, bottom-left, left),
and bit 0 is the most significant bit of the code.  Rotation r of geometry g
means the circular run of g ones starts at neighbor index r-1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import GrayImage, zero_pad

# (dy, dx) per neighbor index, clockwise from top-left
NEIGHBOR_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1),
                    (1, 1), (1, 0), (1, -1), (0, -1))

NON_UNIFORM = "non_uniform"
ALL_ZEROS = "all_zeros"
ALL_ONES = "all_ones"
UNIFORM = "uniform"


@dataclass(frozen=True)
class PatternClass:
    kind: str
    geometry: int | None = None
    rotation: int | None = None


@dataclass(frozen=True)
class PointCloud:
    """Landmark pixel coordinates (x = column, y = row), in the unpadded frame."""

    points: tuple[tuple[float, float], ...]
    source_id: str = ""

    def __len__(self) -> int:
        return len(self.points)

    def to_csv(self) -> str:
        return "".join(f"{repr(x)},{repr(y)}\n" for x, y in self.points)

    @classmethod
    def from_csv(cls, text: str, source_id: str = "") -> "PointCloud":
        pts = []
        for line in text.splitlines():
            if line.strip():
                xs, ys = line.split(",")
                pts.append((float(xs), float(ys)))
        return cls(tuple(pts), source_id)


def _rotate_code(code: int) -> int:
    """Shift the neighbor ring one step clockwise (run start index +1 mod 8)."""
    return ((code >> 1) | ((code & 1) << 7)) & 0xFF


def transitions(code: int) -> int:
    """Number of circular 0/1 transitions between adjacent neighbor bits."""
    if not 0 <= code <= 255:
        raise ValueError(f"code {code} outside 0..255")
    return int(bin(code ^ _rotate_code(code)).count("1"))


def classify(code: int) -> PatternClass:
    """Uniform-pattern taxonomy of one code.

    Uniform codes get geometry = popcount and rotation = 1 + the circular
    start index of the run of ones.
    """
    t = transitions(code)
    if t > 2:
        return PatternClass(NON_UNIFORM)
    if t == 0:
        return PatternClass(ALL_ZEROS if code == 0 else ALL_ONES)
    bits = [(code >> (7 - i)) & 1 for i in range(8)]
    start = next(i for i in range(8) if bits[i] == 1 and bits[i - 1] == 0)
    return PatternClass(UNIFORM, geometry=sum(bits), rotation=1 + start)


def lbp_code(img: GrayImage, x: int, y: int) -> int:
    """8-bit neighbor-comparison code at pixel (x, y); bit i set iff neighbor_i >= center.

    The center must be at least one pixel from the border (pad first).
    """
    if not (1 <= x <= img.width - 2 and 1 <= y <= img.height - 2):
        raise IndexError(f"pixel ({x}, {y}) has neighbors outside the {img.width}x{img.height} image")
    center = img.pixels[y, x]
    code = 0
    for i, (dy, dx) in enumerate(NEIGHBOR_OFFSETS):
        if img.pixels[y + dy, x + dx] >= center:
            code |= 1 << (7 - i)
    return code


def code_map(img: GrayImage) -> np.ndarray:
    """LBP code of every pixel after zero-padding by one; shape = image shape."""
    padded = zero_pad(img, 1).pixels
    center = padded[1:-1, 1:-1]
    h, w = center.shape
    codes = np.zeros((h, w), dtype=np.int64)
    for i, (dy, dx) in enumerate(NEIGHBOR_OFFSETS):
        neighbor = padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        codes |= (neighbor >= center).astype(np.int64) << (7 - i)
    return codes


def _taxonomy_tables() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    geo = np.full(256, -1, dtype=np.int64)
    rot = np.full(256, -1, dtype=np.int64)
    uni = np.zeros(256, dtype=bool)
    for code in range(256):
        pc = classify(code)
        if pc.kind == UNIFORM:
            geo[code], rot[code], uni[code] = pc.geometry, pc.rotation, True
    return geo, rot, uni


_GEO, _ROT, _UNIFORM = _taxonomy_tables()


def select_landmarks(img: GrayImage, geometry: int, rotation: int) -> PointCloud:
    """Pixels whose zero-padded LBP code is Uniform(geometry, rotation), row-major.

    Coordinates are reported in the unpadded frame so downstream geometry is
    independent of the padding margin.
    """
    if not 1 <= geometry <= 7:
        raise ValueError(f"geometry {geometry} outside 1..7")
    if not 1 <= rotation <= 8:
        raise ValueError(f"rotation {rotation} outside 1..8")
    codes = code_map(img)
    mask = _UNIFORM[codes] & (_GEO[codes] == geometry) & (_ROT[codes] == rotation)
    ys, xs = np.nonzero(mask)
    return PointCloud(tuple((float(x), float(y)) for x, y in zip(xs, ys)), img.id)


def parse_pattern(token: str) -> tuple[int, int]:
    """Parse a pattern name like ``G4R1`` into (geometry, rotation)."""
    t = token.strip().upper()
    if not t.startswith("G") or "R" not in t:
        raise ValueError(f"bad pattern {token!r}, expected e.g. G4R1")
    g_str, r_str = t[1:].split("R", 1)
    try:
        g, r = int(g_str), int(r_str)
    except ValueError:
        raise ValueError(f"bad pattern {token!r}, expected e.g. G4R1") from None
    if not (1 <= g <= 7 and 1 <= r <= 8):
        raise ValueError(f"pattern {token!r} outside G1..G7 / R1..R8")
    return g, r


def parse_patterns(spec: str) -> list[tuple[int, int]]:
    """Parse a comma-separated pattern list; result sorted lexicographically."""
    patterns = sorted({parse_pattern(tok) for tok in spec.split(",") if tok.strip()})
    if not patterns:
        raise ValueError("empty pattern list")
    return patterns
