import numpy as np

from topofeat.barcode import Bar, Barcode


def random_barcode(rng: np.random.Generator, dim: int = 1, max_bars: int = 25,
                   lo: float = -5.0, hi: float = 5.0) -> Barcode:
    """Random barcode with positive-length bars, occasionally essential."""
    n = int(rng.integers(0, max_bars + 1))
    bars = []
    for _ in range(n):
        birth = float(rng.uniform(lo, hi))
        length = float(rng.uniform(1e-3, hi - lo))
        essential = bool(rng.random() < 0.1)
        bars.append(Bar(birth, birth + length, essential))
    return Barcode(dim, tuple(bars))
