"""Barcode-to-vector featurizations.

Five methods: Betti curve (bc), persistent statistics (ps), entropy summary
(es), persistence landscapes (pl), and tropical coordinates (tc).  Curve
methods sample a shared grid supplied by the caller so vectors stay
comparable across subjects.  Feature labels follow ``d{dim}_{method}_{idx}``
with a zero-padded index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .barcode import Barcode, Range

DEFAULT_GAMMA = 100
DEFAULT_LEVELS = 5
DEFAULT_TROPICAL_R = 1

METHODS = ("bc", "ps", "es", "pl", "tc")


@dataclass(frozen=True)
class SamplingGrid:
    """``count`` evenly spaced sample points spanning ``range`` inclusively."""

    range: Range
    count: int = DEFAULT_GAMMA

    def __post_init__(self) -> None:
        if self.count < 2:
            raise ValueError(f"grid needs at least 2 samples, got {self.count}")

    def samples(self) -> np.ndarray:
        return np.linspace(self.range.t_min, self.range.t_max, self.count)


@dataclass(frozen=True)
class TropicalConfig:
    r: int = DEFAULT_TROPICAL_R

    def __post_init__(self) -> None:
        if self.r < 1:
            raise ValueError(f"tropical r must be >= 1, got {self.r}")


@dataclass(frozen=True)
class LandscapeConfig:
    levels: int
    grid: SamplingGrid

    def __post_init__(self) -> None:
        if self.levels < 1:
            raise ValueError(f"landscape needs >= 1 level, got {self.levels}")


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(self.labels):
            raise ValueError("values and labels must have equal length")
        if not all(np.isfinite(self.values)):
            raise ValueError("feature values must be finite")

    def __len__(self) -> int:
        return len(self.values)

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


def _labels(dim: int, method: str, n: int) -> tuple[str, ...]:
    return tuple(f"d{dim}_{method}_{i:03d}" for i in range(n))


def _vector(dim: int, method: str, values: np.ndarray) -> FeatureVector:
    vals = tuple(float(v) for v in values)
    return FeatureVector(vals, _labels(dim, method, len(vals)))


def _intervals(b: Barcode) -> tuple[np.ndarray, np.ndarray]:
    births = np.asarray([bar.birth for bar in b], dtype=np.float64)
    deaths = np.asarray([bar.death for bar in b], dtype=np.float64)
    return births, deaths


def betti_curve(b: Barcode, grid: SamplingGrid) -> FeatureVector:
    """Number of bars alive at each sample, with birth <= t < death."""
    t = grid.samples()
    births, deaths = _intervals(b)
    if len(births) == 0:
        return _vector(b.dim, "bc", np.zeros(grid.count))
    alive = (births[:, None] <= t[None, :]) & (t[None, :] < deaths[:, None])
    return _vector(b.dim, "bc", alive.sum(axis=0).astype(np.float64))


def persistent_entropy(b: Barcode) -> float:
    """Shannon entropy of the normalized lifespans, natural log."""
    lifespans = np.asarray([bar.persistence for bar in b], dtype=np.float64)
    total = lifespans.sum()
    if len(lifespans) == 0 or total <= 0.0:
        return 0.0
    frac = lifespans[lifespans > 0] / total
    return float(-(frac * np.log(frac)).sum())


_STAT_NAMES = ("mean", "std", "median", "iqr", "range", "p10", "p25", "p75", "p90")


def _series_stats(x: np.ndarray) -> list[float]:
    p10, p25, p75, p90 = np.percentile(x, [10, 25, 75, 90])
    return [float(x.mean()), float(x.std()), float(np.median(x)),
            float(p75 - p25), float(x.max() - x.min()),
            float(p10), float(p25), float(p75), float(p90)]


def persistent_statistics(b: Barcode) -> FeatureVector:
    """38 summary statistics of a barcode.

    Nine statistics (mean, population std, median, IQR, full range, and the
    10th/25th/75th/90th percentiles with linear interpolation) for each of
    births, deaths, midpoints, lifespans, then the bar count and the
    persistent entropy.  Empty barcodes map to the zero vector.
    """
    births, deaths = _intervals(b)
    if len(births) == 0:
        return _vector(b.dim, "ps", np.zeros(38))
    series = (births, deaths, (births + deaths) / 2.0, deaths - births)
    values = [s for x in series for s in _series_stats(x)]
    values += [float(len(births)), persistent_entropy(b)]
    return _vector(b.dim, "ps", np.asarray(values))


def entropy_summary(b: Barcode, grid: SamplingGrid) -> FeatureVector:
    """Piecewise-constant entropy summary sampled on the grid.

    At each t, sums -(l/L) log(l/L) over bars alive at t (birth <= t < death)
    where L is the total lifespan mass of the whole barcode.
    """
    t = grid.samples()
    births, deaths = _intervals(b)
    lifespans = deaths - births
    total = lifespans.sum()
    if len(births) == 0 or total <= 0.0:
        return _vector(b.dim, "es", np.zeros(grid.count))
    frac = lifespans / total
    terms = np.where(frac > 0, -frac * np.log(np.where(frac > 0, frac, 1.0)), 0.0)
    alive = (births[:, None] <= t[None, :]) & (t[None, :] < deaths[:, None])
    return _vector(b.dim, "es", (terms[:, None] * alive).sum(axis=0))


def landscape(b: Barcode, cfg: LandscapeConfig) -> FeatureVector:
    """Persistence landscape levels 1..k sampled on the grid, level-major.

    Level i at time t is the i-th largest tent value
    max(0, min(t - birth, death - t)) over the bars, or 0 when fewer than i
    bars cover t.
    """
    t = cfg.grid.samples()
    births, deaths = _intervals(b)
    out = np.zeros((cfg.levels, cfg.grid.count))
    if len(births) > 0:
        tents = np.minimum(t[None, :] - births[:, None], deaths[:, None] - t[None, :])
        np.maximum(tents, 0.0, out=tents)
        tents = -np.sort(-tents, axis=0)
        depth = min(cfg.levels, tents.shape[0])
        out[:depth, :] = tents[:depth, :]
    return _vector(b.dim, "pl", out.ravel())


def tropical_coordinates(b: Barcode, cfg: TropicalConfig = TropicalConfig()) -> FeatureVector:
    """Seven symmetric max/min/plus coordinates of the lifespan vector.

    F1..F4 are the largest single/pair/triple/quadruple lifespan sums (short
    barcodes are padded with zero-lifespan intervals at birth 0), F5 the
    total lifespan, F6 sums min(r*lifespan, birth), and F7 sums the gaps to
    the maximal min(r*lifespan, birth) + lifespan.
    """
    births, deaths = _intervals(b)
    if len(births) == 0:
        return _vector(b.dim, "tc", np.zeros(7))
    lam = deaths - births
    top = np.sort(lam)[::-1]
    f1_to_f4 = [float(top[:k].sum()) for k in (1, 2, 3, 4)]
    f5 = float(lam.sum())
    clipped = np.minimum(cfg.r * lam, births)
    f6 = float(clipped.sum())
    m = clipped + lam
    f7 = float((m.max() - m).sum())
    return _vector(b.dim, "tc", np.asarray(f1_to_f4 + [f5, f6, f7]))


def vector_length(method: str, gamma: int, levels: int) -> int:
    """Per-barcode feature length of one method."""
    return {"bc": gamma, "ps": 38, "es": gamma, "pl": levels * gamma, "tc": 7}[method]


def vectorize(b: Barcode, method: str, *, grid: SamplingGrid | None = None,
              levels: int = DEFAULT_LEVELS, r: int = DEFAULT_TROPICAL_R) -> FeatureVector:
    """Dispatch a barcode through one of the five featurizations."""
    if method == "bc":
        return betti_curve(b, _require_grid(grid))
    if method == "ps":
        return persistent_statistics(b)
    if method == "es":
        return entropy_summary(b, _require_grid(grid))
    if method == "pl":
        return landscape(b, LandscapeConfig(levels, _require_grid(grid)))
    if method == "tc":
        return tropical_coordinates(b, TropicalConfig(r))
    raise ValueError(f"unknown vectorizer {method!r}, expected one of {METHODS}")


def _require_grid(grid: SamplingGrid | None) -> SamplingGrid:
    if grid is None:
        raise ValueError("this vectorizer requires a sampling grid")
    return grid
