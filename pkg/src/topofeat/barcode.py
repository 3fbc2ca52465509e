"""Barcode data model: bars, multiset aggregation, bounds, CSV serialization.

A barcode is an ordered list of (birth, death) intervals for one homology
dimension.  Multiplicity is represented by repetition, and aggregation is a
plain concatenation that keeps duplicates and insertion order.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence


class DimensionMismatchError(ValueError):
    """Barcodes of different homology dimensions were combined."""


@dataclass(frozen=True)
class Bar:
    """One persistence interval.

    ``essential`` marks intervals whose death was capped at the filtration
    ceiling rather than observed; for those, ``death`` equals the cap value
    supplied by the persistence engine.
    """

    birth: float
    death: float
    essential: bool = False

    def __post_init__(self) -> None:
        if not (math.isfinite(self.birth) and math.isfinite(self.death)):
            raise ValueError(f"bar endpoints must be finite, got ({self.birth}, {self.death})")
        if self.birth > self.death:
            raise ValueError(f"bar birth {self.birth} exceeds death {self.death}")

    @property
    def persistence(self) -> float:
        return self.death - self.birth


@dataclass(frozen=True)
class Barcode:
    """Ordered multiset of bars in one dimension (0 or 1)."""

    dim: int
    bars: tuple[Bar, ...]

    def __post_init__(self) -> None:
        if self.dim not in (0, 1):
            raise ValueError(f"dim must be 0 or 1, got {self.dim}")
        object.__setattr__(self, "bars", tuple(self.bars))

    @classmethod
    def from_pairs(cls, dim: int, pairs: Iterable[tuple]) -> "Barcode":
        """Build from (birth, death) or (birth, death, essential) tuples."""
        return cls(dim, tuple(Bar(*p) for p in pairs))

    def __len__(self) -> int:
        return len(self.bars)

    def __iter__(self):
        return iter(self.bars)


@dataclass(frozen=True)
class Range:
    """Closed sampling interval [t_min, t_max]."""

    t_min: float
    t_max: float

    def __post_init__(self) -> None:
        if self.t_min > self.t_max:
            raise ValueError(f"empty range ({self.t_min}, {self.t_max})")


#: Sampling domain reported for an empty barcode; downstream grid samplers
#: need a nonempty interval.
EMPTY_BOUNDS = Range(0.0, 1.0)


def aggregate(barcodes: Sequence[Barcode]) -> Barcode:
    """Multiset union of barcodes of one dimension.

    Concatenates the bar lists in input order, keeping all duplicates.
    """
    if not barcodes:
        raise ValueError("aggregate needs at least one barcode")
    dim = barcodes[0].dim
    for b in barcodes:
        if b.dim != dim:
            raise DimensionMismatchError(f"cannot aggregate dim {b.dim} into dim {dim}")
    merged: list[Bar] = []
    for b in barcodes:
        merged.extend(b.bars)
    return Barcode(dim, tuple(merged))


def bounds(barcode: Barcode) -> Range:
    """(min birth, max death) over all bars; ``EMPTY_BOUNDS`` if empty."""
    if not barcode.bars:
        return EMPTY_BOUNDS
    return Range(min(b.birth for b in barcode), max(b.death for b in barcode))


def barcodes_to_csv(barcodes: Iterable[Barcode]) -> str:
    """Serialize barcodes to CSV with header ``dim,birth,death,essential``.

    One bar per row; row order is bar order within each barcode, barcodes in
    input order.  Floats use shortest round-trip notation, booleans are
    ``true``/``false``.
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["dim", "birth", "death", "essential"])
    for barcode in barcodes:
        for bar in barcode:
            writer.writerow([barcode.dim, repr(bar.birth), repr(bar.death),
                             "true" if bar.essential else "false"])
    return out.getvalue()


def barcodes_from_csv(text: str) -> dict[int, Barcode]:
    """Parse the CSV format of :func:`barcodes_to_csv`, one barcode per dim."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["dim", "birth", "death", "essential"]:
        raise ValueError(f"unexpected barcode CSV header: {header!r}")
    bars: dict[int, list[Bar]] = {}
    for row in reader:
        if not row:
            continue
        dim = int(row[0])
        bars.setdefault(dim, []).append(
            Bar(float(row[1]), float(row[2]), row[3] == "true"))
    return {dim: Barcode(dim, tuple(bs)) for dim, bs in bars.items()}
