"""Image ingestion (PGM, CSV matrix), padding/cropping, synthetic data.

Images are rectangular float64 grids.  Intensities are kept exactly as read;
negative values are allowed (CT-style signed units), so no rescaling happens
anywhere in this module.  The synthetic generator produces two texture
classes that differ in their number of loops (one vs two bright annuli), so
sublevel persistence in dimension one separates them by construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class ImageParseError(ValueError):
    """Malformed image payload; carries a byte offset or row index."""

    def __init__(self, message: str, *, offset: int | None = None, row: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        if row is not None:
            message = f"{message} (row {row})"
        super().__init__(message)
        self.offset = offset
        self.row = row


@dataclass(frozen=True)
class GrayImage:
    """Immutable grayscale image; ``pixels`` is float64 with shape (height, width)."""

    width: int
    height: int
    pixels: np.ndarray
    id: str = ""

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image size must be positive, got {self.width}x{self.height}")
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.shape != (self.height, self.width):
            if arr.size == self.width * self.height:
                arr = arr.reshape(self.height, self.width)
            else:
                raise ValueError(
                    f"pixel count {arr.size} does not match {self.width}x{self.height}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image intensities must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @classmethod
    def from_flat(cls, width: int, height: int, pixels: Sequence[float], id: str = "") -> "GrayImage":
        """Build from a row-major flat pixel list, top-left first."""
        return cls(width, height, np.asarray(pixels, dtype=np.float64), id)

    def flat(self) -> list[float]:
        return [float(v) for v in self.pixels.ravel()]


# ---------------------------------------------------------------------------
# PGM (P2 ASCII / P5 binary)

_PGM_WS = b" \t\r\n"


class _ByteCursor:
    """Token reader over PGM header bytes that tracks the byte offset."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _skip_ws_and_comments(self) -> None:
        while self.pos < len(self.data):
            c = self.data[self.pos:self.pos + 1]
            if c in (b" ", b"\t", b"\r", b"\n"):
                self.pos += 1
            elif c == b"#":
                nl = self.data.find(b"\n", self.pos)
                self.pos = len(self.data) if nl < 0 else nl + 1
            else:
                return

    def token(self) -> tuple[bytes, int]:
        self._skip_ws_and_comments()
        start = self.pos
        if start >= len(self.data):
            raise ImageParseError("unexpected end of PGM header", offset=start)
        end = start
        while end < len(self.data) and self.data[end:end + 1] not in (b" ", b"\t", b"\r", b"\n", b"#"):
            end += 1
        self.pos = end
        return self.data[start:end], start

    def int_token(self, what: str) -> int:
        tok, start = self.token()
        try:
            return int(tok)
        except ValueError:
            raise ImageParseError(f"invalid {what} {tok!r}", offset=start) from None


def load_pgm(data: bytes, id: str = "") -> GrayImage:
    """Parse a P2 (ASCII) or P5 (binary) PGM image, maxval up to 65535.

    Pixels come back row-major, top-left first, exactly as stored.
    """
    cur = _ByteCursor(data)
    magic, magic_off = cur.token()
    if magic not in (b"P2", b"P5"):
        raise ImageParseError(f"not a PGM image (magic {magic!r})", offset=magic_off)
    width = cur.int_token("width")
    height = cur.int_token("height")
    maxval = cur.int_token("maxval")
    if width < 1 or height < 1:
        raise ImageParseError(f"invalid dimensions {width}x{height}", offset=0)
    if not (0 < maxval <= 65535):
        raise ImageParseError(f"maxval {maxval} out of range 1..65535", offset=0)
    count = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates maxval from the payload
        if cur.pos >= len(data) or data[cur.pos:cur.pos + 1] not in (b" ", b"\t", b"\r", b"\n"):
            raise ImageParseError("missing whitespace before P5 payload", offset=cur.pos)
        start = cur.pos + 1
        bytes_per = 1 if maxval < 256 else 2
        need = count * bytes_per
        payload = data[start:start + need]
        if len(payload) < need:
            raise ImageParseError(
                f"truncated P5 payload, expected {need} bytes got {len(payload)}",
                offset=start + len(payload))
        dtype = np.uint8 if bytes_per == 1 else ">u2"
        values = np.frombuffer(payload, dtype=dtype, count=count).astype(np.float64)
        if values.max(initial=0.0) > maxval:
            raise ImageParseError(f"P5 sample exceeds maxval {maxval}", offset=start)
        return GrayImage(width, height, values, id)

    values = np.empty(count, dtype=np.float64)
    for i in range(count):
        tok, off = cur.token()
        try:
            v = int(tok)
        except ValueError:
            raise ImageParseError(f"invalid P2 sample {tok!r}", offset=off) from None
        if not (0 <= v <= maxval):
            raise ImageParseError(f"P2 sample {v} outside 0..{maxval}", offset=off)
        values[i] = v
    return GrayImage(width, height, values, id)


def save_pgm(img: GrayImage, binary: bool = True) -> bytes:
    """Serialize to P5 (binary) or P2 (ASCII).

    Requires nonnegative integer intensities; signed grids go through the
    CSV matrix format instead.
    """
    arr = img.pixels
    if np.any(arr < 0) or np.any(arr != np.floor(arr)):
        raise ValueError("PGM requires nonnegative integer intensities")
    top = int(arr.max(initial=0))
    maxval = 255 if top <= 255 else 65535
    if top > 65535:
        raise ValueError(f"intensity {top} exceeds PGM maxval 65535")
    header = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n{maxval}\n".encode()
    if binary:
        dtype = np.uint8 if maxval < 256 else ">u2"
        return header + arr.astype(dtype).tobytes()
    body = "\n".join(" ".join(str(int(v)) for v in row) for row in arr)
    return header + body.encode() + b"\n"


# ---------------------------------------------------------------------------
# CSV matrix (signed intensities)

def load_csv_matrix(text: str, id: str = "") -> GrayImage:
    """Parse a rectangular comma-separated numeric grid; values may be negative."""
    rows: list[list[float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = [float(tok) for tok in line.split(",")]
        except ValueError:
            raise ImageParseError("non-numeric cell", row=lineno) from None
        if rows and len(row) != len(rows[0]):
            raise ImageParseError(
                f"ragged row of {len(row)} cells, expected {len(rows[0])}", row=lineno)
        rows.append(row)
    if not rows:
        raise ImageParseError("empty CSV matrix", row=1)
    arr = np.asarray(rows, dtype=np.float64)
    return GrayImage(arr.shape[1], arr.shape[0], arr, id)


def save_csv_matrix(img: GrayImage) -> str:
    return "\n".join(",".join(repr(float(v)) for v in row) for row in img.pixels) + "\n"


# ---------------------------------------------------------------------------
# Padding / cropping

def zero_pad(img: GrayImage, margin: int) -> GrayImage:
    """Surround the image with a ``margin``-pixel border of zeros."""
    if margin < 1:
        raise ValueError(f"margin must be a positive integer, got {margin}")
    padded = np.pad(img.pixels, margin, mode="constant", constant_values=0.0)
    return GrayImage(img.width + 2 * margin, img.height + 2 * margin, padded, img.id)


def crop(img: GrayImage, left: int, top: int, width: int, height: int) -> GrayImage:
    """Extract the window with top-left corner (left, top)."""
    if left < 0 or top < 0 or left + width > img.width or top + height > img.height:
        raise ValueError(f"crop window {width}x{height}+{left}+{top} exceeds image bounds")
    return GrayImage(width, height, img.pixels[top:top + height, left:left + width], img.id)


# ---------------------------------------------------------------------------
# Synthetic topologically-labeled textures

SYNTH_CLASSES = ("holes1", "holes2")
_NOISE_HIGH = 40      # background noise range [0, 40]
_RIM_VALUE = 255      # annulus rim intensity
_RIM_HALF_WIDTH = 1.5

_CLASS_CODE = {"holes1": 1, "holes2": 2}


def synth_texture(class_id: str, size: int, seed: int) -> GrayImage:
    """Deterministic labeled texture: one (`holes1`) or two (`holes2`) bright annuli.

    The rims sit at intensity 255 on a noisy dark background (0..40) with the
    annulus interiors left dark, so the sublevel filtration sees one or two
    loops that persist from the noise ceiling up to the rim intensity.
    """
    if class_id not in SYNTH_CLASSES:
        raise ValueError(f"unknown class {class_id!r}, expected one of {SYNTH_CLASSES}")
    if size < 32:
        raise ValueError(f"size must be >= 32, got {size}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, size, _CLASS_CODE[class_id]]))
    grid = rng.integers(0, _NOISE_HIGH + 1, size=(size, size)).astype(np.float64)

    if class_id == "holes1":
        rings = [(size / 2.0, size / 2.0, size / 4.0)]
    else:
        rings = [(size * 0.3, size * 0.3, size * 0.16),
                 (size * 0.7, size * 0.7, size * 0.16)]
    yy, xx = np.mgrid[0:size, 0:size]
    for cx, cy, radius in rings:
        dist = np.sqrt((xx - cx) ** 2 + (yy - cy) ** 2)
        grid[np.abs(dist - radius) <= _RIM_HALF_WIDTH] = _RIM_VALUE
    return GrayImage(size, size, grid, f"{class_id}_{size}_{seed}")


# ---------------------------------------------------------------------------
# Dataset manifest (JSON Lines)

@dataclass(frozen=True)
class ManifestRecord:
    id: str
    label: str
    images: tuple[str, ...]
    split: str | None = None


@dataclass(frozen=True)
class DatasetManifest:
    """One record per subject; exactly two distinct labels per manifest."""

    records: tuple[ManifestRecord, ...]

    def __post_init__(self) -> None:
        ids = [r.id for r in self.records]
        if len(set(ids)) != len(ids):
            raise ValueError("manifest ids must be unique")
        for r in self.records:
            if not r.images:
                raise ValueError(f"record {r.id!r} has no image paths")
            if r.split not in (None, "train", "test"):
                raise ValueError(f"record {r.id!r} has invalid split {r.split!r}")
        labels = {r.label for r in self.records}
        if len(labels) != 2:
            raise ValueError(f"manifest must carry exactly two labels, got {sorted(labels)}")

    def labels(self) -> list[str]:
        return sorted({r.label for r in self.records})


def write_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    """Write JSON Lines, one record per line, keys id/label/images[/split]."""
    with open(path, "w", encoding="utf-8") as fh:
        for r in manifest.records:
            obj: dict = {"id": r.id, "label": r.label, "images": list(r.images)}
            if r.split is not None:
                obj["split"] = r.split
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


def read_manifest(path: str | Path) -> DatasetManifest:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"manifest line {lineno}: {exc}") from None
            try:
                records.append(ManifestRecord(
                    id=str(obj["id"]), label=str(obj["label"]),
                    images=tuple(str(p) for p in obj["images"]),
                    split=obj.get("split")))
            except KeyError as exc:
                raise ValueError(f"manifest line {lineno}: missing field {exc}") from None
    return DatasetManifest(tuple(records))


def load_image_file(path: str | Path, id: str = "") -> GrayImage:
    """Load a .pgm or .csv image by extension."""
    p = Path(path)
    if p.suffix.lower() == ".pgm":
        return load_pgm(p.read_bytes(), id=id or p.stem)
    if p.suffix.lower() == ".csv":
        return load_csv_matrix(p.read_text(encoding="utf-8"), id=id or p.stem)
    raise ValueError(f"unsupported image extension {p.suffix!r} (expected .pgm or .csv)")
