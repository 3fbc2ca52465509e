"""topofeat: persistence barcodes from 2D grayscale images and their
vectorizations, with a barcode-aggregation vs feature-concatenation
classification harness."""

__version__ = "0.1.0"

from .barcode import Bar, Barcode, Range, aggregate, bounds
from .imaging import GrayImage, load_csv_matrix, load_pgm, synth_texture, zero_pad
from .persistence import cubical_persistence, rips_persistence
from .ulbp import PointCloud, classify, lbp_code, select_landmarks
from .vectorize import (SamplingGrid, betti_curve, entropy_summary, landscape,
                        persistent_statistics, tropical_coordinates)

__all__ = [
    "__version__",
    "Bar", "Barcode", "Range", "aggregate", "bounds",
    "GrayImage", "load_csv_matrix", "load_pgm", "synth_texture", "zero_pad",
    "cubical_persistence", "rips_persistence",
    "PointCloud", "classify", "lbp_code", "select_landmarks",
    "SamplingGrid", "betti_curve", "entropy_summary", "landscape",
    "persistent_statistics", "tropical_coordinates",
]
