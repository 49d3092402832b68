"""Image-side tooling: turn face images plus a labels file into the feature
matrices, manifest, and mated-comparison CSV consumed by neutral-gate."""

from .featio import write_manifest, write_matrix
from .pipeline import ExtractionJob, ExtractError, extract_comparisons, extract_features

__all__ = [
    "ExtractionJob",
    "ExtractError",
    "extract_comparisons",
    "extract_features",
    "write_manifest",
    "write_matrix",
]

__version__ = "0.1.0"
