"""Feature-extractor bridge: image datasets in, descriptor-set files out."""

from .extractors import EXTRACTOR_NAMES, ExtractorConfig, make_extractor
from .manifest import LayoutError, scan_category
from .pipeline import ExtractionSummary, extract_category, extract_image, extract_to_ppf
from .ppfio import write_manifest, write_ppf
from .preprocess import load_image, preprocess, rescale
from .weights import WeightsError, fetch_weights

__version__ = "0.1.0"

__all__ = [
    "EXTRACTOR_NAMES",
    "ExtractionSummary",
    "ExtractorConfig",
    "LayoutError",
    "WeightsError",
    "extract_category",
    "extract_image",
    "extract_to_ppf",
    "fetch_weights",
    "load_image",
    "make_extractor",
    "preprocess",
    "rescale",
    "scan_category",
    "write_manifest",
    "write_ppf",
]
