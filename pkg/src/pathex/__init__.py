"""Region-direct pathomics feature extraction for whole-slide images.

Pipeline: ingest annotations (GeoJSON polygons or label masks), index
objects with a bulk-loaded R-tree, pack them into memory-budgeted batch
slabs, run the vectorized feature kernels (247 features across four
families), and join results back onto the source annotations. A naive
per-object oracle provides ground truth for the batched path.
"""

from .batching import BatchPlan, MemoryBudget, parse_budget, plan_batches
from .engine import MODE_BATCHED, MODE_PER_OBJECT, extract_all
from .geojson import ingest_geojson, parse_geojson
from .index import SpatialIndex, build_index, write_back
from .labelmask import connected_components, load_label_mask
from .manifest import DEFAULT_MANIFEST, FEATURE_COUNT, FeatureManifest
from .model import (
    BoundingBox,
    IntensityPatch,
    ObjectMask,
    ObjectRecord,
    RegionSet,
    bbox_intersects,
    bbox_union,
    mask_area,
)
from .oracle import OracleReport, compare_tables, oracle_features, oracle_query
from .slide import ArraySlide, SlideSource, open_slide, read_patch
from .synthetic import SyntheticSlide, generate_synthetic_slide
from .table import FeatureRow, FeatureTable, load_csv, save_csv

__version__ = "0.1.0"

__all__ = [
    "ArraySlide",
    "BatchPlan",
    "BoundingBox",
    "DEFAULT_MANIFEST",
    "FEATURE_COUNT",
    "FeatureManifest",
    "FeatureRow",
    "FeatureTable",
    "IntensityPatch",
    "MODE_BATCHED",
    "MODE_PER_OBJECT",
    "MemoryBudget",
    "ObjectMask",
    "ObjectRecord",
    "OracleReport",
    "RegionSet",
    "SlideSource",
    "SpatialIndex",
    "SyntheticSlide",
    "bbox_intersects",
    "bbox_union",
    "build_index",
    "compare_tables",
    "connected_components",
    "extract_all",
    "generate_synthetic_slide",
    "ingest_geojson",
    "load_csv",
    "load_label_mask",
    "mask_area",
    "oracle_features",
    "oracle_query",
    "parse_budget",
    "parse_geojson",
    "plan_batches",
    "read_patch",
    "save_csv",
    "write_back",
    "__version__",
]
