"""BOSC: a client-server workbench for labeling aerial imagery.

Backend library: automatic segmentation with interactive mask editing,
unsupervised hierarchical classification with optional seed labels, and
3-control-point affine georeferencing with Web Mercator map overlay.
"""

from . import errors
from .raster import (
    ClassDef,
    ClassSet,
    RasterImage,
    SegmentInfo,
    SegmentMap,
    connected_components,
    rebuild_registry,
    validate,
)
from .segmentation import (
    BrushStroke,
    SegmenterParams,
    create_segment_from_polygon,
    fill_unassigned,
    ingest_external_mask,
    merge_segments,
    paint,
    segment_auto,
)
from .classification import (
    Dendrogram,
    FeatureMatrix,
    assign_classes,
    cluster,
    default_classification,
    extract_features,
    ingest_external_features,
    set_class,
)
from .mapping import (
    AffineTransform,
    ControlPointPair,
    GeoReference,
    apply_affine,
    compose,
    estimate_affine,
    export_geojson,
    invert_affine,
    latlon_to_world_px,
    render_overlay_tile,
    trace_segment_rings,
    world_px_to_latlon,
)
from .stats import (
    ClassStat,
    ClassStats,
    class_histogram,
    compute_stats,
    ground_resolution,
    segment_areas_m2,
    stats_to_dict,
)
from .project import ClusterParams, Project
from .store import (
    export_bundle,
    label_image,
    load_project,
    read_segment_raster,
    save_project,
    write_segment_raster,
)

FORMAT_VERSION = 1

__all__ = [
    "errors",
    "FORMAT_VERSION",
    # raster core
    "ClassDef",
    "ClassSet",
    "RasterImage",
    "SegmentInfo",
    "SegmentMap",
    "connected_components",
    "rebuild_registry",
    "validate",
    # segmentation
    "BrushStroke",
    "SegmenterParams",
    "create_segment_from_polygon",
    "fill_unassigned",
    "ingest_external_mask",
    "merge_segments",
    "paint",
    "segment_auto",
    # classification
    "Dendrogram",
    "FeatureMatrix",
    "assign_classes",
    "cluster",
    "default_classification",
    "extract_features",
    "ingest_external_features",
    "set_class",
    # mapping
    "AffineTransform",
    "ControlPointPair",
    "GeoReference",
    "apply_affine",
    "compose",
    "estimate_affine",
    "export_geojson",
    "invert_affine",
    "latlon_to_world_px",
    "render_overlay_tile",
    "trace_segment_rings",
    "world_px_to_latlon",
    # stats
    "ClassStat",
    "ClassStats",
    "class_histogram",
    "compute_stats",
    "ground_resolution",
    "segment_areas_m2",
    "stats_to_dict",
    # project + store
    "ClusterParams",
    "Project",
    "export_bundle",
    "label_image",
    "load_project",
    "read_segment_raster",
    "save_project",
    "write_segment_raster",
]
