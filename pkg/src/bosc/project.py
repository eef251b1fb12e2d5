"""The project value: everything one labeling session owns."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .classification import FeatureMatrix
from .mapping import GeoReference
from .raster import ClassMap, ClassSet, RasterImage, SegmentMap
from .segmentation import SegmenterParams

FORMAT_VERSION = 1


@dataclass(frozen=True)
class ClusterParams:
    """Stop rule and preprocessing toggle for the classification engine."""

    k: int | None = 2
    t: float | None = None
    standardize: bool = False


@dataclass
class Project:
    project_id: str
    name: str
    created: int = field(default_factory=lambda: int(time.time()))
    modified: int = field(default_factory=lambda: int(time.time()))
    image: RasterImage | None = None
    segmap: SegmentMap | None = None
    class_set: ClassSet = field(default_factory=ClassSet)
    classmap: ClassMap = field(default_factory=dict)
    georef: GeoReference | None = None
    segmenter_params: SegmenterParams = field(default_factory=SegmenterParams)
    cluster_params: ClusterParams = field(default_factory=ClusterParams)
    features: FeatureMatrix | None = None  # session-only, not persisted

    def touch(self) -> None:
        self.modified = int(time.time())

    def set_image(self, image: RasterImage) -> None:
        """Install source imagery and reset the segment raster to unassigned."""
        self.image = image
        self.segmap = SegmentMap(np.zeros((image.height, image.width), dtype=np.int32))
        self.classmap = {}
        self.features = None
        self.touch()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Project):
            return NotImplemented
        return (
            self.project_id == other.project_id
            and self.name == other.name
            and self.created == other.created
            and self.modified == other.modified
            and self.image == other.image
            and self.segmap == other.segmap
            and self.class_set == other.class_set
            and self.classmap == other.classmap
            and self.georef == other.georef
            and self.segmenter_params == other.segmenter_params
            and self.cluster_params == other.cluster_params
        )
