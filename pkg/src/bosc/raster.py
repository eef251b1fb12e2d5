"""Core raster data model: source imagery, segment rasters and class tables.

Conventions used package-wide:

* arrays are row-major numpy arrays indexed ``[row, col]``;
* segment id 0 means "unassigned", every positive id present in a raster
  has a registry entry;
* class id 1 is the reserved "default" class rendered opaque white;
* pixel ``(col, row)`` has its center at ``(col + 0.5, row + 0.5)`` in
  continuous image coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatch, RegistryInconsistent, UnknownClass

DEFAULT_CLASS_ID = 1
DEFAULT_CLASS_NAME = "default"
DEFAULT_CLASS_COLOR = (255, 255, 255, 255)

# 4-connectivity structuring element (no diagonals).
_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SegmentInfo:
    """Registry entry: occupancy count and bounding box of one segment."""

    pixel_count: int
    bbox: tuple[int, int, int, int]  # (min_col, min_row, max_col, max_row)


class RasterImage:
    """RGB8 source image, shape ``(height, width, 3)`` uint8."""

    def __init__(self, pixels: np.ndarray):
        pixels = np.asarray(pixels, dtype=np.uint8)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise DimensionMismatch("expected (height, width, 3) RGB8 array")
        if pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise DimensionMismatch("image must be at least 1x1")
        self.pixels = _freeze(pixels)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def __eq__(self, other) -> bool:
        return isinstance(other, RasterImage) and np.array_equal(self.pixels, other.pixels)

    def __repr__(self) -> str:
        return f"RasterImage({self.width}x{self.height})"


class SegmentMap:
    """Per-pixel segment ids plus the derived segment registry.

    The ids raster and the registry always agree: construction rebuilds the
    registry unless a pre-validated one is supplied by a trusted caller.
    """

    def __init__(self, ids: np.ndarray, registry: dict[int, SegmentInfo] | None = None):
        ids = np.asarray(ids)
        if ids.ndim != 2 or ids.shape[0] < 1 or ids.shape[1] < 1:
            raise DimensionMismatch("segment raster must be 2-D and non-empty")
        if ids.size and ids.min() < 0:
            raise RegistryInconsistent("segment ids must be non-negative")
        self.ids = _freeze(ids.astype(np.int32))
        self.registry: dict[int, SegmentInfo] = (
            registry if registry is not None else rebuild_registry(self.ids)
        )

    @property
    def height(self) -> int:
        return self.ids.shape[0]

    @property
    def width(self) -> int:
        return self.ids.shape[1]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SegmentMap)
            and np.array_equal(self.ids, other.ids)
            and self.registry == other.registry
        )

    def __repr__(self) -> str:
        return f"SegmentMap({self.width}x{self.height}, {len(self.registry)} segments)"


@dataclass(frozen=True)
class ClassDef:
    class_id: int
    name: str
    color: tuple[int, int, int, int]  # RGBA8


@dataclass
class ClassSet:
    """Ordered class table. Class id 1 ("default", opaque white) is always present."""

    classes: list[ClassDef] = field(default_factory=list)

    def __post_init__(self):
        if not any(c.class_id == DEFAULT_CLASS_ID for c in self.classes):
            self.classes.insert(
                0, ClassDef(DEFAULT_CLASS_ID, DEFAULT_CLASS_NAME, DEFAULT_CLASS_COLOR)
            )
        seen: set[int] = set()
        for c in self.classes:
            if c.class_id <= 0:
                raise UnknownClass(f"class id must be positive, got {c.class_id}")
            if c.class_id in seen:
                raise UnknownClass(f"duplicate class id {c.class_id}")
            seen.add(c.class_id)

    def ids(self) -> set[int]:
        return {c.class_id for c in self.classes}

    def get(self, class_id: int) -> ClassDef:
        for c in self.classes:
            if c.class_id == class_id:
                return c
        raise UnknownClass(f"class {class_id} not defined")

    def next_id(self) -> int:
        return max(self.ids()) + 1


# A ClassMap is a plain dict {segment id -> class id}; total over the registry.
ClassMap = dict[int, int]


def rebuild_registry(ids: np.ndarray) -> dict[int, SegmentInfo]:
    """Derive the registry from an id raster in one vectorized pass."""
    ids = np.asarray(ids)
    registry: dict[int, SegmentInfo] = {}
    present = np.unique(ids)
    present = present[present > 0]
    if present.size == 0:
        return registry
    counts = np.bincount(ids.ravel(), minlength=int(present.max()) + 1)
    rows, cols = np.nonzero(ids > 0)
    vals = ids[rows, cols]
    order = np.argsort(vals, kind="stable")
    vals, rows, cols = vals[order], rows[order], cols[order]
    starts = np.searchsorted(vals, present)
    ends = np.searchsorted(vals, present, side="right")
    for sid, s, e in zip(present.tolist(), starts.tolist(), ends.tolist()):
        r = rows[s:e]
        c = cols[s:e]
        registry[sid] = SegmentInfo(
            pixel_count=int(counts[sid]),
            bbox=(int(c.min()), int(r.min()), int(c.max()), int(r.max())),
        )
    return registry


def validate(image: RasterImage, segmap: SegmentMap) -> None:
    """Check every SegmentMap invariant against the owning image.

    Raises DimensionMismatch or RegistryInconsistent; returns None when ok.
    """
    if (image.width, image.height) != (segmap.width, segmap.height):
        raise DimensionMismatch(
            f"image is {image.width}x{image.height}, "
            f"segment raster is {segmap.width}x{segmap.height}"
        )
    fresh = rebuild_registry(segmap.ids)
    if fresh != segmap.registry:
        raise RegistryInconsistent("registry does not match the id raster")


def connected_components(mask: np.ndarray) -> np.ndarray:
    """Label maximal 4-connected true-regions with consecutive ids.

    Ids start at 1 and are assigned in raster-scan order of each
    component's first pixel; false pixels get 0.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2 or mask.shape[0] < 1 or mask.shape[1] < 1:
        raise DimensionMismatch("mask must be 2-D and non-empty")
    labels, n = ndimage.label(mask, structure=_CROSS)
    if n == 0:
        return labels.astype(np.int32)
    # Renumber so label order follows first occurrence in scan order.
    flat = labels.ravel()
    first = np.full(n + 1, flat.size, dtype=np.int64)
    nz = np.nonzero(flat)[0]
    np.minimum.at(first, flat[nz], nz)
    order = np.argsort(first[1:], kind="stable")
    remap = np.zeros(n + 1, dtype=np.int32)
    remap[order + 1] = np.arange(1, n + 1, dtype=np.int32)
    return remap[labels]
