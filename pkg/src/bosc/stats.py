"""Per-class instance counts, pixel bookkeeping and metric coverage areas.

Areas use a single ground resolution evaluated at the image-center
latitude (flat-earth across the footprint, fine at desk scale): one image
pixel covers ``|det(transform)| * g**2`` square meters where g is meters
per world pixel at the anchor zoom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import OutOfProjectionBounds, PartialClassMap
from .mapping import (
    MAX_LATITUDE,
    MAX_ZOOM,
    TILE_SIZE,
    GeoReference,
    _world_px_to_latlon_unchecked,
    apply_affine,
)
from .raster import ClassMap, SegmentMap

EARTH_RADIUS_M = 6378137.0


@dataclass(frozen=True)
class ClassStat:
    instance_count: int
    pixel_count: int
    area_m2: float | None = None


@dataclass(frozen=True)
class ClassStats:
    per_class: dict[int, ClassStat]
    total: ClassStat
    unassigned_pixels: int


def ground_resolution(lat: float, z: int) -> float:
    """Meters of ground per world pixel at the given latitude and zoom."""
    if abs(lat) > MAX_LATITUDE:
        raise OutOfProjectionBounds(f"latitude {lat} outside +/-{MAX_LATITUDE}")
    if not 0 <= z <= MAX_ZOOM:
        raise OutOfProjectionBounds(f"zoom {z} outside 0..{MAX_ZOOM}")
    return math.cos(math.radians(lat)) * 2.0 * math.pi * EARTH_RADIUS_M / (TILE_SIZE * (1 << z))


def pixel_area_m2(segmap: SegmentMap, georef: GeoReference) -> float:
    """Ground area of one image pixel under the fitted transform."""
    cx, cy = segmap.width / 2.0, segmap.height / 2.0
    wx, wy = apply_affine(georef.transform, (cx, cy))
    lat, _ = _world_px_to_latlon_unchecked(wx, wy, georef.anchor_zoom)
    g = ground_resolution(lat, georef.anchor_zoom)
    return abs(georef.transform.det) * g * g


def class_histogram(classmap: ClassMap, segmap: SegmentMap) -> dict[int, int]:
    """Assigned pixels per class, straight off the registry."""
    _require_total(classmap, segmap)
    out: dict[int, int] = {}
    for sid, info in segmap.registry.items():
        cid = classmap[sid]
        out[cid] = out.get(cid, 0) + info.pixel_count
    return out


def compute_stats(
    segmap: SegmentMap, classmap: ClassMap, georef: GeoReference | None = None
) -> ClassStats:
    """Instance counts and coverage per class; metric areas when georeferenced."""
    _require_total(classmap, segmap)
    px_area = pixel_area_m2(segmap, georef) if georef is not None else None

    counts: dict[int, list[int]] = {}
    for sid, info in segmap.registry.items():
        cid = classmap[sid]
        entry = counts.setdefault(cid, [0, 0])
        entry[0] += 1
        entry[1] += info.pixel_count

    per_class = {
        cid: ClassStat(
            instance_count=inst,
            pixel_count=px,
            area_m2=None if px_area is None else px * px_area,
        )
        for cid, (inst, px) in sorted(counts.items())
    }
    total_px = sum(s.pixel_count for s in per_class.values())
    total = ClassStat(
        instance_count=sum(s.instance_count for s in per_class.values()),
        pixel_count=total_px,
        area_m2=None if px_area is None else total_px * px_area,
    )
    unassigned = segmap.width * segmap.height - total_px
    return ClassStats(per_class=per_class, total=total, unassigned_pixels=unassigned)


def segment_areas_m2(segmap: SegmentMap, georef: GeoReference) -> dict[int, float]:
    """Metric area per segment, same flat-earth model as compute_stats."""
    px_area = pixel_area_m2(segmap, georef)
    return {sid: info.pixel_count * px_area for sid, info in segmap.registry.items()}


def stats_to_dict(stats: ClassStats) -> dict:
    """Serialize with the fixed field names the API exposes."""

    def one(s: ClassStat) -> dict:
        d = {"instance_count": s.instance_count, "pixel_count": s.pixel_count}
        if s.area_m2 is not None:
            d["area_m2"] = s.area_m2
        return d

    return {
        "classes": {str(cid): one(s) for cid, s in stats.per_class.items()},
        "total": one(stats.total),
        "unassigned_pixels": stats.unassigned_pixels,
    }


def _require_total(classmap: ClassMap, segmap: SegmentMap) -> None:
    for sid in segmap.registry:
        if sid not in classmap:
            raise PartialClassMap(f"segment {sid} has no class assignment")
