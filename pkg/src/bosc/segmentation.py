"""Automatic segmentation and the interactive mask-editing operations.

The automatic segmenter is graph-based region merging over the 4-connected
pixel grid with Euclidean RGB edge weights: regions C1, C2 merge iff the
minimum-weight edge between them satisfies
``w <= min(Int(C1) + k/|C1|, Int(C2) + k/|C2|)`` where Int(C) is the largest
edge weight already absorbed into the region.  A second sweep absorbs
regions smaller than ``min_region_size`` through their lowest-weight
outgoing edge.  Every editing operation returns a new SegmentMap; inputs
are never mutated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePolygon, DimensionMismatch, InvalidArgument, UnknownSegmentId
from .raster import RasterImage, SegmentMap, connected_components

DEFAULT_K = 500.0
DEFAULT_MIN_REGION_SIZE = 16


@dataclass(frozen=True)
class SegmenterParams:
    """Region-merge tolerance k and the small-region absorption floor."""

    k: float = DEFAULT_K
    min_region_size: int = DEFAULT_MIN_REGION_SIZE

    def __post_init__(self):
        if self.k < 0:
            raise InvalidArgument("k must be non-negative")
        if self.min_region_size < 1:
            raise InvalidArgument("min_region_size must be at least 1")


@dataclass(frozen=True)
class BrushStroke:
    """A brush pass: polyline in continuous image coords, radius in pixels.

    target_segment_id 0 erases; a fresh positive id creates a new segment.
    """

    polyline: tuple[tuple[float, float], ...]
    radius: float
    target_segment_id: int

    def __post_init__(self):
        if len(self.polyline) == 0:
            raise InvalidArgument("polyline must be non-empty")
        if not self.radius > 0:
            raise InvalidArgument("radius must be positive")
        if self.target_segment_id < 0:
            raise InvalidArgument("target segment id must be non-negative")


def _grid_edges(image: RasterImage) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sorted 4-connectivity edges as (weight, pixel_a, pixel_b) arrays.

    Sort key is (weight, smaller pixel index, right-before-down) so the
    sweep order is identical on every platform.
    """
    h, w = image.height, image.width
    rgb = image.pixels.astype(np.int32)
    idx = np.arange(h * w, dtype=np.int64).reshape(h, w)

    parts = []
    if w > 1:
        dw = np.sqrt(((rgb[:, 1:] - rgb[:, :-1]) ** 2).sum(axis=2)).ravel()
        parts.append((dw, idx[:, :-1].ravel(), idx[:, 1:].ravel(), np.zeros(dw.size, np.int8)))
    if h > 1:
        dw = np.sqrt(((rgb[1:, :] - rgb[:-1, :]) ** 2).sum(axis=2)).ravel()
        parts.append((dw, idx[:-1, :].ravel(), idx[1:, :].ravel(), np.ones(dw.size, np.int8)))
    if not parts:
        return np.empty(0), np.empty(0, np.int64), np.empty(0, np.int64)

    weights = np.concatenate([p[0] for p in parts])
    ea = np.concatenate([p[1] for p in parts])
    eb = np.concatenate([p[2] for p in parts])
    direction = np.concatenate([p[3] for p in parts])
    order = np.lexsort((direction, ea, weights))
    return weights[order], ea[order], eb[order]


def _labels_to_segmap(labels: np.ndarray, h: int, w: int) -> SegmentMap:
    """Relabel arbitrary component labels to 1..n in scan order of first pixel."""
    uniq, inv = np.unique(labels, return_inverse=True)
    first = np.full(uniq.size, labels.size, dtype=np.int64)
    np.minimum.at(first, inv, np.arange(labels.size))
    order = np.argsort(first, kind="stable")
    remap = np.empty(uniq.size, dtype=np.int32)
    remap[order] = np.arange(1, uniq.size + 1, dtype=np.int32)
    return SegmentMap(remap[inv].reshape(h, w))


def segment_auto(image: RasterImage, params: SegmenterParams | None = None) -> SegmentMap:
    """Segment the image into a full partition of 4-connected regions.

    Deterministic for fixed input and params; every output segment has at
    least ``min_region_size`` pixels (the whole image may be smaller).
    """
    params = params or SegmenterParams()
    h, w = image.height, image.width
    n = h * w
    weights, ea, eb = _grid_edges(image)

    parent = list(range(n))
    size = [1] * n
    internal = [0.0] * n
    k = float(params.k)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    wl = weights.tolist()
    al = ea.tolist()
    bl = eb.tolist()

    for i in range(len(wl)):
        ra, rb = find(al[i]), find(bl[i])
        if ra == rb:
            continue
        wgt = wl[i]
        if wgt <= internal[ra] + k / size[ra] and wgt <= internal[rb] + k / size[rb]:
            if size[ra] < size[rb]:
                ra, rb = rb, ra
            parent[rb] = ra
            size[ra] += size[rb]
            internal[ra] = wgt

    min_size = params.min_region_size
    for i in range(len(wl)):
        ra, rb = find(al[i]), find(bl[i])
        if ra != rb and (size[ra] < min_size or size[rb] < min_size):
            if size[ra] < size[rb]:
                ra, rb = rb, ra
            parent[rb] = ra
            size[ra] += size[rb]

    labels = np.fromiter((find(i) for i in range(n)), dtype=np.int64, count=n)
    return _labels_to_segmap(labels, h, w)


def ingest_external_mask(image: RasterImage, ids: np.ndarray) -> SegmentMap:
    """Adopt an externally produced id raster (any segmenter's output).

    Positive ids are relabeled to consecutive integers in raster-scan
    first-occurrence order; zeros stay unassigned.
    """
    ids = np.asarray(ids)
    if ids.shape != (image.height, image.width):
        raise DimensionMismatch(
            f"mask is {ids.shape[1]}x{ids.shape[0]}, image is {image.width}x{image.height}"
        )
    if ids.size and ids.min() < 0:
        raise InvalidArgument("segment ids must be non-negative")
    flat = ids.ravel()
    pos = flat[flat > 0]
    out = np.zeros(flat.size, dtype=np.int32)
    if pos.size:
        uniq, first = np.unique(pos, return_index=True)
        order = np.argsort(first, kind="stable")
        remap = {int(uniq[j]): i + 1 for i, j in enumerate(order)}
        lut = np.zeros(int(uniq.max()) + 1, dtype=np.int32)
        for old, new in remap.items():
            lut[old] = new
        out = lut[flat]
    return SegmentMap(out.reshape(ids.shape))


def _stroke_mask(segmap: SegmentMap, stroke: BrushStroke) -> tuple[slice, slice, np.ndarray]:
    """Boolean mask (within a clipped bbox window) of pixels the stroke covers."""
    pts = np.asarray(stroke.polyline, dtype=float)
    r = float(stroke.radius)
    c0 = max(0, int(math.floor(pts[:, 0].min() - r - 0.5)))
    c1 = min(segmap.width - 1, int(math.ceil(pts[:, 0].max() + r)))
    r0 = max(0, int(math.floor(pts[:, 1].min() - r - 0.5)))
    r1 = min(segmap.height - 1, int(math.ceil(pts[:, 1].max() + r)))
    if c1 < c0 or r1 < r0:
        return slice(0, 0), slice(0, 0), np.zeros((0, 0), dtype=bool)

    py, px = np.mgrid[r0 : r1 + 1, c0 : c1 + 1].astype(float)
    px += 0.5
    py += 0.5
    dmin = np.full(px.shape, np.inf)
    if len(pts) == 1:
        dmin = np.hypot(px - pts[0, 0], py - pts[0, 1])
    else:
        for (x1, y1), (x2, y2) in zip(pts[:-1], pts[1:]):
            dx, dy = x2 - x1, y2 - y1
            seg2 = dx * dx + dy * dy
            if seg2 == 0.0:
                d = np.hypot(px - x1, py - y1)
            else:
                t = np.clip(((px - x1) * dx + (py - y1) * dy) / seg2, 0.0, 1.0)
                d = np.hypot(px - (x1 + t * dx), py - (y1 + t * dy))
            np.minimum(dmin, d, out=dmin)
    return slice(r0, r1 + 1), slice(c0, c1 + 1), dmin <= r


def paint(segmap: SegmentMap, stroke: BrushStroke) -> SegmentMap:
    """Reassign every pixel within ``radius`` of the polyline to the target id."""
    rows, cols, mask = _stroke_mask(segmap, stroke)
    ids = segmap.ids.copy()
    ids[rows, cols][mask] = stroke.target_segment_id
    return SegmentMap(ids)


def merge_segments(segmap: SegmentMap, ids: list[int]) -> SegmentMap:
    """Collapse two or more registered segments into the smallest listed id."""
    if len(ids) < 2:
        raise InvalidArgument("need at least two segment ids to merge")
    if len(set(ids)) != len(ids):
        raise InvalidArgument("duplicate segment id in merge list")
    for sid in ids:
        if sid not in segmap.registry:
            raise UnknownSegmentId(f"segment {sid} is not registered")
    keep = min(ids)
    raster = segmap.ids.copy()
    raster[np.isin(raster, ids)] = keep
    return SegmentMap(raster)


def _ring_mask(ring: np.ndarray, width: int, height: int) -> np.ndarray:
    """Even-odd inside test of all pixel centers against one ring, vectorized."""
    py, px = np.mgrid[0:height, 0:width].astype(float)
    px += 0.5
    py += 0.5
    inside = np.zeros((height, width), dtype=bool)
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        if y1 == y2:
            continue
        crosses = (y1 > py) != (y2 > py)
        xint = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (px < xint)
    return inside


def create_segment_from_polygon(segmap: SegmentMap, ring: list[tuple[float, float]]) -> SegmentMap:
    """Assign pixels whose centers fall inside the ring (even-odd) a fresh id."""
    pts = [tuple(map(float, p)) for p in ring]
    if len(pts) > 1 and pts[0] == pts[-1]:
        pts = pts[:-1]
    if len(pts) < 3:
        raise InvalidArgument("polygon needs at least 3 vertices")
    area2 = 0.0
    for i in range(len(pts)):
        x1, y1 = pts[i]
        x2, y2 = pts[(i + 1) % len(pts)]
        area2 += x1 * y2 - x2 * y1
    if area2 == 0.0:
        raise DegeneratePolygon("polygon has zero area")
    mask = _ring_mask(np.asarray(pts), segmap.width, segmap.height)
    if not mask.any():
        return SegmentMap(segmap.ids.copy())
    fresh = max(segmap.registry, default=0) + 1
    ids = segmap.ids.copy()
    ids[mask] = fresh
    return SegmentMap(ids)


def fill_unassigned(segmap: SegmentMap) -> SegmentMap:
    """Attach every 4-connected zero-region to its best neighbor segment.

    Best neighbor = largest shared boundary length (adjacent pixel pairs),
    ties to the smallest id; regions with no neighbor become fresh segments.
    """
    ids = segmap.ids
    zero = ids == 0
    if not zero.any():
        return SegmentMap(ids.copy())
    regions = connected_components(zero)
    n_regions = int(regions.max())

    # Count (region, neighbor segment) adjacencies over the four directions.
    counts: dict[tuple[int, int], int] = {}
    shifts = (
        (regions[:, :-1], ids[:, 1:]),
        (regions[:, 1:], ids[:, :-1]),
        (regions[:-1, :], ids[1:, :]),
        (regions[1:, :], ids[:-1, :]),
    )
    for reg, neigh in shifts:
        sel = (reg > 0) & (neigh > 0)
        if not sel.any():
            continue
        pairs = np.stack([reg[sel], neigh[sel]], axis=1)
        uniq, cnt = np.unique(pairs, axis=0, return_counts=True)
        for (r, s), c in zip(uniq.tolist(), cnt.tolist()):
            counts[(r, s)] = counts.get((r, s), 0) + int(c)

    best: dict[int, int] = {}
    for (r, s), c in counts.items():
        cur = best.get(r)
        if cur is None or (c, -s) > (counts[(r, cur)], -cur):
            best[r] = s

    fresh = max(segmap.registry, default=0)
    target = np.zeros(n_regions + 1, dtype=np.int32)
    for r in range(1, n_regions + 1):
        if r in best:
            target[r] = best[r]
        else:
            fresh += 1
            target[r] = fresh
    out = ids.copy()
    out[zero] = target[regions[zero]]
    return SegmentMap(out)
