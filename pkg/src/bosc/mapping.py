"""Affine georeferencing, Web Mercator math, overlay tiles and vector export.

World-pixel convention: 256-px tiles, continuous coordinates, origin at the
top-left of the projection square; the square at zoom z has side 256*2^z.
A GeoReference maps continuous image coordinates to world pixels at its
anchor zoom through u = a*x + b*y + c, v = d*x + e*y + f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateControlPoints,
    InvalidArgument,
    NotGeoreferenced,
    OutOfProjectionBounds,
    PartialClassMap,
    SingularTransform,
)
from .raster import ClassMap, ClassSet, SegmentMap

TILE_SIZE = 256
MAX_LATITUDE = 85.05112878
MAX_ZOOM = 22
DEFAULT_ANCHOR_ZOOM = 18


@dataclass(frozen=True)
class AffineTransform:
    a: float
    b: float
    c: float
    d: float
    e: float
    f: float

    @property
    def det(self) -> float:
        return self.a * self.e - self.b * self.d

    @classmethod
    def identity(cls) -> "AffineTransform":
        return cls(1.0, 0.0, 0.0, 0.0, 1.0, 0.0)

    def coefficients(self) -> tuple[float, float, float, float, float, float]:
        return (self.a, self.b, self.c, self.d, self.e, self.f)


@dataclass(frozen=True)
class ControlPointPair:
    """A user-picked correspondence: image point <-> geographic point."""

    image_point: tuple[float, float]
    geo_point: tuple[float, float]  # (lat, lon) degrees

    def __post_init__(self):
        lat, lon = self.geo_point
        if abs(lat) > MAX_LATITUDE:
            raise OutOfProjectionBounds(f"latitude {lat} outside +/-{MAX_LATITUDE}")
        if not -180.0 <= lon <= 180.0:
            raise OutOfProjectionBounds(f"longitude {lon} outside [-180, 180]")


@dataclass(frozen=True)
class GeoReference:
    transform: AffineTransform
    anchor_zoom: int

    def __post_init__(self):
        if not 0 <= self.anchor_zoom <= MAX_ZOOM:
            raise InvalidArgument(f"anchor zoom must be 0..{MAX_ZOOM}")
        if self.transform.det == 0.0:
            raise SingularTransform("georeference transform must be invertible")


def _check_zoom(z: int) -> None:
    if not 0 <= z <= MAX_ZOOM:
        raise OutOfProjectionBounds(f"zoom {z} outside 0..{MAX_ZOOM}")


def latlon_to_world_px(lat: float, lon: float, z: int) -> tuple[float, float]:
    """Project WGS84 degrees to continuous world pixels at zoom z."""
    _check_zoom(z)
    if abs(lat) > MAX_LATITUDE:
        raise OutOfProjectionBounds(f"latitude {lat} outside +/-{MAX_LATITUDE}")
    if not -180.0 <= lon <= 180.0:
        raise OutOfProjectionBounds(f"longitude {lon} outside [-180, 180]")
    size = TILE_SIZE * (1 << z)
    phi = math.radians(lat)
    x = (lon + 180.0) / 360.0 * size
    y = (1.0 - math.log(math.tan(phi) + 1.0 / math.cos(phi)) / math.pi) / 2.0 * size
    # the latitude bound is defined as mapping to the square's edge; clamp
    # away the dust the rounded bound constant produces
    return min(max(x, 0.0), float(size)), min(max(y, 0.0), float(size))


def _world_px_to_latlon_unchecked(x: float, y: float, z: int) -> tuple[float, float]:
    size = TILE_SIZE * (1 << z)
    lon = x / size * 360.0 - 180.0
    lat = math.degrees(math.atan(math.sinh(math.pi * (1.0 - 2.0 * y / size))))
    return lat, lon


def world_px_to_latlon(x: float, y: float, z: int) -> tuple[float, float]:
    """Inverse projection; accepts the closed projection square at zoom z."""
    _check_zoom(z)
    size = TILE_SIZE * (1 << z)
    slack = 1e-6  # absorb float dust at the square's edges
    if not (-slack <= x <= size + slack and -slack <= y <= size + slack):
        raise OutOfProjectionBounds(f"({x}, {y}) outside the zoom-{z} projection square")
    return _world_px_to_latlon_unchecked(x, y, z)


def apply_affine(t: AffineTransform, point: tuple[float, float]) -> tuple[float, float]:
    x, y = point
    return (t.a * x + t.b * y + t.c, t.d * x + t.e * y + t.f)


def invert_affine(t: AffineTransform) -> AffineTransform:
    det = t.det
    if det == 0.0:
        raise SingularTransform("transform is not invertible")
    ia, ib = t.e / det, -t.b / det
    id_, ie = -t.d / det, t.a / det
    return AffineTransform(ia, ib, -(ia * t.c + ib * t.f), id_, ie, -(id_ * t.c + ie * t.f))


def compose(t2: AffineTransform, t1: AffineTransform) -> AffineTransform:
    """Composition applying t1 first, then t2."""
    return AffineTransform(
        t2.a * t1.a + t2.b * t1.d,
        t2.a * t1.b + t2.b * t1.e,
        t2.a * t1.c + t2.b * t1.f + t2.c,
        t2.d * t1.a + t2.e * t1.d,
        t2.d * t1.b + t2.e * t1.e,
        t2.d * t1.c + t2.e * t1.f + t2.f,
    )


def _check_collinearity(pts: np.ndarray) -> None:
    """Reject image control points that sit (almost) on one line."""
    diag2 = float(np.ptp(pts[:, 0]) ** 2 + np.ptp(pts[:, 1]) ** 2)
    p0 = pts[0]
    far = pts[int(np.argmax(((pts - p0) ** 2).sum(axis=1)))]
    v = far - p0
    cross = np.abs(v[0] * (pts[:, 1] - p0[1]) - v[1] * (pts[:, 0] - p0[0]))
    if float(cross.max()) <= 1e-9 * diag2:
        raise DegenerateControlPoints("image control points are collinear")


def estimate_affine(
    pairs: list[ControlPointPair],
    anchor_zoom: int = DEFAULT_ANCHOR_ZOOM,
    method: str = "auto",
) -> GeoReference:
    """Fit the image->world-pixel affine from >=3 control point pairs.

    Exactly 3 pairs solve the two 3x3 linear systems exactly; more pairs go
    through least squares.  ``method`` can force "exact" (3 pairs only) or
    "least-squares" for testing; "auto" follows the pair count.
    """
    if len(pairs) < 3:
        raise InvalidArgument("need at least 3 control point pairs")
    _check_zoom(anchor_zoom)
    P = np.array([p.image_point for p in pairs], dtype=np.float64)
    Q = np.array(
        [latlon_to_world_px(p.geo_point[0], p.geo_point[1], anchor_zoom) for p in pairs]
    )
    _check_collinearity(P)

    # solve on centered coordinates: the anchor-zoom translation is orders of
    # magnitude larger than the linear part and would swamp the solve
    p_mean = P.mean(axis=0)
    q_mean = Q.mean(axis=0)
    design = np.column_stack([P - p_mean, np.ones(len(pairs))])
    if method == "exact" or (method == "auto" and len(pairs) == 3):
        if len(pairs) != 3:
            raise InvalidArgument("exact solve requires exactly 3 pairs")
        try:
            coeffs = np.linalg.solve(design, Q - q_mean)
        except np.linalg.LinAlgError:
            raise DegenerateControlPoints("control point system is singular") from None
    elif method in ("auto", "least-squares"):
        coeffs, _, rank, _ = np.linalg.lstsq(design, Q - q_mean, rcond=None)
        if rank < 3:
            raise DegenerateControlPoints("normal equations are rank deficient")
    else:
        raise InvalidArgument(f"unknown method {method!r}")

    a, b = coeffs[0, 0], coeffs[1, 0]
    d, e = coeffs[0, 1], coeffs[1, 1]
    t = AffineTransform(
        a,
        b,
        coeffs[2, 0] + q_mean[0] - a * p_mean[0] - b * p_mean[1],
        d,
        e,
        coeffs[2, 1] + q_mean[1] - d * p_mean[0] - e * p_mean[1],
    )
    # scale from the centered target spread: raw world-pixel magnitudes are
    # dominated by the translation and say nothing about degeneracy
    centered = Q - Q.mean(axis=0)
    scale = float(np.sqrt((centered**2).sum(axis=1)).mean())
    if abs(t.det) <= 1e-12 * scale * scale:
        raise SingularTransform("fitted transform is numerically singular")
    return GeoReference(t, anchor_zoom)


def render_overlay_tile(
    segmap: SegmentMap,
    classmap: ClassMap,
    class_set: ClassSet,
    georef: GeoReference | None,
    z: int,
    x: int,
    y: int,
    alpha: int = 160,
) -> np.ndarray:
    """Render one z/x/y overlay tile as a (256, 256, 4) RGBA uint8 array.

    Tile pixel centers are projected to anchor-zoom world pixels, pulled
    back through the inverse affine and sampled nearest-neighbor (floor);
    unregistered samples stay fully transparent.
    """
    if georef is None:
        raise NotGeoreferenced("project has no georeference")
    _check_zoom(z)
    if not 0 <= alpha <= 255:
        raise InvalidArgument("alpha must be 0..255")
    for sid in segmap.registry:
        if sid not in classmap:
            raise PartialClassMap(f"segment {sid} has no class")

    inv = invert_affine(georef.transform)
    scale = 2.0 ** (georef.anchor_zoom - z)
    jj, ii = np.meshgrid(np.arange(TILE_SIZE), np.arange(TILE_SIZE))
    wx = (x * TILE_SIZE + jj + 0.5) * scale
    wy = (y * TILE_SIZE + ii + 0.5) * scale
    fx = inv.a * wx + inv.b * wy + inv.c
    fy = inv.d * wx + inv.e * wy + inv.f
    col = np.floor(fx).astype(np.int64)
    row = np.floor(fy).astype(np.int64)
    valid = (col >= 0) & (col < segmap.width) & (row >= 0) & (row < segmap.height)

    lut = np.zeros((max(segmap.registry, default=0) + 1, 4), dtype=np.uint8)
    for sid in segmap.registry:
        r, g, b, _ = class_set.get(classmap[sid]).color
        lut[sid] = (r, g, b, alpha)

    tile = np.zeros((TILE_SIZE, TILE_SIZE, 4), dtype=np.uint8)
    sampled = segmap.ids[row[valid], col[valid]]
    tile[valid] = lut[sampled]
    return tile


# --- pixel-boundary ring tracing -------------------------------------------

_LEFT_TURN_SCORE = {1: 2, 0: 1, -1: 0}  # cross sign of (incoming x outgoing)


def trace_segment_rings(mask: np.ndarray) -> list[list[tuple[int, int]]]:
    """Trace the pixel-boundary rings of a boolean mask.

    Returns closed rings (first vertex not repeated) with collinear runs
    merged.  In image coordinates outer rings have positive shoelace area
    and holes negative.  Pinch corners (diagonally touching pixels) are
    resolved by preferring the sharpest left turn, which keeps rings simple.
    """
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    padded = np.pad(mask, 1)
    edges: list[tuple[tuple[int, int], tuple[int, int]]] = []
    specs = (
        ((-1, 0), lambda r, c: ((c, r), (c + 1, r))),        # top exposed
        ((0, 1), lambda r, c: ((c + 1, r), (c + 1, r + 1))),  # right exposed
        ((1, 0), lambda r, c: ((c + 1, r + 1), (c, r + 1))),  # bottom exposed
        ((0, -1), lambda r, c: ((c, r + 1), (c, r))),         # left exposed
    )
    for (dr, dc), make in specs:
        neigh = padded[1 + dr : 1 + dr + h, 1 + dc : 1 + dc + w]
        rs, cs = np.nonzero(mask & ~neigh)
        for r, c in zip(rs.tolist(), cs.tolist()):
            edges.append(make(r, c))

    by_start: dict[tuple[int, int], list[int]] = {}
    for i, (s, _) in enumerate(edges):
        by_start.setdefault(s, []).append(i)
    used = [False] * len(edges)

    rings: list[list[tuple[int, int]]] = []
    for start_idx in range(len(edges)):
        if used[start_idx]:
            continue
        loop: list[tuple[int, int]] = []
        idx = start_idx
        while not used[idx]:
            used[idx] = True
            s, e = edges[idx]
            loop.append(s)
            din = (e[0] - s[0], e[1] - s[1])
            candidates = [i for i in by_start.get(e, ()) if not used[i]]
            if not candidates:
                break
            if len(candidates) == 1:
                idx = candidates[0]
            else:
                def turn(i: int) -> int:
                    s2, e2 = edges[i]
                    dout = (e2[0] - s2[0], e2[1] - s2[1])
                    cross = din[0] * dout[1] - din[1] * dout[0]
                    return _LEFT_TURN_SCORE[(cross > 0) - (cross < 0)]

                idx = max(candidates, key=turn)
        rings.append(_merge_collinear(loop))
    return rings


def _merge_collinear(loop: list[tuple[int, int]]) -> list[tuple[int, int]]:
    n = len(loop)
    out = []
    for i in range(n):
        prev, cur, nxt = loop[i - 1], loop[i], loop[(i + 1) % n]
        d1 = (cur[0] - prev[0], cur[1] - prev[1])
        d2 = (nxt[0] - cur[0], nxt[1] - cur[1])
        if d1[0] * d2[1] - d1[1] * d2[0] != 0:
            out.append(cur)
    return out


def _ring_area(ring: list[tuple[float, float]]) -> float:
    area = 0.0
    for i in range(len(ring)):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % len(ring)]
        area += x1 * y2 - x2 * y1
    return area / 2.0


def _point_in_ring(px: float, py: float, ring: list[tuple[float, float]]) -> bool:
    inside = False
    for i in range(len(ring)):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % len(ring)]
        if (y1 > py) != (y2 > py) and px < x1 + (py - y1) * (x2 - x1) / (y2 - y1):
            inside = not inside
    return inside


def segment_polygons(mask: np.ndarray) -> list[list[list[tuple[int, int]]]]:
    """Group traced rings into polygons: [[outer, hole, ...], ...].

    One polygon per 4-connected part of the mask; holes are attached to the
    outer ring that contains them.
    """
    rings = trace_segment_rings(mask)
    outers = [r for r in rings if _ring_area(r) > 0]
    holes = [r for r in rings if _ring_area(r) < 0]
    polys: list[list[list[tuple[int, int]]]] = [[o] for o in outers]
    for hole in holes:
        hx, hy = hole[0]
        for poly in polys:
            if _point_in_ring(hx + 1e-9, hy + 1e-9, poly[0]):
                poly.append(hole)
                break
        else:  # pragma: no cover - holes always sit inside some outer
            polys[0].append(hole)
    return polys


def _oriented(ring: list[list[float]], counterclockwise: bool) -> list[list[float]]:
    area = _ring_area([(p[0], p[1]) for p in ring])
    if (area > 0) != counterclockwise:
        ring = ring[::-1]
    return ring


def export_geojson(
    segmap: SegmentMap,
    classmap: ClassMap,
    class_set: ClassSet,
    georef: GeoReference | None,
    segment_areas_m2: dict[int, float] | None = None,
) -> dict:
    """Build a GeoJSON FeatureCollection with one feature per segment.

    Ring vertices walk the pixel boundary (collinear runs merged), mapped
    image -> world px -> lat/lon; coordinates are [lon, lat] with exterior
    rings counterclockwise and holes clockwise.
    """
    if georef is None:
        raise NotGeoreferenced("project has no georeference")
    for sid in segmap.registry:
        if sid not in classmap:
            raise PartialClassMap(f"segment {sid} has no class")

    def to_lonlat(pt: tuple[float, float]) -> list[float]:
        wx, wy = apply_affine(georef.transform, pt)
        lat, lon = _world_px_to_latlon_unchecked(wx, wy, georef.anchor_zoom)
        return [lon, lat]

    features = []
    for sid in sorted(segmap.registry):
        info = segmap.registry[sid]
        polys_geo: list[list[list[list[float]]]] = []
        for rings in segment_polygons(segmap.ids == sid):
            geo_rings = []
            for pos, ring in enumerate(rings):
                pts = [to_lonlat((float(x), float(y))) for x, y in ring]
                pts = _oriented(pts, counterclockwise=(pos == 0))
                geo_rings.append(pts + [pts[0]])
            polys_geo.append(geo_rings)
        if len(polys_geo) == 1:
            geometry = {"type": "Polygon", "coordinates": polys_geo[0]}
        else:
            geometry = {"type": "MultiPolygon", "coordinates": polys_geo}
        cdef = class_set.get(classmap[sid])
        properties = {
            "segment_id": sid,
            "class_id": cdef.class_id,
            "class_name": cdef.name,
            "pixel_count": info.pixel_count,
        }
        if segment_areas_m2 is not None:
            properties["area_m2"] = segment_areas_m2[sid]
        features.append({"type": "Feature", "geometry": geometry, "properties": properties})
    return {"type": "FeatureCollection", "features": features}
