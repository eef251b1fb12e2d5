"""
Georeferencing, overlay tiles and vector export
===============================================

Fits the image-to-map affine from three control points, renders a slippy
overlay tile, computes per-class coverage areas and writes a GeoJSON
document ready for any web map.
"""

import json

import numpy as np
from PIL import Image

from bosc import (
    ClassDef,
    ClassSet,
    ControlPointPair,
    RasterImage,
    SegmenterParams,
    apply_affine,
    compute_stats,
    estimate_affine,
    export_geojson,
    latlon_to_world_px,
    render_overlay_tile,
    segment_areas_m2,
    segment_auto,
    world_px_to_latlon,
)

scene = np.full((64, 64, 3), (30, 34, 28), dtype=np.uint8)
yy, xx = np.mgrid[0:64, 0:64]
scene[(xx - 20) ** 2 + (yy - 24) ** 2 <= 80] = (210, 60, 50)
scene[(xx - 46) ** 2 + (yy - 42) ** 2 <= 100] = (60, 175, 55)
image = RasterImage(scene)
seg = segment_auto(image, SegmenterParams(k=400.0, min_region_size=20))
classmap = {sid: 1 for sid in seg.registry}
class_set = ClassSet([ClassDef(2, "feature", (250, 120, 30, 255))])
classmap[int(seg.ids[24, 20])] = 2
classmap[int(seg.ids[42, 46])] = 2

# three control points: the user clicks matching spots on image and map.
# Here the "map" truth is a 1.2 m/px-ish placement near Valencia.
anchor = latlon_to_world_px(39.47, -0.38, 18)
pairs = [
    ControlPointPair((0.0, 0.0), world_px_to_latlon(anchor[0], anchor[1], 18)),
    ControlPointPair((64.0, 0.0), world_px_to_latlon(anchor[0] + 120, anchor[1], 18)),
    ControlPointPair((0.0, 64.0), world_px_to_latlon(anchor[0], anchor[1] + 120, 18)),
]
georef = estimate_affine(pairs, anchor_zoom=18)
print("fitted transform:", [round(float(v), 6) for v in georef.transform.coefficients()])

stats = compute_stats(seg, classmap, georef)
for cid, st in stats.per_class.items():
    print(f"class {cid}: {st.instance_count} instances, {st.pixel_count} px, {st.area_m2:.1f} m^2")

# render the overlay tile covering the image center
cx, cy = apply_affine(georef.transform, (32, 32))
tx, ty = int(cx // 256), int(cy // 256)
tile = render_overlay_tile(seg, classmap, class_set, georef, 18, tx, ty, alpha=180)
Image.fromarray(tile).save("demo_tile.png")
print(f"wrote demo_tile.png (tile 18/{tx}/{ty})")

doc = export_geojson(seg, classmap, class_set, georef, segment_areas_m2(seg, georef))
with open("demo_export.geojson", "w") as fh:
    json.dump(doc, fh, indent=2)
print(f"wrote demo_export.geojson with {len(doc['features'])} features")
