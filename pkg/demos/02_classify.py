"""
Hierarchical classification with seed labels
============================================

Extracts per-segment descriptors, clusters them with average linkage and
shows the three classification modes: fully automatic, seed-guided, and
seed-guided with propagation to unseeded clusters.
"""

import numpy as np

from bosc import (
    ClassDef,
    ClassSet,
    RasterImage,
    SegmenterParams,
    assign_classes,
    cluster,
    default_classification,
    extract_features,
    segment_auto,
)

# scene with two reddish roofs, two green crowns, dark ground
scene = np.full((80, 80, 3), (26, 30, 24), dtype=np.uint8)
yy, xx = np.mgrid[0:80, 0:80]
scene[(xx - 18) ** 2 + (yy - 18) ** 2 <= 70] = (200, 55, 50)
scene[(xx - 60) ** 2 + (yy - 20) ** 2 <= 80] = (210, 70, 60)
scene[(xx - 22) ** 2 + (yy - 58) ** 2 <= 90] = (60, 170, 55)
scene[(xx - 58) ** 2 + (yy - 60) ** 2 <= 60] = (55, 160, 65)
image = RasterImage(scene)

seg = segment_auto(image, SegmenterParams(k=400.0, min_region_size=20))
print(f"{len(seg.registry)} segments")

# step d of the workflow: everything starts in the default (white) class
class_set = ClassSet()
print("default classification:", default_classification(seg, class_set))

features = extract_features(image, seg)
print(f"descriptor matrix: {features.vectors.shape[0]} x {features.vectors.shape[1]}")

dendro, assignment = cluster(features, k=3)
print("merge heights:", [round(m[2], 4) for m in dendro.merges])
print("cluster assignment:", assignment)

# mode 1: no seeds, every cluster becomes an auto class with a palette color
auto_map, auto_classes = assign_classes(assignment, features, class_set)
for c in auto_classes.classes:
    print(f"  class {c.class_id} {c.name!r} color {c.color}")

# mode 2: seed one roof and one crown; third cluster still gets an auto class
class_set = ClassSet(
    [ClassDef(2, "roof", (220, 60, 50, 255)), ClassDef(3, "crown", (60, 170, 60, 255))]
)
roof_sid = int(seg.ids[18, 18])
crown_sid = int(seg.ids[58, 22])
seeded_map, _ = assign_classes(assignment, features, class_set, seeds={roof_sid: 2, crown_sid: 3})
print("seeded:", seeded_map)

# mode 3: propagate pulls the unseeded cluster to its nearest seeded centroid
propagated, _ = assign_classes(
    assignment, features, class_set, seeds={roof_sid: 2, crown_sid: 3}, propagate=True
)
print("propagated:", propagated)
