"""Acceptance suite: one test per release criterion, tolerances pinned.

Run with ``pytest tests/test_acceptance.py -v -s`` to get one printed
PASS line per criterion (a test that fails never reaches its print).
"""

import io
import math
import time
import zipfile

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from bosc.classification import FeatureMatrix, assign_classes, cluster, extract_features
from bosc.errors import BadFormat, DegenerateControlPoints, ProjectLocked
from bosc.mapping import (
    AffineTransform,
    ControlPointPair,
    GeoReference,
    apply_affine,
    compose,
    estimate_affine,
    invert_affine,
    latlon_to_world_px,
    render_overlay_tile,
    world_px_to_latlon,
)
from bosc.raster import ClassDef, ClassSet, RasterImage, SegmentMap, rebuild_registry
from bosc.segmentation import (
    BrushStroke,
    SegmenterParams,
    create_segment_from_polygon,
    fill_unassigned,
    merge_segments,
    paint,
    segment_auto,
)
from bosc.service import ServiceConfig, create_app
from bosc.stats import compute_stats
from bosc.store import (
    load_project,
    read_segment_raster,
    save_project,
    write_segment_raster,
)
from test_store import random_project

from oracles import naive_average_linkage, render_tile_reference


def ok(name):
    print(f"\nACCEPTANCE {name}: PASS")


def _value_components(ids):
    """Flood-fill labeling of equal-value 4-connected regions."""
    h, w = ids.shape
    seen = np.zeros((h, w), dtype=bool)
    count = 0
    for r0 in range(h):
        for c0 in range(w):
            if seen[r0, c0]:
                continue
            count += 1
            val = ids[r0, c0]
            stack = [(r0, c0)]
            seen[r0, c0] = True
            while stack:
                r, c = stack.pop()
                for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                    rr, cc = r + dr, c + dc
                    if 0 <= rr < h and 0 <= cc < w and not seen[rr, cc] and ids[rr, cc] == val:
                        seen[rr, cc] = True
                        stack.append((rr, cc))
    return count


def test_affine_recovery():
    rng = np.random.default_rng(1000)
    z0 = 12
    size = 256 * (1 << z0)
    start = time.time()
    for _ in range(1000):
        while True:
            a, b, d, e = rng.uniform(-3, 3, size=4)
            if abs(a * e - b * d) > 0.05:
                break
        truth = AffineTransform(
            a, b, float(rng.uniform(0.3, 0.6) * size), d, e, float(rng.uniform(0.3, 0.6) * size)
        )
        while True:
            P = rng.uniform(0, 512, size=(3, 2))
            area2 = abs(
                (P[1, 0] - P[0, 0]) * (P[2, 1] - P[0, 1])
                - (P[1, 1] - P[0, 1]) * (P[2, 0] - P[0, 0])
            )
            if area2 > 0.01 * 512**2:
                break
        pairs = [
            ControlPointPair(tuple(p), world_px_to_latlon(*apply_affine(truth, tuple(p)), z0))
            for p in P
        ]
        got = estimate_affine(pairs, anchor_zoom=z0).transform
        for g, w in zip(got.coefficients(), truth.coefficients()):
            assert abs(g - w) <= 1e-9 + 1e-9 * abs(w)

    for _ in range(200):
        p0 = rng.uniform(0, 512, size=2)
        v = rng.uniform(-1, 1, size=2)
        ts = rng.uniform(-100, 100, size=3)
        pts = [p0 + t * v for t in ts]
        pairs = [
            ControlPointPair((float(p[0]), float(p[1])), (float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1))))
            for p in pts
        ]
        with pytest.raises(DegenerateControlPoints):
            estimate_affine(pairs, anchor_zoom=z0)

    elapsed = time.time() - start
    assert elapsed < 5.0, f"affine recovery took {elapsed:.2f}s"
    ok("affine recovery (1000 random + 200 collinear, <5s)")


def test_transform_algebra():
    rng = np.random.default_rng(1001)
    identity = AffineTransform.identity().coefficients()
    for _ in range(200):
        while True:
            a, b, d, e = rng.uniform(-4, 4, size=4)
            if abs(a * e - b * d) > 1e-3:
                break
        t = AffineTransform(a, b, float(rng.uniform(-100, 100)), d, e, float(rng.uniform(-100, 100)))
        round_trip = compose(t, invert_affine(t)).coefficients()
        for g, w in zip(round_trip, identity):
            assert abs(g - w) <= 1e-9

    z0 = 10
    for _ in range(100):
        while True:
            a, b, d, e = rng.uniform(-2, 2, size=4)
            if abs(a * e - b * d) > 0.05:
                break
        size = 256 * (1 << z0)
        truth = AffineTransform(a, b, size / 2, d, e, size / 2)
        while True:
            P = rng.uniform(0, 256, size=(3, 2))
            area2 = abs(
                (P[1, 0] - P[0, 0]) * (P[2, 1] - P[0, 1])
                - (P[1, 1] - P[0, 1]) * (P[2, 0] - P[0, 0])
            )
            if area2 > 0.01 * 256**2:
                break
        pairs = [
            ControlPointPair(tuple(p), world_px_to_latlon(*apply_affine(truth, tuple(p)), z0))
            for p in P
        ]
        exact = estimate_affine(pairs, anchor_zoom=z0, method="exact").transform
        ls = estimate_affine(pairs, anchor_zoom=z0, method="least-squares").transform
        for g, w in zip(ls.coefficients(), exact.coefficients()):
            assert abs(g - w) <= 1e-9 + 1e-9 * abs(w)
    ok("transform algebra (inverse round trip + LS==exact on 3 points)")


def test_mercator_round_trip():
    assert latlon_to_world_px(0, 0, 0) == pytest.approx((128, 128), abs=1e-9)
    assert latlon_to_world_px(0, 180, 1) == pytest.approx((512, 256), abs=1e-9)
    assert latlon_to_world_px(85.05112878, -180, 0) == pytest.approx((0, 0), abs=1e-9)

    rng = np.random.default_rng(1002)
    for _ in range(1000):
        lat = float(rng.uniform(-85.05112878, 85.05112878))
        lon = float(rng.uniform(-180, 180))
        z = int(rng.integers(0, 23))
        x, y = latlon_to_world_px(lat, lon, z)
        lat2, lon2 = world_px_to_latlon(x, y, z)
        assert abs(lat2 - lat) < 1e-9
        assert abs(lon2 - lon) < 1e-9
    ok("mercator round trip (1000 points, z 0-22, <1e-9 deg)")


def test_segmentation_invariants():
    rng = np.random.default_rng(1003)
    params = SegmenterParams(k=150.0, min_region_size=8)
    ladder = (10.0, 50.0, 200.0, 1000.0, 5000.0)
    for i in range(100):
        img = RasterImage(rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8))
        seg = segment_auto(img, params)
        # total partition with a consistent registry
        assert not (seg.ids == 0).any()
        assert sum(s.pixel_count for s in seg.registry.values()) == 64 * 64
        # every segment 4-connected: one flood-fill component per id
        assert _value_components(seg.ids) == len(seg.registry)
        # min size respected
        for info in seg.registry.values():
            assert info.pixel_count >= 8 or info.pixel_count == 64 * 64
        # deterministic
        assert segment_auto(img, params).ids.tobytes() == seg.ids.tobytes()
        # monotone in k (merge predicate, absorption disabled)
        counts = [
            len(segment_auto(img, SegmenterParams(k=k, min_region_size=1)).registry)
            for k in ladder
        ]
        assert counts == sorted(counts, reverse=True), f"image {i}: {counts}"
    ok("segmentation invariants (100 images: partition/connectivity/size/determinism/monotone k)")


def test_clustering_matches_naive_oracle():
    rng = np.random.default_rng(1004)
    for _ in range(200):
        n = int(rng.integers(2, 9))
        d = int(rng.integers(1, 6))
        pts = rng.normal(size=(n, d)) * float(rng.uniform(0.1, 10))
        fm = FeatureMatrix(tuple(range(1, n + 1)), pts)
        dendro, _ = cluster(fm, k=1)
        expected = naive_average_linkage(pts)
        assert len(dendro.merges) == len(expected)
        heights = []
        for got, want in zip(dendro.merges, expected):
            assert got[:2] == want[:2] and got[3] == want[3]
            assert math.isclose(got[2], want[2], rel_tol=1e-12, abs_tol=1e-12)
            heights.append(got[2])
        assert heights == sorted(heights)
    ok("clustering oracle (200 random sets, n<=8, exact structure + monotone heights)")


def three_blob_fixture(size=64):
    img = np.zeros((size, size, 3), dtype=np.uint8)
    yy, xx = np.mgrid[0:size, 0:size]
    red = (xx - 16) ** 2 + (yy - 20) ** 2 <= 64
    green = (xx - 44) ** 2 + (yy - 40) ** 2 <= 81
    img[red] = (220, 30, 30)
    img[green] = (30, 200, 40)
    return RasterImage(img), red, green


def test_end_to_end_fixture():
    start = time.time()
    image, red_mask, green_mask = three_blob_fixture()
    seg = segment_auto(image, SegmenterParams(k=500.0, min_region_size=16))
    assert len(seg.registry) == 3

    # color-components oracle: ids constant exactly on each blob and background
    sid_red = int(seg.ids[20, 16])
    sid_green = int(seg.ids[40, 44])
    sid_bg = int(seg.ids[0, 0])
    assert {sid_red, sid_green, sid_bg} == set(seg.registry)
    assert (seg.ids[red_mask] == sid_red).all()
    assert (seg.ids[green_mask] == sid_green).all()
    assert (seg.ids[~red_mask & ~green_mask] == sid_bg).all()

    features = extract_features(image, seg)
    _, assignment = cluster(features, k=3)
    assert len(set(assignment.values())) == 3
    # blobs separated: each segment its own cluster
    assert len({assignment[sid_red], assignment[sid_green], assignment[sid_bg]}) == 3

    class_set = ClassSet(
        [
            ClassDef(2, "roof", (220, 30, 30, 255)),
            ClassDef(3, "tree", (30, 200, 40, 255)),
            ClassDef(4, "ground", (20, 20, 20, 255)),
        ]
    )
    classmap, class_set = assign_classes(
        assignment, features, class_set, seeds={sid_red: 2, sid_green: 3, sid_bg: 4}
    )
    assert classmap == {sid_red: 2, sid_green: 3, sid_bg: 4}

    # known affine: scale 2, image center pinned to the equator at z0
    z0 = 16
    size = 256 * (1 << z0)
    s = 2.0
    t = AffineTransform(s, 0, size / 2 - s * 32, 0, s, size / 2 - s * 32)
    georef = GeoReference(t, z0)

    stats = compute_stats(seg, classmap, georef)
    assert sorted(st.instance_count for st in stats.per_class.values()) == [1, 1, 1]

    g = 2 * math.pi * 6378137 / (256 * 2**z0)  # equator, closed form
    for cid, st in stats.per_class.items():
        want = st.pixel_count * abs(t.det) * g * g
        assert abs(st.area_m2 - want) <= 1e-6 * want

    elapsed = time.time() - start
    assert elapsed < 10.0, f"end-to-end fixture took {elapsed:.2f}s"
    ok("end-to-end fixture (3 blobs -> classes -> georef -> stats, <10s)")


def test_tile_oracle():
    rng = np.random.default_rng(1005)
    hits = 0
    for case in range(20):
        w, h = int(rng.integers(4, 24)), int(rng.integers(4, 24))
        ids = rng.integers(0, 4, size=(h, w)).astype(np.int32)
        ids[0, 0] = 1  # never empty
        segmap = SegmentMap(ids)
        class_set = ClassSet(
            [
                ClassDef(2, "a", (200, 10, 10, 255)),
                ClassDef(3, "b", (10, 10, 200, 255)),
            ]
        )
        classmap = {sid: int(rng.choice([1, 2, 3])) for sid in segmap.registry}
        z0 = int(rng.integers(2, 7))
        size = 256 * (1 << z0)
        while True:
            a, b, d, e = rng.uniform(-8, 8, size=4)
            if abs(a * e - b * d) > 0.5:
                break
        t = AffineTransform(a, b, float(rng.uniform(0.3, 0.7)) * size, d, e, float(rng.uniform(0.3, 0.7)) * size)
        georef = GeoReference(t, z0)
        z = int(rng.integers(max(0, z0 - 2), min(22, z0 + 2) + 1))
        n_tiles = 1 << z
        # center half the cases on the footprint, scatter the rest
        if case % 2 == 0:
            cx, cy = apply_affine(t, (w / 2, h / 2))
            x = min(n_tiles - 1, max(0, int(cx * 2.0 ** (z - z0) // 256)))
            y = min(n_tiles - 1, max(0, int(cy * 2.0 ** (z - z0) // 256)))
        else:
            x, y = int(rng.integers(0, n_tiles)), int(rng.integers(0, n_tiles))
        alpha = int(rng.integers(0, 256))
        got = render_overlay_tile(segmap, classmap, class_set, georef, z, x, y, alpha)
        colors = {c.class_id: c.color for c in class_set.classes}
        want = render_tile_reference(
            segmap.ids, set(segmap.registry), colors, classmap,
            t.coefficients(), z0, z, x, y, alpha,
        )
        assert np.array_equal(got, want)
        if got.any():
            hits += 1

    # a tile wholly outside the footprint is fully transparent
    ids = np.ones((4, 4), dtype=np.int32)
    z0 = 4
    t = AffineTransform(1, 0, 256 * (1 << z0) / 2, 0, 1, 256 * (1 << z0) / 2)
    far = render_overlay_tile(SegmentMap(ids), {1: 1}, ClassSet(), GeoReference(t, z0), z0, 0, 0, 255)
    assert not far.any()
    assert hits > 0
    ok(f"tile oracle (20 random project/tile combos, {hits} non-empty; footprint-exterior transparent)")


def test_persistence():
    import tempfile

    rng = np.random.default_rng(1006)
    with tempfile.TemporaryDirectory() as root:
        for i in range(1000):
            p = random_project(
                rng,
                with_image=bool(rng.integers(0, 2)),
                with_georef=bool(rng.integers(0, 2)),
            )
            directory = f"{root}/p{i}"
            save_project(p, directory)
            loaded = load_project(directory)
            assert loaded == p
            if p.segmap is not None:
                save_project(loaded, f"{root}/q{i}")
                a = open(f"{directory}/segments.boscseg", "rb").read()
                b = open(f"{root}/q{i}/segments.boscseg", "rb").read()
                assert a == b

    seg = SegmentMap(np.arange(12, dtype=np.int32).reshape(3, 4))
    blob = write_segment_raster(seg)
    with pytest.raises(BadFormat):
        read_segment_raster(b"XXXXXXXX" + blob[8:])
    with pytest.raises(BadFormat):
        read_segment_raster(blob[:-1])
    with pytest.raises(BadFormat):
        read_segment_raster(blob[:12])
    ok("persistence (1000 round trips value-equal, rasters byte-identical, corruption rejected)")


def test_conservation_under_edits():
    rng = np.random.default_rng(1007)
    w = h = 32
    img = RasterImage(rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8))
    seg = segment_auto(img, SegmenterParams(k=200.0, min_region_size=4))
    classmap = {sid: 1 for sid in seg.registry}

    for step in range(100):
        choice = rng.integers(0, 4)
        if choice == 0:
            pts = tuple(
                (float(rng.uniform(-2, w + 2)), float(rng.uniform(-2, h + 2)))
                for _ in range(int(rng.integers(1, 4)))
            )
            target = int(rng.choice([0, 1, max(seg.registry, default=0) + 1]))
            seg = paint(seg, BrushStroke(pts, float(rng.uniform(0.5, 4)), target))
        elif choice == 1 and len(seg.registry) >= 2:
            pick = rng.choice(sorted(seg.registry), size=2, replace=False)
            seg = merge_segments(seg, [int(v) for v in pick])
        elif choice == 2:
            ring = [
                (float(rng.uniform(0, w)), float(rng.uniform(0, h))) for _ in range(4)
            ]
            try:
                seg = create_segment_from_polygon(seg, ring)
            except Exception:
                pass
        else:
            seg = fill_unassigned(seg)
        classmap = {sid: classmap.get(sid, 1) for sid in seg.registry}

        assert seg.registry == rebuild_registry(seg.ids)
        assigned = sum(info.pixel_count for info in seg.registry.values())
        assert assigned + int((seg.ids == 0).sum()) == w * h
        stats = compute_stats(seg, classmap)
        total_px = sum(s.pixel_count for s in stats.per_class.values())
        assert total_px + stats.unassigned_pixels == w * h
    ok("conservation (100 random edits keep partition + registry consistent)")


def test_api_contract(tmp_path):
    def blob_png():
        img = np.zeros((48, 48, 3), dtype=np.uint8)
        yy, xx = np.mgrid[0:48, 0:48]
        img[(xx - 14) ** 2 + (yy - 14) ** 2 <= 36] = (220, 30, 30)
        img[(xx - 34) ** 2 + (yy - 32) ** 2 <= 49] = (30, 200, 40)
        buf = io.BytesIO()
        Image.fromarray(img).save(buf, format="PNG")
        return buf.getvalue()

    def wait(client, job_id):
        deadline = time.time() + 20
        while time.time() < deadline:
            doc = client.get(f"/jobs/{job_id}").json()
            if doc["status"] in ("DONE", "FAILED"):
                return doc
            time.sleep(0.02)
        raise AssertionError("job stuck")

    cfg = ServiceConfig(data_root=tmp_path / "data", job_delay_s=0.3)
    with TestClient(create_app(cfg)) as client:
        pid = client.post("/projects", json={"name": "acceptance"}).json()["project_id"]
        assert client.put(f"/projects/{pid}/image", content=blob_png()).status_code == 200

        job = client.post(f"/projects/{pid}/segment/auto", json={"min_region_size": 16}).json()
        locked = client.patch(
            f"/projects/{pid}/segments",
            json={"batch_id": "during", "ops": [{"op": "fill"}]},
        )
        assert locked.status_code == 409 and locked.json()["code"] == "ProjectLocked"
        assert wait(client, job["job_id"])["status"] == "DONE"

        batch = {
            "batch_id": "b1",
            "ops": [{"op": "paint", "polyline": [[1, 1], [10, 10]], "radius": 1.0, "target": 0},
                    {"op": "fill"}],
        }
        first = client.patch(f"/projects/{pid}/segments", json=batch).json()
        again = client.patch(f"/projects/{pid}/segments", json=batch).json()
        assert first == again

        job = client.post(f"/projects/{pid}/cluster", json={"k": 3}).json()
        assert wait(client, job["job_id"])["status"] == "DONE"

        pairs = [
            {"image": [0, 0], "geo": [0.01, 0.01]},
            {"image": [48, 0], "geo": [0.01, 0.0104]},
            {"image": [0, 48], "geo": [0.0064, 0.01]},
        ]
        assert client.put(f"/projects/{pid}/georef", json={"pairs": pairs}).status_code == 200
        stats = client.get(f"/projects/{pid}/stats").json()
        assert sum(v["instance_count"] for v in stats["classes"].values()) == 3
        bundle = client.get(f"/projects/{pid}/export/bundle")
        with zipfile.ZipFile(io.BytesIO(bundle.content)) as zf:
            assert "export.geojson" in zf.namelist()
    ok("api contract (pipeline completes; ProjectLocked during job; idempotent replay)")
