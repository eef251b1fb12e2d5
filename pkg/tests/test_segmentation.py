import numpy as np
import pytest

from bosc.errors import (
    DegeneratePolygon,
    DimensionMismatch,
    InvalidArgument,
    UnknownSegmentId,
)
from bosc.raster import RasterImage, SegmentMap, connected_components, rebuild_registry
from bosc.segmentation import (
    BrushStroke,
    SegmenterParams,
    create_segment_from_polygon,
    fill_unassigned,
    ingest_external_mask,
    merge_segments,
    paint,
    segment_auto,
)

from oracles import polygon_pixels, stroke_pixels


def blob_image(size=64, disks=((16, 20, 8, (220, 30, 30)), (44, 40, 9, (30, 200, 40)))):
    """Black canvas with solid color disks; returns image and per-disk masks."""
    img = np.zeros((size, size, 3), dtype=np.uint8)
    masks = []
    yy, xx = np.mgrid[0:size, 0:size]
    for cx, cy, rad, color in disks:
        m = (xx - cx) ** 2 + (yy - cy) ** 2 <= rad**2
        img[m] = color
        masks.append(m)
    return RasterImage(img), masks


def color_components(image: RasterImage) -> np.ndarray:
    """Oracle: components of exactly-equal color, labeled in scan order."""
    rgb = image.pixels.astype(np.int64)
    key = rgb[..., 0] * 65536 + rgb[..., 1] * 256 + rgb[..., 2]
    labels = np.zeros(key.shape, dtype=np.int32)
    nxt = 1
    for r in range(key.shape[0]):
        for c in range(key.shape[1]):
            if labels[r, c]:
                continue
            stack = [(r, c)]
            labels[r, c] = nxt
            while stack:
                y, x = stack.pop()
                for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                    y2, x2 = y + dy, x + dx
                    if (
                        0 <= y2 < key.shape[0]
                        and 0 <= x2 < key.shape[1]
                        and labels[y2, x2] == 0
                        and key[y2, x2] == key[y, x]
                    ):
                        labels[y2, x2] = nxt
                        stack.append((y2, x2))
            nxt += 1
    return labels


class TestSegmentAuto:
    def test_uniform_image_single_segment(self):
        img = RasterImage(np.full((32, 32, 3), 77, dtype=np.uint8))
        seg = segment_auto(img, SegmenterParams(k=0.0, min_region_size=1))
        assert list(seg.registry) == [1]
        assert seg.registry[1].pixel_count == 1024

    def test_two_halves(self):
        px = np.zeros((32, 32, 3), dtype=np.uint8)
        px[:, :16] = (255, 0, 0)
        px[:, 16:] = (0, 0, 255)
        seg = segment_auto(RasterImage(px), SegmenterParams(k=1.0, min_region_size=1))
        assert len(seg.registry) == 2
        assert seg.registry[1].pixel_count == 512
        assert seg.registry[2].pixel_count == 512
        assert np.array_equal(seg.ids, color_components(RasterImage(px)))

    def test_three_blob_fixture_matches_color_components(self):
        img, _ = blob_image()
        seg = segment_auto(img, SegmenterParams(k=500.0, min_region_size=16))
        oracle = color_components(img)
        assert len(seg.registry) == 3
        assert np.array_equal(seg.ids, oracle)

    def test_partition_connected_min_size(self):
        rng = np.random.default_rng(5)
        img = RasterImage(rng.integers(0, 256, size=(48, 48, 3), dtype=np.uint8))
        params = SegmenterParams(k=200.0, min_region_size=8)
        seg = segment_auto(img, params)
        assert int((seg.ids == 0).sum()) == 0
        for sid, info in seg.registry.items():
            comp = connected_components(seg.ids == sid)
            assert int(comp.max()) == 1
            assert info.pixel_count >= 8 or info.pixel_count == 48 * 48

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        img = RasterImage(rng.integers(0, 256, size=(40, 40, 3), dtype=np.uint8))
        a = segment_auto(img)
        b = segment_auto(img)
        assert a.ids.tobytes() == b.ids.tobytes()

    def test_count_monotone_in_k(self):
        rng = np.random.default_rng(13)
        img = RasterImage(rng.integers(0, 256, size=(48, 48, 3), dtype=np.uint8))
        counts = [
            len(segment_auto(img, SegmenterParams(k=k, min_region_size=1)).registry)
            for k in (10.0, 50.0, 200.0, 1000.0, 5000.0)
        ]
        assert counts == sorted(counts, reverse=True)


class TestIngestExternalMask:
    def test_consecutive_unchanged(self):
        img = RasterImage(np.zeros((2, 3, 3), dtype=np.uint8))
        raw = np.array([[1, 1, 2], [2, 3, 3]])
        seg = ingest_external_mask(img, raw)
        assert np.array_equal(seg.ids, raw)

    def test_sparse_ids_relabel(self):
        img = RasterImage(np.zeros((1, 4, 3), dtype=np.uint8))
        seg = ingest_external_mask(img, np.array([[7, 7, 42, 42]]))
        assert seg.ids.tolist() == [[1, 1, 2, 2]]

    def test_relabel_matches_scan_order_oracle(self):
        rng = np.random.default_rng(21)
        img = RasterImage(np.zeros((12, 12, 3), dtype=np.uint8))
        raw = rng.integers(0, 50, size=(12, 12))
        seg = ingest_external_mask(img, raw)
        # oracle: rank of first occurrence among positive values
        seen: dict[int, int] = {}
        expect = np.zeros_like(raw, dtype=np.int32)
        for r in range(12):
            for c in range(12):
                v = int(raw[r, c])
                if v == 0:
                    continue
                if v not in seen:
                    seen[v] = len(seen) + 1
                expect[r, c] = seen[v]
        assert np.array_equal(seg.ids, expect)

    def test_dimension_mismatch(self):
        img = RasterImage(np.zeros((2, 2, 3), dtype=np.uint8))
        with pytest.raises(DimensionMismatch):
            ingest_external_mask(img, np.ones((3, 2), dtype=np.int32))


class TestPaint:
    def test_row_stroke_radius_point_six(self):
        seg = SegmentMap(np.ones((5, 8), dtype=np.int32))
        stroke = BrushStroke(((0.5, 2.5), (7.5, 2.5)), 0.6, 9)
        out = paint(seg, stroke)
        assert (out.ids[2] == 9).all()
        assert (out.ids[[0, 1, 3, 4]] == 1).all()

    def test_erase_everything(self):
        seg = SegmentMap(np.ones((4, 4), dtype=np.int32))
        stroke = BrushStroke(((2.0, 2.0),), 10.0, 0)
        out = paint(seg, stroke)
        assert out.registry == {}
        assert not out.ids.any()

    def test_matches_distance_oracle(self):
        rng = np.random.default_rng(31)
        seg = SegmentMap(np.ones((20, 24), dtype=np.int32))
        for _ in range(10):
            pts = tuple(
                (float(rng.uniform(-2, 26)), float(rng.uniform(-2, 22)))
                for _ in range(rng.integers(1, 5))
            )
            radius = float(rng.uniform(0.3, 4.0))
            out = paint(seg, BrushStroke(pts, radius, 7))
            got = {(c, r) for r, c in zip(*np.nonzero(out.ids == 7))}
            assert got == stroke_pixels(pts, radius, 24, 20)

    def test_idempotent(self):
        seg = SegmentMap(np.ones((16, 16), dtype=np.int32))
        stroke = BrushStroke(((1.0, 1.0), (14.0, 13.0)), 2.5, 3)
        once = paint(seg, stroke)
        twice = paint(once, stroke)
        assert once == twice

    def test_fresh_id_creates_segment(self):
        seg = SegmentMap(np.ones((4, 4), dtype=np.int32))
        out = paint(seg, BrushStroke(((1.5, 1.5),), 0.4, 55))
        assert 55 in out.registry


class TestMergeSegments:
    def test_counts_add(self):
        ids = np.zeros((4, 4), dtype=np.int32)
        ids[0] = 3
        ids[1] = 3
        ids[2, :2] = 3
        ids[2, 2:] = 5
        ids[3] = 5
        out = merge_segments(SegmentMap(ids), [3, 5])
        assert out.registry[3].pixel_count == 16
        assert 5 not in out.registry

    def test_duplicate_is_invalid(self):
        seg = SegmentMap(np.full((2, 2), 4, dtype=np.int32))
        with pytest.raises(InvalidArgument):
            merge_segments(seg, [4, 4])

    def test_unknown_id(self):
        seg = SegmentMap(np.full((2, 2), 2, dtype=np.int32))
        with pytest.raises(UnknownSegmentId):
            merge_segments(seg, [2, 99])

    def test_commutative_in_id_order(self):
        ids = np.arange(1, 10, dtype=np.int32).reshape(3, 3)
        a = merge_segments(SegmentMap(ids), [2, 7, 5])
        b = merge_segments(SegmentMap(ids), [7, 5, 2])
        assert a == b


class TestPolygon:
    def test_square_covers_16_pixels(self):
        seg = SegmentMap(np.ones((8, 8), dtype=np.int32))
        out = create_segment_from_polygon(seg, [(0, 0), (4, 0), (4, 4), (0, 4)])
        assert out.registry[2].pixel_count == 16
        assert (out.ids[:4, :4] == 2).all()

    def test_zero_area_triangle(self):
        seg = SegmentMap(np.ones((4, 4), dtype=np.int32))
        with pytest.raises(DegeneratePolygon):
            create_segment_from_polygon(seg, [(0, 0), (1, 1), (2, 2)])

    def test_matches_raycast_oracle(self):
        rng = np.random.default_rng(17)
        seg = SegmentMap(np.ones((18, 18), dtype=np.int32))
        for _ in range(10):
            ring = [(float(rng.uniform(0, 18)), float(rng.uniform(0, 18))) for _ in range(6)]
            try:
                out = create_segment_from_polygon(seg, ring)
            except DegeneratePolygon:
                continue
            inside = polygon_pixels(ring, 18, 18)
            got = {(c, r) for r, c in zip(*np.nonzero(out.ids != 1))}
            assert got == inside


class TestFillUnassigned:
    def test_single_hole_joins_surrounder(self):
        ids = np.full((3, 3), 2, dtype=np.int32)
        ids[1, 1] = 0
        out = fill_unassigned(SegmentMap(ids))
        assert out.ids[1, 1] == 2

    def test_all_zero_becomes_fresh_segment(self):
        out = fill_unassigned(SegmentMap(np.zeros((4, 5), dtype=np.int32)))
        assert list(out.registry) == [1]
        assert out.registry[1].pixel_count == 20

    def test_boundary_majority_wins(self):
        # region of two zero pixels: 3 edges to segment 2, 1 edge to segment 1
        ids = np.array(
            [
                [2, 2, 2],
                [2, 0, 2],
                [2, 0, 1],
            ],
            dtype=np.int32,
        )
        out = fill_unassigned(SegmentMap(ids))
        assert out.ids[1, 1] == 2 and out.ids[2, 1] == 2

    def test_tie_prefers_smaller_id(self):
        ids = np.array([[1, 0, 2]], dtype=np.int32)
        out = fill_unassigned(SegmentMap(ids))
        assert out.ids[0, 1] == 1

    def test_matches_boundary_count_oracle(self):
        rng = np.random.default_rng(41)
        for _ in range(10):
            ids = rng.integers(0, 4, size=(12, 12)).astype(np.int32)
            out = fill_unassigned(SegmentMap(ids))
            regions = connected_components(ids == 0)
            fresh = int(ids.max())
            for reg in range(1, int(regions.max()) + 1):
                counts: dict[int, int] = {}
                for r, c in zip(*np.nonzero(regions == reg)):
                    for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                        rr, cc = r + dr, c + dc
                        if 0 <= rr < 12 and 0 <= cc < 12 and ids[rr, cc] > 0:
                            counts[int(ids[rr, cc])] = counts.get(int(ids[rr, cc]), 0) + 1
                cell = next(zip(*np.nonzero(regions == reg)))
                if counts:
                    want = max(counts, key=lambda s: (counts[s], -s))
                    assert out.ids[cell] == want
                else:
                    fresh += 1
                    assert out.ids[cell] == fresh
            assert not (out.ids == 0).any()


class TestInvariants:
    def test_every_op_preserves_registry_consistency(self):
        rng = np.random.default_rng(2)
        img = RasterImage(rng.integers(0, 256, size=(24, 24, 3), dtype=np.uint8))
        seg = segment_auto(img, SegmenterParams(k=100.0, min_region_size=4))
        ops = [
            lambda s: paint(s, BrushStroke(((3.0, 3.0), (20.0, 18.0)), 1.5, 0)),
            fill_unassigned,
            lambda s: create_segment_from_polygon(s, [(2, 2), (12, 4), (8, 14)]),
            lambda s: merge_segments(s, sorted(s.registry)[:2])
            if len(s.registry) >= 2
            else s,
        ]
        for op in ops:
            seg = op(seg)
            assert seg.registry == rebuild_registry(seg.ids)
            total = sum(i.pixel_count for i in seg.registry.values())
            assert total + int((seg.ids == 0).sum()) == 24 * 24

    def test_params_validation(self):
        with pytest.raises(InvalidArgument):
            SegmenterParams(k=-1.0)
        with pytest.raises(InvalidArgument):
            SegmenterParams(min_region_size=0)
        with pytest.raises(InvalidArgument):
            BrushStroke(((0, 0),), 0.0, 1)
