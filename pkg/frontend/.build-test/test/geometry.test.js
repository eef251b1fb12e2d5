import assert from "node:assert/strict";
import { test } from "node:test";
import { polygonPixels, strokePixels } from "../src/geometry.js";
test("row stroke with radius 0.6 covers exactly that row", () => {
    const hits = strokePixels([[0.5, 2.5], [7.5, 2.5]], 0.6, 8, 5);
    for (let c = 0; c < 8; c++) {
        assert.ok(hits.has(2 * 8 + c), `pixel (${c}, 2) expected`);
    }
    assert.equal(hits.size, 8); // adjacent rows are at distance 1 > 0.6
});
test("single point stroke hits only its disk", () => {
    const hits = strokePixels([[4.5, 4.5]], 1.0, 9, 9);
    assert.ok(hits.has(4 * 9 + 4));
    assert.ok(hits.has(4 * 9 + 5)); // center distance exactly 1 is inside (<=)
    assert.ok(!hits.has(0));
    assert.equal(hits.size, 5); // cross of 5 at radius 1
});
test("stroke outside the raster hits nothing", () => {
    assert.equal(strokePixels([[-10, -10], [-5, -10]], 1.5, 8, 8).size, 0);
});
test("stroke pixels are within radius, others beyond", () => {
    // deterministic pseudo-random strokes; verify the defining predicate
    let seed = 42;
    const rand = () => {
        seed = (seed * 1664525 + 1013904223) >>> 0;
        return seed / 2 ** 32;
    };
    for (let trial = 0; trial < 5; trial++) {
        const pts = [];
        const n = 1 + Math.floor(rand() * 3);
        for (let i = 0; i < n; i++)
            pts.push([rand() * 20 - 2, rand() * 16 - 2]);
        const radius = 0.4 + rand() * 3;
        const hits = strokePixels(pts, radius, 18, 14);
        const dist = (px, py) => {
            let best = Infinity;
            const segs = pts.length === 1 ? [[pts[0], pts[0]]] : pts.slice(1).map((p, i) => [pts[i], p]);
            for (const [a, b] of segs) {
                const dx = b[0] - a[0];
                const dy = b[1] - a[1];
                const len2 = dx * dx + dy * dy;
                const t = len2 === 0 ? 0 : Math.max(0, Math.min(1, ((px - a[0]) * dx + (py - a[1]) * dy) / len2));
                best = Math.min(best, Math.hypot(px - a[0] - t * dx, py - a[1] - t * dy));
            }
            return best;
        };
        for (let r = 0; r < 14; r++) {
            for (let c = 0; c < 18; c++) {
                const inside = dist(c + 0.5, r + 0.5) <= radius;
                assert.equal(hits.has(r * 18 + c), inside, `pixel (${c}, ${r}) trial ${trial}`);
            }
        }
    }
});
test("axis-aligned square polygon covers its pixel block", () => {
    const hits = polygonPixels([[0, 0], [4, 0], [4, 4], [0, 4]], 8, 8);
    assert.equal(hits.size, 16);
    for (let r = 0; r < 4; r++) {
        for (let c = 0; c < 4; c++)
            assert.ok(hits.has(r * 8 + c));
    }
});
test("degenerate ring selects nothing", () => {
    assert.equal(polygonPixels([[0, 0], [4, 0]], 8, 8).size, 0);
});
