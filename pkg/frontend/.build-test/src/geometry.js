/**
 * Geometry shared with the backend.
 *
 * Pixel (col, row) has its center at (col + 0.5, row + 0.5) in continuous
 * image coordinates (PIXEL_CENTER_OFFSET, see docs/api.md).  Brush and
 * polygon previews computed here must produce the exact pixel sets the
 * server produces for the same op, so the formulas below mirror the
 * backend ones operation for operation.
 */
export const PIXEL_CENTER_OFFSET = 0.5;
function segmentDistance(px, py, a, b) {
    const dx = b[0] - a[0];
    const dy = b[1] - a[1];
    const len2 = dx * dx + dy * dy;
    if (len2 === 0) {
        const ex = px - a[0];
        const ey = py - a[1];
        return Math.sqrt(ex * ex + ey * ey);
    }
    let t = ((px - a[0]) * dx + (py - a[1]) * dy) / len2;
    t = Math.max(0, Math.min(1, t));
    const ex = px - (a[0] + t * dx);
    const ey = py - (a[1] + t * dy);
    return Math.sqrt(ex * ex + ey * ey);
}
/** Pixels whose centers lie within `radius` of the polyline. */
export function strokePixels(polyline, radius, width, height) {
    const hits = new Set();
    if (polyline.length === 0)
        return hits;
    let minX = Infinity;
    let minY = Infinity;
    let maxX = -Infinity;
    let maxY = -Infinity;
    for (const [x, y] of polyline) {
        minX = Math.min(minX, x);
        minY = Math.min(minY, y);
        maxX = Math.max(maxX, x);
        maxY = Math.max(maxY, y);
    }
    const c0 = Math.max(0, Math.floor(minX - radius - PIXEL_CENTER_OFFSET));
    const c1 = Math.min(width - 1, Math.ceil(maxX + radius));
    const r0 = Math.max(0, Math.floor(minY - radius - PIXEL_CENTER_OFFSET));
    const r1 = Math.min(height - 1, Math.ceil(maxY + radius));
    for (let r = r0; r <= r1; r++) {
        for (let c = c0; c <= c1; c++) {
            const px = c + PIXEL_CENTER_OFFSET;
            const py = r + PIXEL_CENTER_OFFSET;
            let d = Infinity;
            if (polyline.length === 1) {
                const ex = px - polyline[0][0];
                const ey = py - polyline[0][1];
                d = Math.sqrt(ex * ex + ey * ey);
            }
            else {
                for (let i = 0; i + 1 < polyline.length; i++) {
                    d = Math.min(d, segmentDistance(px, py, polyline[i], polyline[i + 1]));
                    if (d <= radius)
                        break;
                }
            }
            if (d <= radius)
                hits.add(r * width + c);
        }
    }
    return hits;
}
/** Pixels whose centers fall inside the ring (even-odd rule). */
export function polygonPixels(ring, width, height) {
    const hits = new Set();
    if (ring.length < 3)
        return hits;
    for (let r = 0; r < height; r++) {
        for (let c = 0; c < width; c++) {
            const px = c + PIXEL_CENTER_OFFSET;
            const py = r + PIXEL_CENTER_OFFSET;
            let inside = false;
            for (let i = 0; i < ring.length; i++) {
                const [x1, y1] = ring[i];
                const [x2, y2] = ring[(i + 1) % ring.length];
                if (y1 === y2)
                    continue;
                if (y1 > py !== y2 > py && px < x1 + ((py - y1) * (x2 - x1)) / (y2 - y1)) {
                    inside = !inside;
                }
            }
            if (inside)
                hits.add(r * width + c);
        }
    }
    return hits;
}
