/**
 * Segment editor rendering: source image, segment boundaries, class colors
 * and the local preview of the pending edit batch.
 *
 * Rendering is done into a plain RGBA buffer so the compositing rules are
 * testable without a canvas; main.ts blits the buffer.
 */
import { polygonPixels, strokePixels } from "./geometry.js";
export const BOUNDARY_COLOR = [20, 20, 20, 255];
export const PREVIEW_COLOR = [255, 220, 0, 140];
/** Pixels on a 4-neighbor id discontinuity (drawn as segment boundaries). */
export function boundaryMask(raster) {
    const { width, height, ids } = raster;
    const out = new Uint8Array(width * height);
    for (let r = 0; r < height; r++) {
        for (let c = 0; c < width; c++) {
            const v = ids[r * width + c];
            const right = c + 1 < width && ids[r * width + c + 1] !== v;
            const down = r + 1 < height && ids[(r + 1) * width + c] !== v;
            if (right || down)
                out[r * width + c] = 1;
        }
    }
    return out;
}
/** Pixel set a pending batch would repaint, for the local preview layer. */
export function previewPixels(ops, width, height) {
    const out = new Set();
    for (const op of ops) {
        if (op.op === "paint") {
            for (const p of strokePixels(op.polyline, op.radius, width, height))
                out.add(p);
        }
        else if (op.op === "polygon") {
            for (const p of polygonPixels(op.ring, width, height))
                out.add(p);
        }
        // merge and fill change ids, not geometry; no pixel preview
    }
    return out;
}
function blend(dst, at, rgba) {
    const a = rgba[3] / 255;
    for (let ch = 0; ch < 3; ch++) {
        dst[at + ch] = Math.round(rgba[ch] * a + dst[at + ch] * (1 - a));
    }
    dst[at + 3] = 255;
}
/**
 * Compose the editor frame into `out` (RGBA, width*height*4): image layer,
 * class-color layer, segment boundaries, then the batch preview.
 */
export function composeEditorFrame(out, imageRgb, raster, classOf, colors, layers, pendingPreview, width, height) {
    const n = width * height;
    for (let i = 0; i < n; i++) {
        const at = i * 4;
        if (layers.image && imageRgb) {
            out[at] = imageRgb[i * 3];
            out[at + 1] = imageRgb[i * 3 + 1];
            out[at + 2] = imageRgb[i * 3 + 2];
        }
        else {
            out[at] = out[at + 1] = out[at + 2] = 24;
        }
        out[at + 3] = 255;
    }
    if (raster && layers.classes) {
        for (let i = 0; i < n; i++) {
            const sid = raster.ids[i];
            if (sid <= 0)
                continue;
            const cid = classOf[String(sid)];
            const color = colors[cid];
            if (!color)
                continue;
            blend(out, i * 4, [color[0], color[1], color[2], Math.min(color[3], 150)]);
        }
    }
    if (raster && layers.segments) {
        const boundary = boundaryMask(raster);
        for (let i = 0; i < n; i++) {
            if (boundary[i])
                blend(out, i * 4, BOUNDARY_COLOR);
        }
    }
    for (const i of pendingPreview) {
        if (i >= 0 && i < n)
            blend(out, i * 4, PREVIEW_COLOR);
    }
}
/** Segment under a click, for merge-pick / seed-label / reassign tools. */
export function segmentAt(raster, x, y) {
    const c = Math.floor(x);
    const r = Math.floor(y);
    if (c < 0 || r < 0 || c >= raster.width || r >= raster.height)
        return 0;
    return raster.ids[r * raster.width + c];
}
