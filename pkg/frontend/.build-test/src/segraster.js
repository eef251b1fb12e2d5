/** BOSCSEG1 segment raster decoding (see docs/formats.md). */
const MAGIC = "BOSCSEG1";
export function decodeSegmentRaster(buffer) {
    const bytes = new Uint8Array(buffer);
    if (bytes.length < 16)
        throw new Error("segment raster too short");
    for (let i = 0; i < 8; i++) {
        if (bytes[i] !== MAGIC.charCodeAt(i))
            throw new Error("bad segment raster magic");
    }
    const view = new DataView(buffer);
    const width = view.getUint32(8, true);
    const height = view.getUint32(12, true);
    if (width < 1 || height < 1)
        throw new Error("non-positive raster dimensions");
    const expected = 16 + 4 * width * height;
    if (bytes.length !== expected) {
        throw new Error(`segment raster is ${bytes.length} bytes, expected ${expected}`);
    }
    const ids = new Int32Array(width * height);
    for (let i = 0; i < ids.length; i++) {
        ids[i] = view.getUint32(16 + 4 * i, true);
    }
    return { width, height, ids };
}
/** Set of registered ids (everything positive that occurs in the raster). */
export function registeredIds(raster) {
    const out = new Set();
    for (const v of raster.ids)
        if (v > 0)
            out.add(v);
    return out;
}
