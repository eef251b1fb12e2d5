/**
 * Classification panel logic: stop-rule controls, seed bookkeeping and the
 * legend rows (class palette + live counts from the stats endpoint).
 */
export function defaultControls() {
    return { mode: "k", k: 2, t: 1.0, standardize: false, propagate: false, source: "builtin" };
}
export function clusterRequestBody(controls, seeds) {
    const body = {
        standardize: controls.standardize,
        propagate: controls.propagate,
        source: controls.source,
    };
    if (controls.mode === "k")
        body.k = controls.k;
    else
        body.t = controls.t;
    if (Object.keys(seeds).length > 0)
        body.seeds = seeds;
    return body;
}
/** Toggle a seed: clicking a seeded segment with the same class unseeds it. */
export function toggleSeed(seeds, segmentId, classId) {
    const key = String(segmentId);
    const out = { ...seeds };
    if (out[key] === classId)
        delete out[key];
    else
        out[key] = classId;
    return out;
}
export function legendRows(classes, stats) {
    return classes.map((c) => {
        const s = stats[String(c.class_id)];
        return {
            classId: c.class_id,
            name: c.name,
            cssColor: `rgba(${c.color[0]}, ${c.color[1]}, ${c.color[2]}, ${(c.color[3] / 255).toFixed(3)})`,
            instances: s?.instance_count ?? 0,
            pixels: s?.pixel_count ?? 0,
            areaM2: s?.area_m2 ?? null,
        };
    });
}
