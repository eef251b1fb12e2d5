/**
 * Georeference wizard state: paired image/map clicks, numbered from 1.
 *
 * The user alternates clicks between the image pane and the map pane; a
 * pair is complete when it has both points.  Submission requires at least
 * three complete pairs.
 */
export const MIN_PAIRS = 3;
export function initialWizard(anchorZoom = 18) {
    return { pairs: [], anchorZoom, error: null, highlightCollinear: false };
}
function firstIncomplete(pairs, key) {
    for (let i = 0; i < pairs.length; i++) {
        if (pairs[i][key] === null)
            return i;
    }
    return -1;
}
export function addImagePoint(state, x, y) {
    const pairs = state.pairs.map((p) => ({ ...p }));
    const slot = firstIncomplete(pairs, "image");
    if (slot >= 0)
        pairs[slot].image = [x, y];
    else
        pairs.push({ image: [x, y], geo: null });
    return { ...state, pairs, error: null, highlightCollinear: false };
}
export function addGeoPoint(state, lat, lon) {
    const pairs = state.pairs.map((p) => ({ ...p }));
    const slot = firstIncomplete(pairs, "geo");
    if (slot >= 0)
        pairs[slot].geo = [lat, lon];
    else
        pairs.push({ image: null, geo: [lat, lon] });
    return { ...state, pairs, error: null, highlightCollinear: false };
}
export function deletePair(state, index) {
    const pairs = state.pairs.filter((_, i) => i !== index);
    return { ...state, pairs, error: null, highlightCollinear: false };
}
export function completePairs(state) {
    return state.pairs.filter((p) => p.image !== null && p.geo !== null);
}
/** The submit button is enabled only with >= 3 complete pairs. */
export function submitEnabled(state) {
    return completePairs(state).length >= MIN_PAIRS;
}
export function submitBody(state) {
    return { pairs: completePairs(state), anchor_zoom: state.anchorZoom };
}
/** Server rejection: collinear control points get highlighted for the user. */
export function applyServerError(state, code, message) {
    return {
        ...state,
        error: `${code}: ${message}`,
        highlightCollinear: code === "DegenerateControlPoints",
    };
}
