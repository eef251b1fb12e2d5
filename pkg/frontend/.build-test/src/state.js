/**
 * Editor state and its transition rules.
 *
 * Invariants enforced here:
 * - the pending batch empties immediately on a successful PATCH ack, and
 *   the displayed revision becomes the acknowledged server revision;
 * - local previews are only ever tagged with the revision they were made
 *   against; a mismatch on fetch discards them;
 * - editing tools are disabled while a job runs (the server would answer
 *   ProjectLocked anyway);
 * - switching tools with a non-empty batch requires a flush-or-discard
 *   decision from the user.
 */
export function initialState() {
    return {
        projectId: null,
        revision: 0,
        tool: "brush",
        brushRadius: 3,
        selectedClass: 1,
        pendingOps: [],
        previewRevision: null,
        layers: { image: true, segments: true, classes: true, mapOverlay: true },
        viewport: { lat: 0, lon: 0, zoom: 2 },
        jobRunning: false,
    };
}
export function editingEnabled(state) {
    return state.projectId !== null && !state.jobRunning;
}
export function queueOp(state, op) {
    if (!editingEnabled(state)) {
        throw new Error("editing is disabled while a job is running");
    }
    return {
        ...state,
        pendingOps: [...state.pendingOps, op],
        previewRevision: state.previewRevision ?? state.revision,
    };
}
/** Tool switches with a pending batch must not silently lose edits. */
export function requestToolSwitch(state, tool) {
    if (tool === state.tool)
        return { kind: "switched", state };
    if (state.pendingOps.length > 0)
        return { kind: "flush-or-discard", requested: tool };
    return { kind: "switched", state: { ...state, tool } };
}
export function discardBatch(state) {
    return { ...state, pendingOps: [], previewRevision: null };
}
/** A successful PATCH ack: batch emptied, revision adopted. */
export function acknowledgePatch(state, revision) {
    return { ...state, pendingOps: [], previewRevision: null, revision };
}
/** Raster fetched at `revision`: is the local preview still valid? */
export function previewValidFor(state, revision) {
    return state.previewRevision === null || state.previewRevision === revision;
}
export function setJobRunning(state, running) {
    return { ...state, jobRunning: running };
}
let batchCounter = 0;
/** Client-generated batch ids make PATCH retries idempotent. */
export function nextBatchId() {
    batchCounter += 1;
    return `batch-${Date.now().toString(36)}-${batchCounter}`;
}
